//! Exhaustive breadth-first enumeration of small puzzles.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{Action, GridDims, PuzzleState};
use crate::error::{Error, Result};

/// Largest grid (in cells) the enumerator accepts.
pub const ENUMERATION_CELL_LIMIT: usize = 9;

/// Packs tile ids as 4-bit nibbles, cell 0 in the low bits.
pub fn pack(tiles: &[u16]) -> u64 {
    debug_assert!(tiles.len() <= 16 && tiles.iter().all(|&t| t < 16));
    tiles
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &t)| acc | (u64::from(t) << (4 * i)))
}

pub fn unpack(packed: u64, cells: usize) -> Vec<u16> {
    (0..cells).map(|i| ((packed >> (4 * i)) & 0xF) as u16).collect()
}

#[inline]
fn nibble(packed: u64, i: usize) -> u64 {
    (packed >> (4 * i)) & 0xF
}

/// Exact optimal solution length of every reachable state of a small grid.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    dims: GridDims,
    depths: HashMap<u64, u8>,
    /// Per-depth counts, index = depth.
    histogram: Vec<u64>,
}

impl DistanceTable {
    /// Breadth-first search from the solved state over the move graph.
    pub fn build(dims: GridDims) -> Result<Self> {
        if dims.cells() > ENUMERATION_CELL_LIMIT {
            return Err(Error::EnumerationGuard {
                height: dims.height(),
                width: dims.width(),
                limit: ENUMERATION_CELL_LIMIT,
            });
        }
        let solved = PuzzleState::solved(dims);
        let start = pack(solved.tiles());
        let mut depths = HashMap::new();
        depths.insert(start, 0u8);
        let mut histogram = vec![1u64];
        let mut frontier = vec![(start, solved.blank_index())];
        let mut depth = 0u8;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for &(packed, blank) in &frontier {
                for action in Action::ALL {
                    let Some(target) = action.blank_target(dims, blank) else {
                        continue;
                    };
                    let tile = nibble(packed, target);
                    let child = packed - (tile << (4 * target)) + (tile << (4 * blank));
                    if let std::collections::hash_map::Entry::Vacant(e) = depths.entry(child) {
                        e.insert(depth);
                        next.push((child, target));
                    }
                }
            }
            if !next.is_empty() {
                histogram.push(next.len() as u64);
            }
            frontier = next;
        }
        Ok(Self {
            dims,
            depths,
            histogram,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    /// Optimal solution length, or `None` for tile lists not reachable
    /// from the solved state.
    pub fn depth_of_tiles(&self, tiles: &[u16]) -> Option<u8> {
        if tiles.len() != self.dims.cells() {
            return None;
        }
        self.depths.get(&pack(tiles)).copied()
    }

    pub fn depth(&self, state: &PuzzleState) -> Option<u8> {
        if state.dims() != self.dims {
            return None;
        }
        self.depth_of_tiles(state.tiles())
    }

    /// First action, in `Action::ALL` order, that moves one step closer to solved.
    pub fn optimal_action(&self, state: &PuzzleState) -> Option<Action> {
        let d = self.depth(state)?;
        if d == 0 {
            return None;
        }
        Action::ALL.into_iter().find(|&a| {
            let mut next = state.clone();
            next.apply_move(a) && self.depth(&next) == Some(d - 1)
        })
    }

    /// Iterates over every reachable state with its depth, in no particular order.
    pub fn states(&self) -> impl Iterator<Item = (PuzzleState, u8)> + '_ {
        let cells = self.dims.cells();
        self.depths.iter().map(move |(&packed, &d)| {
            (
                PuzzleState::from_tiles(self.dims, unpack(packed, cells)).expect("reachable"),
                d,
            )
        })
    }

    pub fn report(&self) -> EnumerationReport {
        let state_count: u64 = self.histogram.iter().sum();
        let total_depth: u64 = self
            .histogram
            .iter()
            .enumerate()
            .map(|(d, &n)| d as u64 * n)
            .sum();
        EnumerationReport {
            dims: self.dims,
            state_count,
            depth_histogram: self
                .histogram
                .iter()
                .enumerate()
                .map(|(d, &n)| (d as u32, n))
                .collect(),
            total_depth,
            mean_optimal_length: total_depth as f64 / state_count as f64,
            max_depth: (self.histogram.len() - 1) as u32,
        }
    }
}

/// Summary of a full enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub dims: GridDims,
    pub state_count: u64,
    /// Optimal length -> number of states.
    pub depth_histogram: BTreeMap<u32, u64>,
    /// Sum of optimal lengths over all states; `mean = total_depth / state_count`.
    pub total_depth: u64,
    pub mean_optimal_length: f64,
    pub max_depth: u32,
}

impl EnumerationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn histogram_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["depth", "count"])?;
        for (d, n) in &self.depth_histogram {
            w.write_record([d.to_string(), n.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes `enumeration_<dims>.json` and `enumeration_<dims>_histogram.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join(format!("enumeration_{}.json", self.dims));
        let csv = dir.join(format!("enumeration_{}_histogram.csv", self.dims));
        std::fs::write(&json, self.to_json()?).map_err(|e| Error::io(&json, e))?;
        std::fs::write(&csv, self.histogram_csv()?).map_err(|e| Error::io(&csv, e))?;
        Ok((json, csv))
    }
}

pub fn bfs_enumerate(dims: GridDims) -> Result<EnumerationReport> {
    Ok(DistanceTable::build(dims)?.report())
}
