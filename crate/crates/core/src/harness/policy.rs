//! Policies the harness can drive.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::env::{goal_index, Action, GridDims, PuzzleState};
use crate::error::{Error, Result};
use crate::observation::{
    patch_bounds, BlankFill, Image, ImagePool, Modality, Observation, ObsSpec, CHANNELS,
};
use crate::rng::RandomSource;
use crate::solver::{DistanceTable, SolverPolicy};

/// What a policy sees at one step.
///
/// `observation` is `None` when the policy declared it does not read one.
/// `state` is the ground truth, the same information the environment
/// exposes through its info channel.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInput<'a> {
    pub observation: Option<&'a Observation>,
    pub state: &'a PuzzleState,
    pub step: usize,
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Whether [`Policy::act`] reads the rendered observation.
    fn needs_observation(&self) -> bool {
        true
    }

    /// Called before the first step of every episode.
    fn begin_episode(&mut self) {}

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action>;
}

/// Builds one policy instance per environment (or per episode).
pub type PolicyFactory<'a> = dyn Fn(usize) -> Box<dyn Policy> + Sync + 'a;

/// Uniform over all four actions, valid or not.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: RandomSource,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: RandomSource::new(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn needs_observation(&self) -> bool {
        false
    }

    fn act(&mut self, _: &PolicyInput<'_>) -> Result<Action> {
        Ok(Action::ALL[self.rng.index(4)])
    }
}

/// Replays a fixed action list, cycling when it runs out.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    actions: Vec<Action>,
    pos: usize,
}

impl ScriptedPolicy {
    pub fn new(actions: Vec<Action>) -> Self {
        assert!(!actions.is_empty(), "scripted policy needs at least one action");
        Self { actions, pos: 0 }
    }

    pub fn constant(action: Action) -> Self {
        Self::new(vec![action])
    }
}

impl Policy for ScriptedPolicy {
    fn name(&self) -> &str {
        "scripted"
    }

    fn needs_observation(&self) -> bool {
        false
    }

    fn begin_episode(&mut self) {
        self.pos = 0;
    }

    fn act(&mut self, _: &PolicyInput<'_>) -> Result<Action> {
        let a = self.actions[self.pos % self.actions.len()];
        self.pos += 1;
        Ok(a)
    }
}

impl Policy for SolverPolicy {
    fn name(&self) -> &str {
        "solver"
    }

    fn needs_observation(&self) -> bool {
        false
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action> {
        self.next_action(input.state)?
            .ok_or_else(|| Error::Policy("asked to act on a solved state".into()))
    }
}

#[inline]
fn mix(mut h: u64) -> u64 {
    // splitmix64 finalizer
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn hash_values(values: impl Iterator<Item = f32>) -> u64 {
    values.fold(0x243f_6a88_85a3_08d3, |h, v| {
        mix(h ^ u64::from(v.to_bits()))
    })
}

/// Hash of the exact pixel values in one grid cell.
fn cell_hash(img: &Image, rows: &Range<usize>, cols: &Range<usize>) -> u64 {
    hash_values(
        rows.clone()
            .flat_map(|y| img.row(y)[cols.start * CHANNELS..cols.end * CHANNELS].iter().copied()),
    )
}

fn fold_cells(cell_hashes: impl Iterator<Item = u64>) -> u64 {
    cell_hashes.fold(0, |h, c| mix(h.rotate_left(17) ^ c))
}

/// 64-bit fingerprint of an observation's exact values.
///
/// Image observations are hashed cell by cell over the `dims` grid and the
/// cell hashes folded in row-major order, so the fingerprint of a render
/// can be predicted from per-patch hashes without composing the image.
pub fn observation_fingerprint(obs: &Observation, dims: GridDims) -> u64 {
    match obs {
        Observation::Image(img) if img.height() >= dims.height() && img.width() >= dims.width() => {
            fold_cells((0..dims.cells()).map(|cell| {
                let (r, c) = dims.row_col(cell);
                cell_hash(
                    img,
                    &patch_bounds(img.height(), dims.height(), r),
                    &patch_bounds(img.width(), dims.width(), c),
                )
            }))
        }
        other => hash_values(other.to_f32().into_iter()),
    }
}

/// Per-source-patch hashes of one pool image, for predicting render
/// fingerprints. Only exact when every cell has the same pixel size.
struct PatchHashes {
    patches: Vec<u64>,
    black: u64,
}

impl PatchHashes {
    fn new(img: &Image, dims: GridDims) -> Option<Self> {
        if img.height() % dims.height() != 0 || img.width() % dims.width() != 0 {
            return None;
        }
        let bounds = |cell: usize| {
            let (r, c) = dims.row_col(cell);
            (
                patch_bounds(img.height(), dims.height(), r),
                patch_bounds(img.width(), dims.width(), c),
            )
        };
        let patches = (0..dims.cells())
            .map(|cell| {
                let (rows, cols) = bounds(cell);
                cell_hash(img, &rows, &cols)
            })
            .collect();
        let (rows, cols) = bounds(0);
        let black = hash_values(std::iter::repeat(0.0).take(rows.len() * cols.len() * CHANNELS));
        Some(Self { patches, black })
    }

    fn render_fingerprint(&self, state: &PuzzleState, blank: BlankFill) -> Option<u64> {
        let cells = state.dims().cells();
        let blank_hash = match blank {
            BlankFill::Black => self.black,
            BlankFill::SourcePatch => self.patches[cells - 1],
            BlankFill::Noise { .. } => return None,
        };
        Some(fold_cells(state.tiles().iter().map(|&t| {
            if t == 0 {
                blank_hash
            } else {
                self.patches[goal_index(t as usize, cells)]
            }
        })))
    }
}

/// Diagnostic policy that memorizes exact renders.
///
/// It maps the fingerprint of every observation it was trained on to the
/// optimal action for that state and emits `fallback` for anything it has
/// not seen. It solves the training distribution perfectly and nothing
/// else, which makes it a floor for generalization protocols. The table is
/// shared between clones.
#[derive(Debug, Clone)]
pub struct PixelMemorizer {
    dims: GridDims,
    table: Arc<HashMap<u64, Action>>,
    fallback: Action,
    hits: u64,
    misses: u64,
}

impl PixelMemorizer {
    pub fn new(dims: GridDims, fallback: Action) -> Self {
        Self {
            dims,
            table: Arc::new(HashMap::new()),
            fallback,
            hits: 0,
            misses: 0,
        }
    }

    /// Memorizes the render of every unsolved state in `table` on every pool image.
    pub fn train_exhaustive(table: &DistanceTable, pool: &ImagePool, obs: &ObsSpec) -> Result<Self> {
        let states: Vec<PuzzleState> = table
            .states()
            .filter(|(_, d)| *d > 0)
            .map(|(s, _)| s)
            .collect();
        let mut memo = Self::new(table.dims(), Action::Up);
        memo.train(&states, table, pool, obs)?;
        Ok(memo)
    }

    /// Memorizes renders of `states` on every pool image, labelled with the
    /// optimal action from `table`.
    pub fn train(
        &mut self,
        states: &[PuzzleState],
        table: &DistanceTable,
        pool: &ImagePool,
        obs: &ObsSpec,
    ) -> Result<()> {
        let dims = self.dims;
        let images: Vec<&Image> = (0..pool.len()).map(|i| pool.image(i)).collect();
        let predicted: Vec<Option<PatchHashes>> = images
            .iter()
            .map(|img| match obs.modality {
                Modality::Image => PatchHashes::new(img, dims),
                _ => None,
            })
            .collect();
        let entries: Vec<(u64, Action)> = states
            .par_iter()
            .map(|s| -> Result<Vec<(u64, Action)>> {
                let Some(action) = table.optimal_action(s) else {
                    return Ok(Vec::new());
                };
                images
                    .iter()
                    .zip(&predicted)
                    .map(|(img, pred)| {
                        let key = match pred.as_ref().and_then(|p| p.render_fingerprint(s, obs.blank_fill)) {
                            Some(key) => key,
                            None => observation_fingerprint(&Observation::render(s, obs, Some(img))?, dims),
                        };
                        Ok((key, action))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let table = Arc::make_mut(&mut self.table);
        for (key, action) in entries {
            if let Entry::Vacant(e) = table.entry(key) {
                e.insert(action);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}

impl Policy for PixelMemorizer {
    fn name(&self) -> &str {
        "memorizer"
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action> {
        let obs = input
            .observation
            .ok_or_else(|| Error::Policy("memorizer needs observations".into()))?;
        match self.table.get(&observation_fingerprint(obs, self.dims)) {
            Some(&a) => {
                self.hits += 1;
                Ok(a)
            }
            None => {
                self.misses += 1;
                Ok(self.fallback)
            }
        }
    }
}
