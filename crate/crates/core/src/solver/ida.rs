//! Iterative-deepening A* with the Manhattan heuristic.

use std::time::{Duration, Instant};

use crate::env::{goal_index, Action, GridDims, PuzzleState};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// An optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub path: Vec<Action>,
    pub length: usize,
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(SolveResult),
    /// The node budget ran out before a solution was proven optimal.
    BudgetExhausted {
        nodes_expanded: u64,
        /// f-bound of the iteration that was cut short.
        bound: u32,
    },
}

impl SolveOutcome {
    pub fn solved(self) -> Option<SolveResult> {
        match self {
            SolveOutcome::Solved(r) => Some(r),
            SolveOutcome::BudgetExhausted { .. } => None,
        }
    }
}

enum Flow {
    Found,
    Exceeded(u32),
    OutOfBudget,
}

struct Search {
    dims: GridDims,
    tiles: Vec<u16>,
    blank: usize,
    /// Manhattan distance of tile `t` standing in cell `c`: `dist[t * cells + c]`.
    dist: Vec<u32>,
    path: Vec<Action>,
    nodes: u64,
    budget: u64,
}

impl Search {
    fn new(state: &PuzzleState, budget: u64) -> Self {
        let dims = state.dims();
        let cells = dims.cells();
        let mut dist = vec![0u32; cells * cells];
        for t in 1..cells {
            let (gr, gc) = dims.row_col(goal_index(t, cells));
            for c in 0..cells {
                let (r, col) = dims.row_col(c);
                dist[t * cells + c] = (r.abs_diff(gr) + col.abs_diff(gc)) as u32;
            }
        }
        Self {
            dims,
            tiles: state.tiles().to_vec(),
            blank: state.blank_index(),
            dist,
            path: Vec::new(),
            nodes: 0,
            budget,
        }
    }

    fn heuristic(&self) -> u32 {
        let cells = self.dims.cells();
        self.tiles
            .iter()
            .enumerate()
            .map(|(c, &t)| self.dist[t as usize * cells + c])
            .sum()
    }

    /// Depth-first probe below `bound`. Children are generated in
    /// `Action::ALL` order, skipping the move that undoes the previous one.
    fn probe(&mut self, g: u32, h: u32, bound: u32) -> Flow {
        let f = g + h;
        if f > bound {
            return Flow::Exceeded(f);
        }
        if h == 0 {
            return Flow::Found;
        }
        if self.nodes >= self.budget {
            return Flow::OutOfBudget;
        }
        self.nodes += 1;
        let cells = self.dims.cells();
        let mut next_bound = u32::MAX;
        for action in Action::ALL {
            if self.path.last() == Some(&action.opposite()) {
                continue;
            }
            let Some(target) = action.blank_target(self.dims, self.blank) else {
                continue;
            };
            let tile = self.tiles[target] as usize;
            let child_h = h + self.dist[tile * cells + self.blank] - self.dist[tile * cells + target];
            let blank = self.blank;
            self.tiles.swap(blank, target);
            self.blank = target;
            self.path.push(action);
            let flow = self.probe(g + 1, child_h, bound);
            match flow {
                Flow::Found => return Flow::Found,
                Flow::OutOfBudget => return Flow::OutOfBudget,
                Flow::Exceeded(b) => next_bound = next_bound.min(b),
            }
            self.path.pop();
            self.tiles.swap(blank, target);
            self.blank = blank;
        }
        Flow::Exceeded(next_bound)
    }
}

/// Finds a shortest solution, expanding at most `node_budget` nodes.
///
/// The heuristic ignores the blank, so a state with `h == 0` is solved.
/// Ties between equal-length solutions break by `Action::ALL` order, so
/// the returned path is a deterministic function of the input.
pub fn ida_star(state: &PuzzleState, node_budget: u64) -> Result<SolveOutcome> {
    if !state.is_solvable() {
        return Err(Error::Unsolvable);
    }
    let started = Instant::now();
    let mut search = Search::new(state, node_budget);
    let h = search.heuristic();
    let mut bound = h;
    loop {
        match search.probe(0, h, bound) {
            Flow::Found => {
                let path = std::mem::take(&mut search.path);
                return Ok(SolveOutcome::Solved(SolveResult {
                    length: path.len(),
                    path,
                    nodes_expanded: search.nodes,
                    elapsed: started.elapsed(),
                }));
            }
            Flow::OutOfBudget => {
                return Ok(SolveOutcome::BudgetExhausted {
                    nodes_expanded: search.nodes,
                    bound,
                })
            }
            Flow::Exceeded(next) => {
                debug_assert!(next > bound && next != u32::MAX);
                bound = next;
            }
        }
    }
}
