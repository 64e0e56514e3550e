//! Initial-state distributions.

use serde::{Deserialize, Serialize};

use super::state::{is_solvable, Action, GridDims, PuzzleState};
use crate::rng::RandomSource;

/// How episode start states are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum InitMethod {
    /// Uniform over solvable states via shuffle plus parity fix.
    #[default]
    Uniform,
    /// Random walk of `moves` valid moves from the solved state.
    RandomWalk { moves: usize },
}

impl InitMethod {
    pub fn sample(self, dims: GridDims, rng: &mut RandomSource) -> PuzzleState {
        match self {
            InitMethod::Uniform => sample_uniform_solvable(dims, rng),
            InitMethod::RandomWalk { moves } => shuffle_from_solved(dims, moves, rng),
        }
    }
}

/// Shuffles all ids (blank included), then swaps the first two non-blank
/// tiles when the result is unsolvable.
///
/// The swap flips permutation parity without moving the blank, so it maps
/// the unsolvable half one-to-one onto the solvable half and the output is
/// uniform over solvable states.
pub fn sample_uniform_solvable(dims: GridDims, rng: &mut RandomSource) -> PuzzleState {
    let mut tiles: Vec<u16> = (0..dims.cells() as u16).collect();
    rng.shuffle(&mut tiles);
    if !is_solvable(dims, &tiles).expect("shuffle yields a permutation") {
        let mut nonblank = tiles
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != 0)
            .map(|(i, _)| i);
        let a = nonblank.next().expect("at least 3 tiles");
        let b = nonblank.next().expect("at least 3 tiles");
        tiles.swap(a, b);
    }
    PuzzleState::from_solvable_parts(dims, tiles)
}

/// Applies `num_moves` uniformly chosen valid moves to the solved state.
pub fn shuffle_from_solved(dims: GridDims, num_moves: usize, rng: &mut RandomSource) -> PuzzleState {
    let mut state = PuzzleState::solved(dims);
    let mut options: Vec<Action> = Vec::with_capacity(4);
    for _ in 0..num_moves {
        options.clear();
        options.extend(state.valid_actions().iter());
        let a = options[rng.index(options.len())];
        state.apply_move(a);
    }
    state
}
