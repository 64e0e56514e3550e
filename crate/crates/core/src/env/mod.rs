//! Puzzle state, dynamics, reward and start-state distributions.

mod init;
mod reward;
mod state;

pub use init::{sample_uniform_solvable, shuffle_from_solved, InitMethod};
pub use reward::{
    apply_action, apply_action_with, distance_denominator, distance_numerator, distance_ratio,
    normalized_manhattan, normalized_manhattan_with, RewardConfig, StepOutcome,
    INVALID_ACTION_REWARD, SOLVED_REWARD,
};
pub use state::{
    goal_position, is_solvable, parse_tiles, Action, ActionSet, GridDims, PuzzleState,
    DEFAULT_MAX_CELLS, MAX_SIDE,
};
pub(crate) use state::goal_index;
