//! Step reward and transition function.

use serde::{Deserialize, Serialize};

use super::state::{goal_index, Action, GridDims, PuzzleState};

/// Reward settings. The default counts the blank in the distance sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub include_blank: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            include_blank: true,
        }
    }
}

/// Normalizer of the distance: the double sum over 1-indexed cells of
/// `max(i, H - i) + max(j, W - j)`.
pub fn distance_denominator(dims: GridDims) -> u64 {
    let (h, w) = (dims.height() as u64, dims.width() as u64);
    let mut total = 0;
    for i in 1..=h {
        for j in 1..=w {
            total += i.max(h - i) + j.max(w - j);
        }
    }
    total
}

/// Sum of `|row - goal_row| + |col - goal_col|` over the cells' occupants.
pub fn distance_numerator(state: &PuzzleState, config: RewardConfig) -> u64 {
    let dims = state.dims();
    let cells = dims.cells();
    state
        .tiles()
        .iter()
        .enumerate()
        .filter(|(_, &t)| config.include_blank || t != 0)
        .map(|(cell, &t)| {
            let (r, c) = dims.row_col(cell);
            let (gr, gc) = dims.row_col(goal_index(t as usize, cells));
            (r.abs_diff(gr) + c.abs_diff(gc)) as u64
        })
        .sum()
}

/// The normalized distance as an exact fraction `(numerator, denominator)`.
pub fn distance_ratio(state: &PuzzleState, config: RewardConfig) -> (u64, u64) {
    (
        distance_numerator(state, config),
        distance_denominator(state.dims()),
    )
}

/// Normalized Manhattan distance D in `[0, 1]`; zero only when solved.
pub fn normalized_manhattan(state: &PuzzleState) -> f64 {
    normalized_manhattan_with(state, RewardConfig::default())
}

pub fn normalized_manhattan_with(state: &PuzzleState, config: RewardConfig) -> f64 {
    let (num, den) = distance_ratio(state, config);
    num as f64 / den as f64
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: PuzzleState,
    pub reward: f64,
    pub valid: bool,
    pub solved: bool,
    pub terminated: bool,
    pub truncated: bool,
}

pub const INVALID_ACTION_REWARD: f64 = -1.0;
pub const SOLVED_REWARD: f64 = 1.0;

/// Applies `action` as step `step_index` of an episode capped at `max_steps`.
///
/// Invalid moves leave the state unchanged and cost -1. A move that solves
/// the puzzle earns +1 and terminates; any other valid move earns `-D` of
/// the resulting state. `truncated` is set on the last allowed step when
/// the puzzle is still unsolved.
pub fn apply_action(
    state: &PuzzleState,
    action: Action,
    step_index: usize,
    max_steps: usize,
) -> StepOutcome {
    apply_action_with(state, action, step_index, max_steps, RewardConfig::default())
}

pub fn apply_action_with(
    state: &PuzzleState,
    action: Action,
    step_index: usize,
    max_steps: usize,
    config: RewardConfig,
) -> StepOutcome {
    debug_assert!(step_index < max_steps, "step {step_index} past cap {max_steps}");
    let mut next_state = state.clone();
    let valid = next_state.apply_move(action);
    let solved = valid && next_state.is_solved();
    let reward = if !valid {
        INVALID_ACTION_REWARD
    } else if solved {
        SOLVED_REWARD
    } else {
        -normalized_manhattan_with(&next_state, config)
    };
    StepOutcome {
        next_state,
        reward,
        valid,
        solved,
        terminated: solved,
        truncated: !solved && step_index + 1 >= max_steps,
    }
}
