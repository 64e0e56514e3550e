use std::collections::VecDeque;

use crate::env::{Action, PuzzleState};
use crate::error::{Error, Result};
use crate::solver::ida::{ida_star, SolveOutcome, DEFAULT_NODE_BUDGET};

/// Plays optimally by following IDA* solutions.
///
/// The current plan is cached and only recomputed when the observed state
/// departs from the one the plan predicts.
#[derive(Debug, Clone)]
pub struct SolverPolicy {
    budget: u64,
    plan: VecDeque<Action>,
    expected: Option<PuzzleState>,
    solves: u64,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self::new(DEFAULT_NODE_BUDGET)
    }
}

impl SolverPolicy {
    pub fn new(budget: u64) -> Self {
        Self {
            budget,
            plan: VecDeque::new(),
            expected: None,
            solves: 0,
        }
    }

    /// Number of IDA* searches run so far.
    pub fn solves(&self) -> u64 {
        self.solves
    }

    /// Next optimal move, or `None` when `state` is already solved.
    pub fn next_action(&mut self, state: &PuzzleState) -> Result<Option<Action>> {
        if state.is_solved() {
            self.plan.clear();
            self.expected = None;
            return Ok(None);
        }
        if self.expected.as_ref() != Some(state) || self.plan.is_empty() {
            self.solves += 1;
            match ida_star(state, self.budget)? {
                SolveOutcome::Solved(r) => self.plan = r.path.into(),
                SolveOutcome::BudgetExhausted { nodes_expanded, .. } => {
                    self.expected = None;
                    return Err(Error::BudgetExhausted { nodes_expanded });
                }
            }
        }
        let action = self.plan.pop_front().expect("unsolved state has a non-empty plan");
        let mut next = state.clone();
        next.apply_move(action);
        self.expected = Some(next);
        Ok(Some(action))
    }
}
