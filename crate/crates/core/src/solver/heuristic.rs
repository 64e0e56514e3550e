use crate::env::{goal_index, PuzzleState};

/// Sum of Manhattan distances of the non-blank tiles to their goal cells.
///
/// Admissible and consistent: every move shifts one tile by one cell. This
/// is not the reward distance, which also counts the blank.
pub fn manhattan_heuristic(state: &PuzzleState) -> u32 {
    let dims = state.dims();
    let cells = dims.cells();
    state
        .tiles()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != 0)
        .map(|(cell, &t)| {
            let (r, c) = dims.row_col(cell);
            let (gr, gc) = dims.row_col(goal_index(t as usize, cells));
            (r.abs_diff(gr) + c.abs_diff(gc)) as u32
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Action, GridDims};

    #[test]
    fn solved_and_one_move() {
        let dims = GridDims::new(3, 3).unwrap();
        let solved = PuzzleState::solved(dims);
        assert_eq!(manhattan_heuristic(&solved), 0);
        for a in solved.valid_actions().iter() {
            let mut s = solved.clone();
            s.apply_move(a);
            assert_eq!(manhattan_heuristic(&s), 1, "{a}");
        }
        let mut s = solved;
        s.apply_move(Action::Down);
        s.apply_move(Action::Right);
        assert_eq!(manhattan_heuristic(&s), 2);
    }
}
