mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use sspca::groups::{make_halfspace_groups, GridSpec, GroupStructure};

fn member_sets(gs: &GroupStructure) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = gs.groups().iter().map(|g| g.members().to_vec()).collect();
    sets.sort();
    sets
}

/// Intersection of the complements of every group that misses `target`.
fn zero_pattern_closure(gs: &GroupStructure, target: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut alive: BTreeSet<usize> = (0..gs.p()).collect();
    for g in gs.groups() {
        if g.members().iter().all(|j| !target.contains(j)) {
            for j in g.members() {
                alive.remove(j);
            }
        }
    }
    alive
}

#[test]
fn two_by_two_matches_the_cuttable_subsets() {
    let axis = make_halfspace_groups(&GridSpec::grid_2d(2, 2).unwrap()).unwrap();
    assert_eq!(member_sets(&axis), common::cuttable_subsets_2x2(false));
    assert_eq!(axis.len(), 4);

    let diag = make_halfspace_groups(&GridSpec::grid_2d(2, 2).unwrap().with_diagonals()).unwrap();
    assert_eq!(member_sets(&diag), common::cuttable_subsets_2x2(true));
    assert_eq!(diag.len(), 12);
}

#[test]
fn every_rectangle_is_a_zero_pattern_up_to_5x5() {
    for h in 1..=5 {
        for w in 1..=5 {
            let grid = GridSpec::grid_2d(h, w).unwrap();
            let gs = make_halfspace_groups(&grid).unwrap();
            for top in 0..h {
                for bottom in top..h {
                    for left in 0..w {
                        for right in left..w {
                            let rect: BTreeSet<usize> = (top..=bottom)
                                .flat_map(|r| (left..=right).map(move |c| r * w + c))
                                .collect();
                            assert_eq!(zero_pattern_closure(&gs, &rect), rect, "{h}x{w} rect {top}..{bottom} x {left}..{right}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn non_rectangles_close_to_their_bounding_box() {
    let grid = GridSpec::grid_2d(4, 4).unwrap();
    let gs = make_halfspace_groups(&grid).unwrap();
    let l_shape: BTreeSet<usize> = [0, 4, 8, 9, 10].into_iter().collect();
    let bbox: BTreeSet<usize> = [0, 1, 2, 4, 5, 6, 8, 9, 10].into_iter().collect();
    assert_eq!(zero_pattern_closure(&gs, &l_shape), bbox);
}

#[test]
fn axis_aligned_count_formula() {
    for h in 1..=7 {
        for w in 1..=7 {
            let gs = make_halfspace_groups(&GridSpec::grid_2d(h, w).unwrap()).unwrap();
            let expected = (2 * (h - 1) + 2 * (w - 1)).max(1);
            assert_eq!(gs.len(), expected, "{h}x{w}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn half_spaces_are_closed_under_complement(
        dims in prop::collection::vec(2usize..5, 1..=3),
        diagonals in any::<bool>(),
    ) {
        let grid = GridSpec::new(dims.clone(), vec![sspca::Orientation::AxisAligned]).unwrap();
        let grid = if diagonals && dims.len() > 1 { grid.with_diagonals() } else { grid };
        let gs = make_halfspace_groups(&grid).unwrap();
        let sets: BTreeSet<Vec<usize>> = gs.groups().iter().map(|g| g.members().to_vec()).collect();
        for s in &sets {
            prop_assert!(!s.is_empty() && s.len() < grid.p());
            let comp: Vec<usize> = (0..grid.p()).filter(|j| !s.contains(j)).collect();
            prop_assert!(sets.contains(&comp));
        }
    }

    #[test]
    fn membership_matches_the_defining_inequality(
        dims in prop::collection::vec(2usize..5, 1..=3),
        diagonals in any::<bool>(),
    ) {
        let grid = GridSpec::new(dims.clone(), vec![sspca::Orientation::AxisAligned]).unwrap();
        let grid = if diagonals && dims.len() > 1 { grid.with_diagonals() } else { grid };
        let gs = make_halfspace_groups(&grid).unwrap();
        for g in gs.groups() {
            let explained = grid.directions().iter().any(|u| {
                let proj = |j: usize| grid.coords(j).iter().zip(u).map(|(a, b)| a * b).sum::<i64>();
                let cut = g.members().iter().map(|&j| proj(j)).min().unwrap();
                (0..grid.p()).all(|j| (proj(j) >= cut) == g.contains(j))
            });
            prop_assert!(explained);
        }
    }

    #[test]
    fn group_text_round_trips(h in 1usize..6, w in 1usize..6, diagonals in any::<bool>()) {
        let grid = GridSpec::grid_2d(h, w).unwrap();
        let grid = if diagonals { grid.with_diagonals() } else { grid };
        let gs = make_halfspace_groups(&grid).unwrap();
        let back = GroupStructure::from_text(&gs.to_text(), Some(grid.p())).unwrap();
        prop_assert_eq!(back, gs);
    }
}
