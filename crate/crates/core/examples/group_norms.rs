//! Half-space groups on a small image grid and the structured quasi-norm
//! they induce.
//!
//! A rectangle is the intersection of half-planes, so it is the complement of
//! a union of half-space groups. Its Ω^α value ends up far below that of a
//! scattered set with the same ℓ2 mass.

use ndarray::Array1;
use sspca::groups::{make_halfspace_groups, GridSpec, GroupStructure};
use sspca::regularizer::omega_alpha;

fn main() -> sspca::Result<()> {
    let grid = GridSpec::grid_2d(6, 6)?;
    let gs = make_halfspace_groups(&grid)?;
    println!("6x6 axis-aligned half-spaces: {} groups", gs.len());
    let diag = make_halfspace_groups(&GridSpec::grid_2d(6, 6)?.with_diagonals())?;
    println!("with diagonal directions:      {} groups", diag.len());

    let mut rect = Array1::<f64>::zeros(grid.p());
    for r in 1..4 {
        for c in 2..5 {
            rect[grid.index(&[r, c])] = 1.0;
        }
    }
    let mut scattered = Array1::<f64>::zeros(grid.p());
    for &j in &[0, 7, 14, 17, 20, 23, 28, 31, 35] {
        scattered[j] = 1.0;
    }

    for alpha in [0.5, 1.0, 1.5] {
        println!(
            "alpha={alpha}: rectangle {:>9.3}  scattered {:>9.3}",
            omega_alpha(rect.view(), &gs, alpha)?,
            omega_alpha(scattered.view(), &gs, alpha)?
        );
    }

    let text = gs.to_text();
    let back = GroupStructure::from_text(&text, Some(grid.p()))?;
    assert_eq!(back, gs);
    println!("group file round trip: {} lines", text.lines().count());
    Ok(())
}
