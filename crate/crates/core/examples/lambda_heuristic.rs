//! Picks λ without labels by maximizing the coverage score: the fraction of
//! variables covered by some element divided by the total support size.
//! Dictionaries whose elements tile the grid without overlap score 1.

use ndarray::Array2;
use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::pipeline::{lambda_coverage_score, select_lambda_by_coverage, NoiseLevel, PlantedSpec};
use sspca::solver::SolverConfig;
use sspca::Partition;

fn main() -> sspca::Result<()> {
    let mut tiles = Array2::<f64>::zeros((6, 3));
    for k in 0..3 {
        tiles[[2 * k, k]] = 1.0;
        tiles[[2 * k + 1, k]] = 1.0;
    }
    let copies = Array2::<f64>::ones((6, 3));
    println!("disjoint tiling: {}", lambda_coverage_score(tiles.view(), 1e-3));
    println!("three identical full supports: {}", lambda_coverage_score(copies.view(), 1e-3));

    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid, 3, 90)
        .noise(NoiseLevel::RelativeToSignal(0.05))
        .seed(4)
        .generate()?;
    let candidates: Vec<f64> = (-26..=-18).step_by(2).map(f64::from).collect();
    let (best, scores) = select_lambda_by_coverage(
        data.dataset.x.view(),
        &gs,
        &Partition::singletons(3),
        &SolverConfig::new(3).seed(4),
        &candidates,
        1e-3,
    )?;
    for (l, s) in scores {
        println!("log2 λ = {l:>5}: coverage {s:.3}");
    }
    println!("selected log2 λ = {best}");
    Ok(())
}
