//! Model selection by 5-fold cross-validation: fit a dictionary per
//! (λ, r), code every row on it and score k-NN on the codes. The raw-data
//! k-NN baseline is reported alongside.

use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::pipeline::{cross_validate, knn_baseline, CVGrid, FoldOptions, NoiseLevel, PartitionRule, PlantedSpec};
use sspca::solver::SolverConfig;

fn main() -> sspca::Result<()> {
    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid, 4, 120)
        .noise(NoiseLevel::RelativeToSignal(2.0))
        .one_element_per_row(true)
        .seed(2)
        .generate()?
        .dataset;

    let default_grid = CVGrid::default();
    println!("default grid: {} (λ, r, k) combinations", default_grid.combinations().len());

    let cv_grid = CVGrid {
        k_candidates: vec![1, 3, 5],
        log2_lambda: vec![-24.0, -22.0, -20.0],
        ranks: vec![4, 8],
    };
    let opts = FoldOptions::default();
    let report = cross_validate(&data, &gs, &cv_grid, &SolverConfig::new(1), PartitionRule::Singletons, opts)?;
    for s in &report.summaries {
        println!("log2 λ={:>5} r={} k={}: {:.3}", s.log2_lambda, s.rank, s.k, s.mean_accuracy);
    }
    println!(
        "best: log2 λ={} r={} k={} accuracy {:.3}",
        report.best.log2_lambda, report.best.rank, report.best.k, report.best.mean_accuracy
    );
    for (k, acc) in knn_baseline(&data, &cv_grid.k_candidates, opts)? {
        println!("raw k-NN, k={k}: {acc:.3}");
    }
    Ok(())
}
