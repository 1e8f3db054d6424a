//! Nonnegative mode: U and V are clamped to the nonnegative orthant after
//! every block update, giving a structured NMF. An observer checks signs at
//! every outer iteration.

use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::pipeline::{rect_fill_ratio, support, NoiseLevel, PlantedSpec};
use sspca::solver::{fit_with_observer, SolverConfig};
use sspca::Partition;

fn main() -> sspca::Result<()> {
    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid, 4, 80)
        .noise(NoiseLevel::RelativeToSignal(0.02))
        .nonneg(true)
        .seed(5)
        .generate()?;
    let x = data.dataset.x.mapv(|v| v.max(0.0));

    let cfg = SolverConfig::new(4).lambda(3e-7).nonneg(true).seed(5);
    let mut negatives = 0usize;
    let mut logged = 0usize;
    let result = fit_with_observer(x.view(), &gs, &Partition::singletons(4), &cfg, |view| {
        logged += 1;
        negatives += view.model.u.iter().chain(view.model.v.iter()).filter(|&&e| e < 0.0).count();
    })?;

    println!("{logged} iterations logged, negative entries seen: {negatives}");
    for row in result.trace.rows.iter().take(5) {
        println!("iter {:>3}: objective {:.6e}", row.iteration, row.objective);
    }
    for (k, col) in result.model.v.columns().into_iter().enumerate() {
        let sup = support(col, 1e-3);
        println!("element {k}: {} cells, fill ratio {:.2}", sup.len(), rect_fill_ratio(&sup, 8));
    }
    Ok(())
}
