//! Elements grouped into classes share one support pattern: the group norms
//! are pooled across a class, so a class switches whole half-spaces off
//! together.

use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::pipeline::{class_supports, NoiseLevel, PlantedSpec};
use sspca::regularizer::{omega_alpha, shared_omega_alpha};
use sspca::solver::{fit, SolverConfig};
use sspca::Partition;

fn main() -> sspca::Result<()> {
    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid, 6, 100)
        .noise(NoiseLevel::RelativeToSignal(0.05))
        .shared_class_size(3)
        .seed(1)
        .generate()?;
    let part = Partition::contiguous(6, 3)?;
    println!("partition: {part}");

    let mut cfg = SolverConfig::new(6).lambda(3e-7).seed(1);
    cfg.stop_tol = 1e-6;
    cfg.max_iter = 2000;
    let result = fit(data.dataset.x.view(), &gs, &part, &cfg)?;
    println!("{} iterations", result.trace.iterations());

    let supports = class_supports(result.model.v.view(), &part, 1e-4)?;
    for class in part.classes() {
        let sizes: Vec<usize> = class.iter().map(|&k| supports[k].len()).collect();
        let same = class.iter().all(|&k| supports[k] == supports[class[0]]);
        println!("class {:?}: support sizes {sizes:?}, identical: {same}", class.iter().map(|k| k + 1).collect::<Vec<_>>());
    }

    let v = result.model.v.view();
    let shared = shared_omega_alpha(v, &gs, &Partition::singletons(6), 0.5)?;
    let separate: f64 = v.columns().into_iter().map(|c| omega_alpha(c, &gs, 0.5)).sum::<sspca::Result<f64>>()?;
    println!("singleton partition: shared penalty {shared:.12e}, sum of element penalties {separate:.12e}");
    Ok(())
}
