//! Learns a dictionary from data whose true elements live on rectangles of
//! an 8×8 grid, reports how rectangle-like each learned support is and
//! writes the elements as PGM images.
//!
//! Usage: `cargo run --example planted_recovery [output-dir]`

use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::io::render_dictionary;
use sspca::pipeline::{bounding_rect, rect_fill_ratio, support, NoiseLevel, PlantedSpec};
use sspca::solver::{fit, SolverConfig};
use sspca::Partition;

fn main() -> sspca::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "planted_out".into());
    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid.clone(), 5, 100)
        .noise(NoiseLevel::RelativeToSignal(0.05))
        .seed(3)
        .generate()?;

    let mut cfg = SolverConfig::new(5).lambda(3e-7).seed(3);
    cfg.restarts = 3;
    let result = fit(data.dataset.x.view(), &gs, &Partition::singletons(5), &cfg)?;
    println!(
        "{} iterations, objective {:.6e}, best restart {}",
        result.trace.iterations(),
        result.trace.final_objective(),
        result.best_restart
    );

    for (k, rect) in data.rects.iter().enumerate() {
        println!("planted element {k}: rows {}..{} cols {}..{}", rect.top, rect.top + rect.height, rect.left, rect.left + rect.width);
    }
    for (k, col) in result.model.v.columns().into_iter().enumerate() {
        let sup = support(col, 1e-3);
        let rect = bounding_rect(&sup, 8);
        println!(
            "learned element {k}: {} cells, fill ratio {:.2}, bounding box {:?}",
            sup.len(),
            rect_fill_ratio(&sup, 8),
            rect.map(|r| (r.top, r.left, r.height, r.width))
        );
    }

    std::fs::create_dir_all(&out_dir).map_err(|e| sspca::Error::InvalidInput(format!("{out_dir}: {e}")))?;
    let paths = render_dictionary(&result.model, &grid, format!("{out_dir}/element_"))?;
    println!("wrote {} images to {out_dir}/", paths.len());
    Ok(())
}
