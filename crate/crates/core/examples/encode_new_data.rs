//! Fits a dictionary on part of the data, then codes held-out rows against
//! the frozen dictionary and compares reconstruction errors.

use ndarray::s;
use sspca::groups::{make_halfspace_groups, GridSpec};
use sspca::pipeline::{NoiseLevel, PlantedSpec};
use sspca::solver::{encode, fit, reconstruction_loss, SolverConfig};
use sspca::Partition;

fn main() -> sspca::Result<()> {
    let grid = GridSpec::grid_2d(8, 8)?;
    let gs = make_halfspace_groups(&grid)?;
    let data = PlantedSpec::new(grid, 5, 150)
        .noise(NoiseLevel::RelativeToSignal(0.05))
        .seed(11)
        .generate()?;
    let train = data.dataset.x.slice(s![..100, ..]);
    let held_out = data.dataset.x.slice(s![100.., ..]);

    let cfg = SolverConfig::new(5).lambda(3e-7).seed(11);
    let model = fit(train, &gs, &Partition::singletons(5), &cfg)?.model;

    let mut enc_cfg = cfg.clone();
    enc_cfg.stop_tol = 1e-8;
    enc_cfg.max_iter = 5000;
    let u_train = encode(train, model.v.view(), &enc_cfg)?;
    let u_new = encode(held_out, model.v.view(), &enc_cfg)?;

    println!("training loss, fitted U:  {:.6e}", reconstruction_loss(train, model.u.view(), model.v.view()));
    println!("training loss, re-encoded: {:.6e}", reconstruction_loss(train, u_train.view(), model.v.view()));
    println!("held-out loss, encoded:    {:.6e}", reconstruction_loss(held_out, u_new.view(), model.v.view()));
    let zero = ndarray::Array2::<f64>::zeros(u_new.dim());
    println!("held-out loss, zero code:  {:.6e}", reconstruction_loss(held_out, zero.view(), model.v.view()));
    Ok(())
}
