//! The variational identity behind the reweighted updates:
//! `min_{z>0} ½ Σ y_j²/z_j + ½ ‖z‖_β = ‖y‖_α` with `β = α/(2−α)`,
//! attained in closed form. Random positive `z` never beat it.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sspca::regularizer::{eta_minimizer, eta_objective, lq_norm};

fn main() -> sspca::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for alpha in [0.5, 1.0, 1.5] {
        let y: Array1<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let z = eta_minimizer(y.view(), alpha)?;
        let closed = eta_objective(y.view(), z.view(), alpha);

        let mut best_random = f64::INFINITY;
        for _ in 0..20_000 {
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            let cand: Array1<f64> = (0..4).map(|_| scale * rng.random_range(1e-6..1.0)).collect();
            best_random = best_random.min(eta_objective(y.view(), cand.view(), alpha));
        }
        println!(
            "alpha={alpha}: ‖y‖_α = {:.10}  closed form = {:.10}  best of 20000 random = {:.10}",
            lq_norm(y.iter(), alpha),
            closed,
            best_random
        );
    }
    Ok(())
}
