//! With λ = 0, r = 1 and an ℓ2 ball on the coefficients, the factorization
//! is the best rank-one approximation, so its error matches the leading
//! singular pair found by power iteration.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sspca::groups::make_singletons;
use sspca::solver::{fit, reconstruction_loss, SolverConfig};
use sspca::Partition;

fn leading_pair(x: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let mut v = Array1::from_elem(x.ncols(), 1.0);
    for _ in 0..10_000 {
        let next = x.t().dot(&x.dot(&v));
        v = &next / next.dot(&next).sqrt();
    }
    let u = x.dot(&v);
    (u, v)
}

fn main() -> sspca::Result<()> {
    let gs = make_singletons(15)?;
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = Array2::from_shape_fn((20, 15), |_| rng.random_range(-1.0..1.0));
        let (u, v) = leading_pair(&x);
        let svd_loss = reconstruction_loss(x.view(), u.view().insert_axis(ndarray::Axis(1)), v.view().insert_axis(ndarray::Axis(1)));

        let mut cfg = SolverConfig::new(1).seed(seed);
        cfg.stop_tol = 1e-10;
        cfg.max_iter = 5000;
        let result = fit(x.view(), &gs, &Partition::singletons(1), &cfg)?;
        let m = &result.model;
        let loss = reconstruction_loss(x.view(), m.u.view(), m.v.view());
        println!("seed {seed}: fitted {loss:.10}  power iteration {svd_loss:.10}  relative gap {:.2e}", (loss - svd_loss) / svd_loss);
    }
    Ok(())
}
