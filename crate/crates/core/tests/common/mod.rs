//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ω^α by a direct double loop over explicit `(members, weights)` lists.
pub fn omega_direct(y: &[f64], groups: &[(Vec<usize>, Vec<f64>)], alpha: f64) -> f64 {
    let mut total = 0.0;
    for (members, weights) in groups {
        let mut sq = 0.0;
        for (j, w) in members.iter().zip(weights) {
            sq += (w * y[*j]).powi(2);
        }
        total += sq.sqrt().powf(alpha);
    }
    total.powf(1.0 / alpha)
}

/// `(Σ |y_j|^α)^{1/α}` without any rescaling.
pub fn lq_direct(y: &[f64], alpha: f64) -> f64 {
    y.iter().map(|v| v.abs().powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

/// Nonempty proper subsets of the 2×2 grid that some direction separates
/// strictly from their complement, found by enumerating all 14 subsets.
pub fn cuttable_subsets_2x2(diagonals: bool) -> Vec<Vec<usize>> {
    let cells: [(i64, i64); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut dirs: Vec<(i64, i64)> = vec![(1, 0), (-1, 0), (0, 1), (0, -1)];
    if diagonals {
        dirs.extend([(1, 1), (-1, -1), (1, -1), (-1, 1)]);
    }
    let mut out = Vec::new();
    for mask in 1u32..15 {
        let inside: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let outside: Vec<usize> = (0..4).filter(|i| mask & (1 << i) == 0).collect();
        let separable = dirs.iter().any(|&(a, b)| {
            let proj = |i: usize| a * cells[i].0 + b * cells[i].1;
            let lo_in = inside.iter().map(|&i| proj(i)).min().unwrap();
            let hi_out = outside.iter().map(|&i| proj(i)).max().unwrap();
            lo_in > hi_out
        });
        if separable {
            out.push(inside);
        }
    }
    out.sort();
    out
}

/// Leading singular triple of `x` by power iteration on `xᵀx`, returned as
/// the rank-one reconstruction.
pub fn rank_one_svd(x: ArrayView2<f64>) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut v: Array1<f64> = (0..x.ncols()).map(|_| rng.random_range(0.5..1.5)).collect();
    for _ in 0..20_000 {
        let next = x.t().dot(&x.dot(&v));
        let norm = next.dot(&next).sqrt();
        let done = (&next / norm - &v).iter().all(|d| d.abs() < 1e-15);
        v = next / norm;
        if done {
            break;
        }
    }
    let u = x.dot(&v);
    Array2::from_shape_fn(x.dim(), |(i, j)| u[i] * v[j])
}

pub fn frob2(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub fn l2(a: ArrayView1<f64>) -> f64 {
    a.dot(&a).sqrt()
}

/// One outer iteration for singleton groups, unit weights, α = 1 and no
/// smoothing: η_j = |V_jk|, so ζ = |V|, then U sweeps with ℓ2-ball projection
/// and V sweeps of the closed-form coordinate update.
pub fn l1_reference_step(
    x: ArrayView2<f64>,
    u: &mut Array2<f64>,
    v: &mut Array2<f64>,
    lambda: f64,
    sweeps: usize,
) {
    let (n, p) = x.dim();
    let r = u.ncols();
    let zeta = v.mapv(f64::abs);
    for _ in 0..sweeps {
        for k in 0..r {
            let vk = v.column(k).to_owned();
            let vv = vk.dot(&vk);
            if vv == 0.0 {
                continue;
            }
            let resid = &x - &u.dot(&v.t());
            let step = resid.dot(&vk) / vv;
            let mut col = &u.column(k) + &step;
            let norm = l2(col.view());
            if norm > 1.0 {
                col /= norm;
            }
            u.column_mut(k).assign(&col);
        }
    }
    for _ in 0..sweeps {
        for k in 0..r {
            let uk = u.column(k).to_owned();
            let uu = uk.dot(&uk);
            let resid = &x - &u.dot(&v.t());
            let rhs = resid.t().dot(&uk) + &(&v.column(k) * uu);
            for j in 0..p {
                let denom = uu * zeta[[j, k]] + (n * p) as f64 * lambda;
                v[[j, k]] = if denom == 0.0 { 0.0 } else { zeta[[j, k]] * rhs[j] / denom };
            }
        }
    }
}
