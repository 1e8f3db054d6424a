//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sspca::groups::{make_halfspace_groups, make_singletons, GridSpec, GroupStructure};
use sspca::io::{format_model, save_model, ModelHeader};
use sspca::pipeline::{
    class_supports, cross_validate, knn_baseline, lambda_coverage_score, rect_fill_ratio, support, CVGrid,
    FoldOptions, NoiseLevel, PartitionRule, PlantedSpec,
};
use sspca::regularizer::{eta_minimizer, eta_objective, omega_alpha, shared_omega_alpha};
use sspca::solver::{fit, fit_with_observer, StopReason};
use sspca::{FitResult, Partition, SolverConfig};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn eta_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_match = 0.0f64;
    let mut worst_beat = f64::NEG_INFINITY;
    for alpha in [0.5, 1.0, 1.5] {
        for _ in 0..200 {
            let p = rng.random_range(1..=5);
            let y: Array1<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let z = eta_minimizer(y.view(), alpha).unwrap();
            let closed = eta_objective(y.view(), z.view(), alpha);
            let norm = common::lq_direct(y.as_slice().unwrap(), alpha);
            worst_match = worst_match.max((closed - norm).abs());
            let mut cand = Array1::<f64>::zeros(p);
            for c in 0..10_000 {
                for j in 0..p {
                    cand[j] = if c % 2 == 0 {
                        z[j] * (rng.random_range(-1.0f64..1.0)).exp2()
                    } else {
                        10f64.powf(rng.random_range(-3.0..2.0))
                    };
                }
                worst_beat = worst_beat.max(closed - eta_objective(y.view(), cand.view(), alpha));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_match <= 1e-8 && worst_beat <= 1e-9 && secs < 5.0,
        format!("max |closed - ‖y‖_α| = {worst_match:.2e}, max improvement by a candidate = {worst_beat:.2e}, {secs:.2}s"),
    )
}

fn l1_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = rng.random_range(1..=40);
        let y: Array1<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gs = make_singletons(p).unwrap();
        let omega = omega_alpha(y.view(), &gs, 1.0).unwrap();
        let l1: f64 = y.iter().map(|v| v.abs()).sum();
        worst = worst.max((omega - l1).abs());
    }
    outcome(worst <= 1e-12, format!("max |Ω - ℓ1| = {worst:.2e} over 1000 vectors"))
}

fn rank_one() -> Outcome {
    let start = Instant::now();
    let gs = make_singletons(15).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let x = Array2::from_shape_fn((20, 15), |_| rng.random_range(-1.0..1.0));
        let oracle = common::frob2((&x - &common::rank_one_svd(x.view())).view());
        let cfg = SolverConfig::new(1).lambda(0.0).seed(seed);
        let res = fit(x.view(), &gs, &Partition::singletons(1), &cfg).unwrap();
        let err = common::frob2((&x - &res.model.reconstruction()).view());
        worst = worst.max((err - oracle) / oracle);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 0.01 && secs < 10.0, format!("worst relative gap to SVD {worst:.2e}, {secs:.2}s"))
}

fn trace_descends(res: &FitResult) -> Option<String> {
    for w in res.trace.rows.windows(2) {
        let (a, b) = (w[0].objective, w[1].objective);
        if b > a + 1e-6 * (1.0 + a.abs()) {
            return Some(format!("rise {a} -> {b} at iteration {}", w[1].iteration));
        }
    }
    if res.trace.stop != StopReason::Converged || res.trace.iterations() > 500 {
        return Some(format!("no convergence within {} iterations", res.trace.iterations()));
    }
    None
}

fn descent_problems(nonneg: bool) -> (usize, Vec<String>, bool) {
    let gs = make_halfspace_groups(&GridSpec::grid_2d(8, 8).unwrap()).unwrap();
    let mut failures = Vec::new();
    let mut max_iter = 0;
    let mut negative_seen = false;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let x = Array2::from_shape_fn((30, 64), |_| {
            let v: f64 = rng.random_range(-1.0..1.0);
            if nonneg { v.abs() } else { v }
        });
        let cfg = SolverConfig::new(5).lambda(1e-6).alpha(0.5).seed(seed).nonneg(nonneg);
        let res = fit_with_observer(x.view(), &gs, &Partition::singletons(5), &cfg, |view| {
            if view.model.u.iter().chain(view.model.v.iter()).any(|&e| e < 0.0) {
                negative_seen = true;
            }
        })
        .unwrap();
        max_iter = max_iter.max(res.trace.iterations());
        if let Some(msg) = trace_descends(&res) {
            failures.push(format!("problem {seed}: {msg}"));
        }
    }
    (max_iter, failures, negative_seen)
}

fn descent() -> Outcome {
    let (max_iter, failures, _) = descent_problems(false);
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("10 problems non-increasing and converged, at most {max_iter} iterations")
        } else {
            failures.join("; ")
        },
    )
}

fn structured_recovery() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::grid_2d(8, 8).unwrap();
    let gs = make_halfspace_groups(&grid).unwrap();
    let mut good_seeds = 0;
    let mut per_seed = Vec::new();
    for seed in 0..5u64 {
        let data = PlantedSpec::new(grid.clone(), 5, 100)
            .noise(NoiseLevel::RelativeToSignal(0.05))
            .seed(seed)
            .generate()
            .unwrap();
        let mut cfg = SolverConfig::new(5).lambda(3e-7).alpha(0.5).seed(seed);
        cfg.restarts = 3;
        let res = fit(data.dataset.x.view(), &gs, &Partition::singletons(5), &cfg).unwrap();
        let good = res
            .model
            .v
            .columns()
            .into_iter()
            .filter(|c| {
                let s = support(*c, 1e-3);
                !s.is_empty() && rect_fill_ratio(&s, 8) >= 0.9
            })
            .count();
        per_seed.push(format!("{good}/5"));
        if good * 5 >= 4 * 5 {
            good_seeds += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        good_seeds >= 4 && secs < 60.0,
        format!("rectangle-like elements per seed {}, {good_seeds}/5 seeds pass, {secs:.2}s", per_seed.join(" ")),
    )
}

fn shared_structure() -> Outcome {
    let grid = GridSpec::grid_2d(8, 8).unwrap();
    let gs = make_halfspace_groups(&grid).unwrap();
    let part = Partition::contiguous(6, 3).unwrap();
    let mut mismatched = Vec::new();
    let mut worst_sum_gap = 0.0f64;
    for seed in 0..5u64 {
        let data = PlantedSpec::new(grid.clone(), 6, 100)
            .noise(NoiseLevel::RelativeToSignal(0.05))
            .shared_class_size(3)
            .seed(seed)
            .generate()
            .unwrap();
        let mut cfg = SolverConfig::new(6).lambda(3e-7).alpha(0.5).seed(seed);
        cfg.stop_tol = 1e-6;
        cfg.max_iter = 2000;
        let res = fit(data.dataset.x.view(), &gs, &part, &cfg).unwrap();
        let sups = class_supports(res.model.v.view(), &part, 1e-4).unwrap();
        for class in part.classes() {
            if class.iter().any(|&k| sups[k] != sups[class[0]]) {
                mismatched.push(format!("seed {seed} class {}", class[0] / 3 + 1));
            }
        }

        let single = fit(data.dataset.x.view(), &gs, &Partition::singletons(6), &cfg).unwrap();
        let v = single.model.v.view();
        let shared = shared_omega_alpha(v, &gs, &Partition::singletons(6), 0.5).unwrap();
        let sum: f64 = v.columns().into_iter().map(|c| omega_alpha(c, &gs, 0.5).unwrap()).sum();
        worst_sum_gap = worst_sum_gap.max((shared - sum).abs() / sum.max(1.0));
    }
    outcome(
        mismatched.is_empty() && worst_sum_gap <= 1e-12,
        format!(
            "within-class support mismatches: {}; singleton shared vs summed penalty gap {worst_sum_gap:.2e}",
            if mismatched.is_empty() { "none".to_string() } else { mismatched.join(", ") }
        ),
    )
}

fn nmf_mode() -> Outcome {
    let (max_iter, failures, negative_seen) = descent_problems(true);
    outcome(
        failures.is_empty() && !negative_seen,
        format!(
            "negative entries observed: {negative_seen}; descent failures: {}; at most {max_iter} iterations",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

fn protocol_fidelity() -> Outcome {
    let grid = CVGrid::default();
    let combos: BTreeSet<(i64, usize, usize)> =
        grid.combinations().into_iter().map(|(l, r, k)| (l as i64, r, k)).collect();
    let mut expected = BTreeSet::new();
    for l in (4..=18).step_by(2) {
        for r in (10..=70).step_by(10) {
            for k in [1, 3, 5] {
                expected.insert((l, r, k));
            }
        }
    }
    let grid_ok = combos == expected && grid.combinations().len() == 168;

    let img = GridSpec::grid_2d(6, 6).unwrap();
    let data = PlantedSpec::new(img.clone(), 3, 60)
        .noise(NoiseLevel::RelativeToSignal(0.3))
        .one_element_per_row(true)
        .seed(8)
        .generate()
        .unwrap()
        .dataset;
    let gs = make_halfspace_groups(&img).unwrap();
    let mut template = SolverConfig::new(1);
    template.max_iter = 50;
    let report = cross_validate(&data, &gs, &grid, &template, PartitionRule::Singletons, FoldOptions::default()).unwrap();
    let evaluated: BTreeSet<(i64, usize, usize)> =
        report.summaries.iter().map(|s| (s.log2_lambda as i64, s.rank, s.k)).collect();
    let cv_ok = evaluated == expected && report.scores.len() == 168 * 5;

    let baseline = knn_baseline(&data, &[1, 3, 5], FoldOptions::default()).unwrap();
    let baseline_ok = baseline.len() == 3 && baseline.iter().all(|(_, a)| (0.0..=1.0).contains(a));
    let base_text: Vec<String> = baseline.iter().map(|(k, a)| format!("k={k}: {a:.3}")).collect();
    outcome(
        grid_ok && cv_ok && baseline_ok,
        format!(
            "default grid {} combinations, cross-validation scored {} grid points, raw k-NN baseline {}",
            grid.combinations().len(),
            evaluated.len(),
            base_text.join(", ")
        ),
    )
}

fn coverage_heuristic() -> Outcome {
    let mut disjoint = Array2::<f64>::zeros((9, 3));
    for j in 0..9 {
        disjoint[[j, j / 3]] = 1.0 + j as f64;
    }
    let identical = Array2::<f64>::from_elem((9, 3), 0.7);
    let a = lambda_coverage_score(disjoint.view(), 1e-3);
    let b = lambda_coverage_score(identical.view(), 1e-3);
    outcome(a == 1.0 && b == 1.0 / 3.0, format!("disjoint tiling {a}, three identical supports {b}"))
}

fn determinism() -> Outcome {
    let grid = GridSpec::grid_2d(8, 8).unwrap();
    let gs: GroupStructure = make_halfspace_groups(&grid).unwrap();
    let data = PlantedSpec::new(grid, 4, 50)
        .noise(NoiseLevel::RelativeToSignal(0.05))
        .seed(21)
        .generate()
        .unwrap();
    let part = Partition::contiguous(4, 2).unwrap();
    let mut cfg = SolverConfig::new(4).lambda(3e-7).seed(77);
    cfg.restarts = 2;
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    let mut files = Vec::new();
    for run in 0..2 {
        let res = fit(data.dataset.x.view(), &gs, &part, &cfg).unwrap();
        traces.push(res.trace.to_csv(false));
        let path = dir.path().join(format!("model{run}.txt"));
        save_model(&res.model, &ModelHeader::from(&cfg), &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
        assert!(format_model(&res.model, &ModelHeader::from(&cfg)).as_bytes() == files[run].as_slice());
    }
    outcome(
        traces[0] == traces[1] && files[0] == files[1],
        format!("trace {} bytes, model {} bytes, identical across runs", traces[0].len(), files[0].len()),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("η identity oracle", eta_identity),
        ("ℓ1 reduction", l1_reduction),
        ("rank-one equivalence with SVD", rank_one),
        ("objective descent", descent),
        ("structured recovery on planted rectangles", structured_recovery),
        ("shared structure", shared_structure),
        ("nonnegative mode", nmf_mode),
        ("cross-validation protocol and raw k-NN baseline", protocol_fidelity),
        ("λ coverage heuristic", coverage_heuristic),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {}", if result.pass { "PASS" } else { "FAIL" }, i + 1, result.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
