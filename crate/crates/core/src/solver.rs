//! Alternating minimization of the structured dictionary-learning objective.
//!
//! Each outer iteration refreshes the auxiliary η (closed form), then runs
//! `T_u` block coordinate sweeps over the columns of `U` (gradient step plus
//! projection onto the unit ball of `Ω_u`) and `T_v` sweeps over the columns
//! of `V` (diagonal ridge update through `ζ`). Iteration stops when the
//! relative decrease of the true objective drops below `stop_tol`.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::regularizer::{self, EtaState, Partition, RegularizerParams, Smoothing};

/// Constraint norm on the columns of `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoeffNorm {
    #[default]
    L2,
    L1,
}

impl CoeffNorm {
    pub fn norm(self, u: ArrayView1<f64>) -> f64 {
        match self {
            CoeffNorm::L2 => u.dot(&u).sqrt(),
            CoeffNorm::L1 => u.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoeffNorm::L2 => "l2",
            CoeffNorm::L1 => "l1",
        }
    }
}

impl FromStr for CoeffNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(CoeffNorm::L2),
            "l1" => Ok(CoeffNorm::L1),
            other => Err(Error::InvalidParameter(format!("unknown coefficient norm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Dictionary size r.
    pub rank: usize,
    /// Regularization weight λ ≥ 0.
    pub lambda: f64,
    /// Quasi-norm exponent α ∈ (0, 2).
    pub alpha: f64,
    pub smoothing: Smoothing,
    /// BCD sweeps over U per outer iteration (T_u).
    pub sweeps_u: usize,
    /// BCD sweeps over V per outer iteration (T_v).
    pub sweeps_v: usize,
    /// Relative objective decrease below which iteration stops.
    pub stop_tol: f64,
    pub max_iter: usize,
    /// Clamp U and V to the nonnegative orthant.
    pub nonneg: bool,
    pub coeff_norm: CoeffNorm,
    pub seed: u64,
    /// Independent random initializations; the lowest final objective wins.
    pub restarts: usize,
}

impl SolverConfig {
    pub fn new(rank: usize) -> Self {
        SolverConfig {
            rank,
            lambda: 0.0,
            alpha: 0.5,
            smoothing: Smoothing::default(),
            sweeps_u: 3,
            sweeps_v: 3,
            stop_tol: 1e-3,
            max_iter: 500,
            nonneg: false,
            coeff_norm: CoeffNorm::L2,
            seed: 0,
            restarts: 1,
        }
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn nonneg(mut self, nonneg: bool) -> Self {
        self.nonneg = nonneg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.rank == 0 {
            return bad("rank must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be a finite value >= 0, got {}", self.lambda));
        }
        if self.sweeps_u == 0 || self.sweeps_v == 0 {
            return bad("inner sweep counts must be at least 1".into());
        }
        if self.stop_tol.is_nan() || self.stop_tol <= 0.0 {
            return bad(format!("stop_tol must be positive, got {}", self.stop_tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        self.regularizer_params().map(|_| ())
    }

    pub fn regularizer_params(&self) -> Result<RegularizerParams> {
        RegularizerParams::new(self.alpha)?.with_smoothing(self.smoothing)
    }
}

/// Coefficients `U` (n×r), dictionary `V` (p×r) and the element partition.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub partition: Partition,
}

impl FactorModel {
    pub fn new(u: Array2<f64>, v: Array2<f64>, partition: Partition) -> Result<Self> {
        if u.ncols() != v.ncols() || u.ncols() != partition.r() {
            return Err(Error::DimensionMismatch(format!(
                "U has {} columns, V has {}, partition covers {}",
                u.ncols(),
                v.ncols(),
                partition.r()
            )));
        }
        Ok(FactorModel { u, v, partition })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.v.nrows()
    }

    pub fn r(&self) -> usize {
        self.v.ncols()
    }

    /// `U Vᵀ`.
    pub fn reconstruction(&self) -> Array2<f64> {
        self.u.dot(&self.v.t())
    }
}

/// Objective value split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub total: f64,
    /// `1/(2np) ‖X − UVᵀ‖²_F`.
    pub loss: f64,
    /// Unweighted penalty (the caller's λ multiplies it into `total`).
    pub penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub loss: f64,
    pub penalty: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
}

/// Per-iteration objective history. Row 0 is the initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
}

impl Trace {
    pub fn final_objective(&self) -> f64 {
        self.rows.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    /// Number of outer iterations run (excluding the initialization row).
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// CSV with header `iteration,objective,loss,penalty,elapsed_seconds`.
    /// Without timing the last column is written as 0 so that traces of
    /// identical runs compare byte for byte.
    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut out = String::from("iteration,objective,loss,penalty,elapsed_seconds\n");
        for row in &self.rows {
            let elapsed = if include_timing { row.elapsed_secs } else { 0.0 };
            writeln!(
                out,
                "{},{},{},{},{}",
                row.iteration, row.objective, row.loss, row.penalty, elapsed
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FactorModel,
    pub trace: Trace,
    /// η state used by the last V update.
    pub etas: EtaState,
    /// Index of the winning restart.
    pub best_restart: usize,
    /// Final objective of every restart.
    pub restart_objectives: Vec<f64>,
}

fn check_data(x: ArrayView2<f64>) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidInput("data matrix is empty".into()));
    }
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite value {v} at row {}, column {}",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

fn check_model(x: ArrayView2<f64>, model: &FactorModel) -> Result<()> {
    let (n, p) = x.dim();
    if model.n() != n || model.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "data is {n}x{p}, model has U {}x{} and V {}x{}",
            model.n(),
            model.r(),
            model.p(),
            model.r()
        )));
    }
    Ok(())
}

/// `1/(2np) ‖X − UVᵀ‖²_F`.
pub fn reconstruction_loss(x: ArrayView2<f64>, u: ArrayView2<f64>, v: ArrayView2<f64>) -> f64 {
    let (n, p) = x.dim();
    let resid = &x - &u.dot(&v.t());
    resid.iter().map(|e| e * e).sum::<f64>() / (2.0 * n as f64 * p as f64)
}

/// `1/(2np) ‖X − UVᵀ‖²_F + λ Σ_M Ω^α(V^M)`.
pub fn objective(
    x: ArrayView2<f64>,
    model: &FactorModel,
    gs: &GroupStructure,
    cfg: &SolverConfig,
) -> Result<Objective> {
    check_model(x, model)?;
    let loss = reconstruction_loss(x, model.u.view(), model.v.view());
    let penalty = regularizer::shared_omega_alpha(model.v.view(), gs, &model.partition, cfg.alpha)?;
    Ok(Objective {
        total: loss + cfg.lambda * penalty,
        loss,
        penalty,
    })
}

/// Loss plus `λ/2` times the variational penalty at fixed η.
pub fn variational_objective(
    x: ArrayView2<f64>,
    model: &FactorModel,
    etas: &EtaState,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_model(x, model)?;
    let params = cfg.regularizer_params()?;
    let loss = reconstruction_loss(x, model.u.view(), model.v.view());
    let pen = regularizer::variational_penalty(model.v.view(), etas, &model.partition, &params)?;
    Ok(loss + 0.5 * cfg.lambda * pen)
}

/// Euclidean projection onto `{u : Ω_u(u) ≤ 1}`.
pub fn project_coeff_ball(w: ArrayView1<f64>, norm: CoeffNorm) -> Array1<f64> {
    match norm {
        CoeffNorm::L2 => {
            let n = w.dot(&w).sqrt();
            if n > 1.0 {
                w.mapv(|x| x / n)
            } else {
                w.to_owned()
            }
        }
        CoeffNorm::L1 => project_l1_ball(w),
    }
}

// Sort-based simplex projection applied to |w|, signs restored.
fn project_l1_ball(w: ArrayView1<f64>) -> Array1<f64> {
    let l1: f64 = w.iter().map(|x| x.abs()).sum();
    if l1 <= 1.0 {
        return w.to_owned();
    }
    let mut mags: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    w.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

pub(crate) fn sweep_u(
    x: ArrayView2<f64>,
    u: &mut Array2<f64>,
    v: ArrayView2<f64>,
    cfg: &SolverConfig,
) {
    let xv = x.dot(&v);
    let vtv = v.t().dot(&v);
    let r = v.ncols();
    let mut skipped = false;
    for _ in 0..cfg.sweeps_u {
        for k in 0..r {
            let norm2 = vtv[[k, k]];
            if norm2 == 0.0 {
                skipped = true;
                continue;
            }
            let uvk = u.dot(&vtv.column(k));
            let mut w = u.column(k).to_owned();
            Zip::from(&mut w)
                .and(xv.column(k))
                .and(&uvk)
                .for_each(|w, &a, &b| *w += (a - b) / norm2);
            if cfg.nonneg {
                w.mapv_inplace(|x| x.max(0.0));
            }
            u.column_mut(k).assign(&project_coeff_ball(w.view(), cfg.coeff_norm));
        }
    }
    if skipped {
        debug!("U update skipped dictionary elements with zero norm");
    }
}

/// `T_u` sweeps of `U^k ← Π(U^k + ‖V^k‖⁻² (X V^k − U Vᵀ V^k))`, ascending k.
/// Columns whose dictionary element is zero are left untouched.
pub fn update_u(x: ArrayView2<f64>, model: &mut FactorModel, cfg: &SolverConfig) -> Result<()> {
    check_model(x, model)?;
    sweep_u(x, &mut model.u, model.v.view(), cfg);
    Ok(())
}

/// `T_v` sweeps of
/// `V^k ← Diag(ζ^k) Diag(‖U^k‖² ζ^k + npλ)⁻¹ (Xᵀ U^k − V Uᵀ U^k + ‖U^k‖² V^k)`.
///
/// With `‖U^k‖ = 0` and `λ = 0` the column is set to zero.
pub fn update_v(
    x: ArrayView2<f64>,
    model: &mut FactorModel,
    etas: &EtaState,
    cfg: &SolverConfig,
) -> Result<()> {
    check_model(x, model)?;
    if etas.zeta.dim() != model.v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "zeta is {:?}, dictionary is {:?}",
            etas.zeta.dim(),
            model.v.dim()
        )));
    }
    let (n, p) = x.dim();
    let np_lambda = n as f64 * p as f64 * cfg.lambda;
    let xtu = x.t().dot(&model.u);
    let utu = model.u.t().dot(&model.u);
    let r = model.r();
    let mut dead = false;
    for _ in 0..cfg.sweeps_v {
        for k in 0..r {
            let a = utu[[k, k]];
            if a == 0.0 && cfg.lambda == 0.0 {
                model.v.column_mut(k).fill(0.0);
                dead = true;
                continue;
            }
            let vutu = model.v.dot(&utu.column(k));
            let nonneg = cfg.nonneg;
            let lambda_zero = cfg.lambda == 0.0;
            Zip::from(model.v.column_mut(k))
                .and(xtu.column(k))
                .and(&vutu)
                .and(etas.zeta.column(k))
                .for_each(|vjk, &xu, &vu, &z| {
                    let rhs = xu - vu + a * *vjk;
                    let mut next = if lambda_zero {
                        rhs / a
                    } else if z == 0.0 {
                        0.0
                    } else {
                        z * rhs / (a * z + np_lambda)
                    };
                    if nonneg {
                        next = next.max(0.0);
                    }
                    *vjk = next;
                });
        }
    }
    if dead {
        debug!("V update zeroed elements with zero coefficients and lambda = 0");
    }
    Ok(())
}

fn random_init(
    x: ArrayView2<f64>,
    cfg: &SolverConfig,
    part: &Partition,
    rng: &mut ChaCha8Rng,
) -> FactorModel {
    let (n, p) = x.dim();
    let r = cfg.rank;
    let draw = |rng: &mut ChaCha8Rng| {
        let s: f64 = rng.random_range(-1.0..1.0);
        if cfg.nonneg {
            s.abs()
        } else {
            s
        }
    };
    let mut u = Array2::from_shape_simple_fn((n, r), || draw(rng));
    for mut col in u.columns_mut() {
        let projected = project_coeff_ball(col.view(), cfg.coeff_norm);
        col.assign(&projected);
    }
    let x_norm = x.iter().map(|e| e * e).sum::<f64>().sqrt();
    let scale = x_norm / (r as f64 * ((n * p) as f64).sqrt());
    let v = Array2::from_shape_simple_fn((p, r), || draw(rng) * scale);
    FactorModel {
        u,
        v,
        partition: part.clone(),
    }
}

/// One outer iteration's state, handed to fit observers.
pub struct IterationView<'a> {
    pub row: &'a TraceRow,
    pub model: &'a FactorModel,
    pub etas: &'a EtaState,
    pub restart: usize,
}

fn check_fit_inputs(
    x: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    check_data(x)?;
    gs.validate(x.ncols())?;
    if gs.p() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, groups cover p = {}",
            x.ncols(),
            gs.p()
        )));
    }
    if part.r() != cfg.rank {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} elements, rank is {}",
            part.r(),
            cfg.rank
        )));
    }
    Ok(())
}

fn fit_once(
    x: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    cfg: &SolverConfig,
    restart: usize,
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> Result<(FactorModel, Trace, EtaState)> {
    let params = cfg.regularizer_params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut model = random_init(x, cfg, part, &mut rng);

    let start = Instant::now();
    let obj = objective(x, &model, gs, cfg)?;
    let mut rows = vec![TraceRow {
        iteration: 0,
        objective: obj.total,
        loss: obj.loss,
        penalty: obj.penalty,
        elapsed_secs: 0.0,
    }];
    let mut prev = obj.total;
    let mut last_etas = None;
    let mut stop = StopReason::MaxIterations;

    for iteration in 1..=cfg.max_iter {
        let etas = regularizer::update_eta(model.v.view(), gs, part, &params)?;
        sweep_u(x, &mut model.u, model.v.view(), cfg);
        update_v(x, &mut model, &etas, cfg)?;

        let obj = objective(x, &model, gs, cfg)?;
        if !obj.total.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became {} at iteration {iteration} (loss {}, penalty {})",
                obj.total, obj.loss, obj.penalty
            )));
        }
        rows.push(TraceRow {
            iteration,
            objective: obj.total,
            loss: obj.loss,
            penalty: obj.penalty,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
        observer(&IterationView {
            row: rows.last().unwrap(),
            model: &model,
            etas: &etas,
            restart,
        });

        last_etas = Some(etas);
        let converged = if prev == 0.0 {
            true
        } else {
            (prev - obj.total) / prev.abs() < cfg.stop_tol
        };
        prev = obj.total;
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }
    if stop == StopReason::MaxIterations {
        warn!(
            "fit stopped after {} iterations without reaching the relative decrease {}",
            cfg.max_iter, cfg.stop_tol
        );
    }
    let etas = last_etas.expect("max_iter >= 1");
    Ok((model, Trace { rows, stop }, etas))
}

/// Learns `(U, V)` from `X` (n×p) with the given groups and partition.
pub fn fit(
    x: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    fit_with_observer(x, gs, part, cfg, |_| {})
}

/// Like [`fit`], calling `observer` after every outer iteration of every
/// restart.
pub fn fit_with_observer(
    x: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&IterationView<'_>),
) -> Result<FitResult> {
    check_fit_inputs(x, gs, part, cfg)?;
    let mut best: Option<(FactorModel, Trace, EtaState, usize)> = None;
    let mut restart_objectives = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let (model, trace, etas) = fit_once(x, gs, part, cfg, restart, &mut observer)?;
        let value = trace.final_objective();
        restart_objectives.push(value);
        let better = match &best {
            None => true,
            Some((_, t, _, _)) => value < t.final_objective(),
        };
        if better {
            best = Some((model, trace, etas, restart));
        }
    }
    let (model, trace, etas, best_restart) = best.expect("at least one restart");
    Ok(FitResult {
        model,
        trace,
        etas,
        best_restart,
        restart_objectives,
    })
}

/// Coefficients of new observations on a fixed dictionary: U sweeps from
/// zero until the relative change of `U` falls below `stop_tol`.
pub fn encode(x_new: ArrayView2<f64>, v: ArrayView2<f64>, cfg: &SolverConfig) -> Result<Array2<f64>> {
    check_data(x_new)?;
    if x_new.ncols() != v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, dictionary has {} rows",
            x_new.ncols(),
            v.nrows()
        )));
    }
    let mut u = Array2::zeros((x_new.nrows(), v.ncols()));
    for _ in 0..cfg.max_iter {
        let prev = u.clone();
        sweep_u(x_new, &mut u, v, cfg);
        let change = (&u - &prev).iter().map(|e| e * e).sum::<f64>().sqrt();
        let size = u.iter().map(|e| e * e).sum::<f64>().sqrt();
        if change <= cfg.stop_tol * size {
            return Ok(u);
        }
    }
    warn!("encoding stopped after {} rounds", cfg.max_iter);
    Ok(u)
}

/// Largest `Ω_u(U^k)` over the columns.
pub fn max_coeff_norm(u: ArrayView2<f64>, norm: CoeffNorm) -> f64 {
    u.axis_iter(Axis(1))
        .map(|c| norm.norm(c))
        .fold(0.0, f64::max)
}
