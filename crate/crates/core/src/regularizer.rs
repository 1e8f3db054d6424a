//! The `ℓα/ℓ2` group quasi-norm and its variational (η) form.
//!
//! For `α ∈ (0, 2)` and `β = α/(2−α)`,
//!
//! ```text
//! ‖y‖_α = min_{z ≥ 0}  ½ Σ_j y_j² / z_j  +  ½ ‖z‖_β
//! ```
//!
//! with the minimum attained at `z_j = |y_j|^{2−α} ‖y‖_α^{α−1}`. Applied to
//! the vector of group norms of a dictionary element, this turns the
//! non-smooth penalty into a weighted ridge term `Σ_j V_j² / ζ_j` whose
//! weights `ζ` are refreshed in closed form.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::groups::GroupStructure;

/// How the ε added to each η is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// `ε = max(factor · max_G η*_G, floor)`, recomputed on every update.
    Relative { factor: f64, floor: f64 },
    /// Fixed ε. Zero gives the exact (unsmoothed) minimizer.
    Absolute(f64),
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Relative {
            factor: 1e-9,
            floor: 1e-12,
        }
    }
}

impl Smoothing {
    fn resolve(self, max_eta: f64) -> f64 {
        match self {
            Smoothing::Relative { factor, floor } => (factor * max_eta).max(floor),
            Smoothing::Absolute(eps) => eps,
        }
    }

    fn check(self) -> Result<()> {
        let ok = match self {
            Smoothing::Relative { factor, floor } => {
                factor >= 0.0 && floor > 0.0 && factor.is_finite() && floor.is_finite()
            }
            Smoothing::Absolute(eps) => eps >= 0.0 && eps.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad smoothing {self:?}")))
        }
    }
}

/// Exponent α, the derived β and the η smoothing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerParams {
    alpha: f64,
    beta: f64,
    smoothing: Smoothing,
}

impl RegularizerParams {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(RegularizerParams {
            alpha,
            beta: alpha / (2.0 - alpha),
            smoothing: Smoothing::default(),
        })
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Result<Self> {
        smoothing.check()?;
        self.smoothing = smoothing;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 2), got {alpha}"
        )))
    }
}

/// A partition of the dictionary indices `0..r` into classes sharing a
/// common support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl Partition {
    pub fn new(r: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut class_of = vec![usize::MAX; r];
        let mut sorted = Vec::with_capacity(classes.len());
        for (m, mut class) in classes.into_iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidParameter(format!("partition class {} is empty", m + 1)));
            }
            class.sort_unstable();
            for &k in &class {
                if k >= r {
                    return Err(Error::InvalidParameter(format!(
                        "partition element {} exceeds r = {r}",
                        k + 1
                    )));
                }
                if class_of[k] != usize::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "element {} appears in two partition classes",
                        k + 1
                    )));
                }
                class_of[k] = m;
            }
            sorted.push(class);
        }
        if let Some(k) = class_of.iter().position(|&m| m == usize::MAX) {
            return Err(Error::InvalidParameter(format!(
                "element {} is in no partition class",
                k + 1
            )));
        }
        Ok(Partition {
            classes: sorted,
            class_of,
        })
    }

    /// Every element in its own class (no shared structure).
    pub fn singletons(r: usize) -> Self {
        Partition {
            classes: (0..r).map(|k| vec![k]).collect(),
            class_of: (0..r).collect(),
        }
    }

    /// Consecutive classes of `size` elements; the last one may be smaller.
    pub fn contiguous(r: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("class size must be positive".into()));
        }
        let classes = (0..r)
            .step_by(size)
            .map(|start| (start..(start + size).min(r)).collect())
            .collect();
        Partition::new(r, classes)
    }

    pub fn r(&self) -> usize {
        self.class_of.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, k: usize) -> usize {
        self.class_of[k]
    }

    pub fn is_singletons(&self) -> bool {
        self.classes.len() == self.class_of.len()
    }

    /// Relabels elements: old element `perm[new]` becomes `new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let classes = self
            .classes
            .iter()
            .map(|c| c.iter().map(|&k| inverse[k]).collect())
            .collect();
        Partition::new(self.r(), classes).expect("permutation preserves partition validity")
    }

    /// Parses `"1,2;3"` (1-based, classes separated by `;`).
    pub fn from_text(text: &str, r: usize) -> Result<Self> {
        let classes = text
            .trim()
            .split(';')
            .map(|class| {
                class
                    .split(',')
                    .map(|k| {
                        let k: usize = k.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad partition entry `{k}`"))
                        })?;
                        k.checked_sub(1).ok_or_else(|| {
                            Error::InvalidParameter("partition entries are 1-based".into())
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(r, classes)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, class) in self.classes.iter().enumerate() {
            if m > 0 {
                f.write_str(";")?;
            }
            for (i, k) in class.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", k + 1)?;
            }
        }
        Ok(())
    }
}

/// Auxiliary variables `η^G_M` (groups × classes) and the derived `ζ` (p × r).
#[derive(Debug, Clone, PartialEq)]
pub struct EtaState {
    pub eta: Array2<f64>,
    pub zeta: Array2<f64>,
    /// The ε actually added on the last update.
    pub epsilon: f64,
}

impl EtaState {
    /// Rebuilds `ζ` from the stored `η`.
    pub fn recompute_zeta(&self, gs: &GroupStructure, part: &Partition) -> Array2<f64> {
        zeta_from_eta(self.eta.view(), gs, part)
    }
}

/// `a / b` extended by continuity: `a/0 = ∞` for `a ≠ 0`, `0/0 = 0`.
pub fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// `(Σ |x_i|^q)^{1/q}` for any `q > 0`, computed after rescaling by the
/// largest magnitude.
pub fn lq_norm<'a>(values: impl IntoIterator<Item = &'a f64> + Clone, q: f64) -> f64 {
    let scale = values
        .clone()
        .into_iter()
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    if q == 1.0 {
        return values.into_iter().map(|x| x.abs()).sum();
    }
    let s: f64 = values
        .into_iter()
        .map(|&x| (x.abs() / scale).powf(q))
        .sum();
    scale * s.powf(1.0 / q)
}

/// `‖d^G ∘ y‖₂` for every group, in group order.
pub fn group_norms(y: ArrayView1<f64>, gs: &GroupStructure) -> Result<Array1<f64>> {
    if y.len() != gs.p() {
        return Err(Error::DimensionMismatch(format!(
            "vector has length {}, groups cover p = {}",
            y.len(),
            gs.p()
        )));
    }
    Ok(gs
        .groups()
        .iter()
        .map(|g| g.iter().map(|(j, w)| (w * y[j]).powi(2)).sum::<f64>().sqrt())
        .collect())
}

/// `Ω^α(y) = ‖(‖d^G ∘ y‖₂)_G‖_α`; `α = 1` gives the convex norm `Ω`.
pub fn omega_alpha(y: ArrayView1<f64>, gs: &GroupStructure, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let blocks = group_norms(y, gs)?;
    Ok(lq_norm(blocks.iter(), alpha))
}

/// Closed-form minimizer `z_j = |y_j|^{2−α} ‖y‖_α^{α−1}` of the η identity.
/// Returns zeros for `y = 0`.
pub fn eta_minimizer(y: ArrayView1<f64>, alpha: f64) -> Result<Array1<f64>> {
    check_alpha(alpha)?;
    let norm = lq_norm(y.iter(), alpha);
    if norm == 0.0 {
        return Ok(Array1::zeros(y.len()));
    }
    let scale = norm.powf(alpha - 1.0);
    Ok(y.mapv(|v| if v == 0.0 { 0.0 } else { v.abs().powf(2.0 - alpha) * scale }))
}

/// `½ Σ_j y_j²/z_j + ½ ‖z‖_β`, the function minimized by [`eta_minimizer`].
pub fn eta_objective(y: ArrayView1<f64>, z: ArrayView1<f64>, alpha: f64) -> f64 {
    let beta = alpha / (2.0 - alpha);
    let quad: f64 = y.iter().zip(z).map(|(&a, &b)| ratio(a * a, b)).sum();
    0.5 * quad + 0.5 * lq_norm(z.iter(), beta)
}

fn check_shapes(v: ArrayView2<f64>, gs: &GroupStructure, part: &Partition) -> Result<()> {
    let (p, r) = v.dim();
    if p != gs.p() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {p} rows, groups cover p = {}",
            gs.p()
        )));
    }
    if r != part.r() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {r} columns, partition covers r = {}",
            part.r()
        )));
    }
    Ok(())
}

/// Block norms `‖(V^k_i d^G_i)_{i∈G, k∈M}‖₂`, shape groups × classes.
pub fn class_group_norms(
    v: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
) -> Result<Array2<f64>> {
    check_shapes(v, gs, part)?;
    let mut out = Array2::zeros((gs.len(), part.num_classes()));
    for (m, class) in part.classes().iter().enumerate() {
        for (g, group) in gs.groups().iter().enumerate() {
            let mut s = 0.0;
            for (i, w) in group.iter() {
                for &k in class {
                    s += (v[[i, k]] * w).powi(2);
                }
            }
            out[[g, m]] = s.sqrt();
        }
    }
    Ok(out)
}

/// `Σ_M [Σ_G ‖(V^k_i d^G_i)_{i∈G, k∈M}‖₂^α]^{1/α}`.
///
/// With the singleton partition this is `Σ_k Ω^α(V^k)`.
pub fn shared_omega_alpha(
    v: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let blocks = class_group_norms(v, gs, part)?;
    Ok(blocks
        .columns()
        .into_iter()
        .map(|col| lq_norm(col.iter(), alpha))
        .sum())
}

/// `ζ_{jk} = (Σ_{G∋j} (d^G_j)² / η^G_{class(k)})⁻¹`.
pub fn zeta_from_eta(eta: ArrayView2<f64>, gs: &GroupStructure, part: &Partition) -> Array2<f64> {
    let p = gs.p();
    let mut per_class = Array2::zeros((p, part.num_classes()));
    for j in 0..p {
        for m in 0..part.num_classes() {
            let s: f64 = gs
                .groups_containing(j)
                .iter()
                .map(|&(g, w2)| w2 / eta[[g, m]])
                .sum();
            per_class[[j, m]] = 1.0 / s;
        }
    }
    Array2::from_shape_fn((p, part.r()), |(j, k)| per_class[[j, part.class_of(k)]])
}

/// Closed-form η update for every class, plus smoothing and the matching ζ.
pub fn update_eta(
    v: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    params: &RegularizerParams,
) -> Result<EtaState> {
    let blocks = class_group_norms(v, gs, part)?;
    let mut eta = Array2::zeros(blocks.dim());
    for m in 0..part.num_classes() {
        let z = eta_minimizer(blocks.column(m), params.alpha)?;
        eta.column_mut(m).assign(&z);
    }
    let max_eta = eta.iter().fold(0.0f64, |a, &b| a.max(b));
    let epsilon = params.smoothing.resolve(max_eta);
    eta.mapv_inplace(|x| x + epsilon);
    let zeta = zeta_from_eta(eta.view(), gs, part);
    Ok(EtaState { eta, zeta, epsilon })
}

/// `Σ_M [Σ_{k∈M} (V^k)ᵀ Diag(ζ^M)⁻¹ V^k + ‖(η^G_M)_G‖_β]`, without the λ/2
/// factor. Entries with `ζ = 0` follow [`ratio`].
pub fn variational_penalty(
    v: ArrayView2<f64>,
    etas: &EtaState,
    part: &Partition,
    params: &RegularizerParams,
) -> Result<f64> {
    if v.dim() != etas.zeta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary is {:?}, zeta is {:?}",
            v.dim(),
            etas.zeta.dim()
        )));
    }
    if etas.eta.ncols() != part.num_classes() {
        return Err(Error::DimensionMismatch(format!(
            "eta has {} classes, partition has {}",
            etas.eta.ncols(),
            part.num_classes()
        )));
    }
    let quad: f64 = v
        .iter()
        .zip(etas.zeta.iter())
        .map(|(&x, &z)| ratio(x * x, z))
        .sum();
    let eta_term: f64 = etas
        .eta
        .columns()
        .into_iter()
        .map(|col| lq_norm(col.iter(), params.beta))
        .sum();
    Ok(quad + eta_term)
}
