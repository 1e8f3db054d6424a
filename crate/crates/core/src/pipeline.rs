//! Experiment machinery: planted synthetic data, k-NN scoring of learned
//! representations, k-fold cross-validation over (λ, r, k), the coverage
//! heuristic for λ and dictionary post-processing.

use std::collections::BTreeMap;

use log::warn;
use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{GridSpec, GroupStructure};
use crate::regularizer::Partition;
use crate::solver::{self, FactorModel, SolverConfig};

/// Observations with class labels and, optionally, their pixel geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    pub grid: Option<GridSpec>,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, labels: Vec<usize>, grid: Option<GridSpec>) -> Result<Self> {
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                x.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains non-finite values".into()));
        }
        if let Some(g) = &grid {
            if g.p() != x.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "grid has {} cells, data has {} columns",
                    g.p(),
                    x.ncols()
                )));
            }
        }
        Ok(LabeledDataset { x, labels, grid })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Rows `idx` as a new dataset.
    pub fn select(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select(Axis(0), idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            grid: self.grid.clone(),
        }
    }
}

/// Axis-aligned rectangle on a 2D grid (0-based, inclusive top-left).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top && row < self.top + self.height && col >= self.left && col < self.left + self.width
    }

    /// Variable indices inside the rectangle, row-major.
    pub fn indices(&self, width: usize) -> Vec<usize> {
        (self.top..self.top + self.height)
            .flat_map(|r| (self.left..self.left + self.width).map(move |c| r * width + c))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// Gaussian noise with this standard deviation.
    Absolute(f64),
    /// Standard deviation as a fraction of the root-mean-square of `U V*ᵀ`.
    RelativeToSignal(f64),
}

/// Parameters of the planted rectangular-support model.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub grid: GridSpec,
    pub rank: usize,
    pub n: usize,
    pub noise: NoiseLevel,
    pub seed: u64,
    /// Nonnegative coefficients (for NMF-style data).
    pub nonneg: bool,
    /// Each observation uses exactly one element (its label), which makes
    /// the classes separable.
    pub one_element_per_row: bool,
    /// Consecutive elements in blocks of this size share one rectangle.
    pub shared_class_size: Option<usize>,
    /// Allowed support sizes as fractions of the grid.
    pub min_fraction: f64,
    pub max_fraction: f64,
}

impl PlantedSpec {
    pub fn new(grid: GridSpec, rank: usize, n: usize) -> Self {
        PlantedSpec {
            grid,
            rank,
            n,
            noise: NoiseLevel::Absolute(0.0),
            seed: 0,
            nonneg: false,
            one_element_per_row: false,
            shared_class_size: None,
            min_fraction: 0.1,
            max_fraction: 0.4,
        }
    }

    pub fn noise(mut self, noise: NoiseLevel) -> Self {
        self.noise = noise;
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

    pub fn one_element_per_row(mut self, on: bool) -> Self {
        self.one_element_per_row = on;
        self
    }

    pub fn shared_class_size(mut self, size: usize) -> Self {
        self.shared_class_size = Some(size);
        self
    }

    pub fn generate(&self) -> Result<PlantedData> {
        let (h, w) = self.grid.as_2d().ok_or_else(|| {
            Error::UnsupportedGeometry("planted rectangles need a 2D grid".into())
        })?;
        if self.rank == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("rank and n must be positive".into()));
        }
        let p = h * w;
        let lo = self.min_fraction * p as f64;
        let hi = self.max_fraction * p as f64;
        let mut candidates = Vec::new();
        for height in 1..=h {
            for width in 1..=w {
                let area = (height * width) as f64;
                if area < lo || area > hi {
                    continue;
                }
                for top in 0..=h - height {
                    for left in 0..=w - width {
                        candidates.push(Rect { top, left, height, width });
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no rectangle on a {h}x{w} grid covers between {} and {} of the cells",
                self.min_fraction, self.max_fraction
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let class_size = self.shared_class_size.unwrap_or(1);
        if class_size == 0 {
            return Err(Error::InvalidParameter("shared class size must be positive".into()));
        }
        let mut rects: Vec<Rect> = Vec::with_capacity(self.rank);
        for k in 0..self.rank {
            let rect = if k % class_size == 0 {
                candidates[rng.random_range(0..candidates.len())]
            } else {
                rects[k - 1]
            };
            rects.push(rect);
        }

        let mut true_v = Array2::zeros((p, self.rank));
        for (k, rect) in rects.iter().enumerate() {
            for j in rect.indices(w) {
                true_v[[j, k]] = rng.random_range(0.5..1.5);
            }
        }

        let mut true_u: Array2<f64> = Array2::zeros((self.n, self.rank));
        let mut labels = Vec::with_capacity(self.n);
        if self.one_element_per_row {
            for i in 0..self.n {
                let k = i % self.rank;
                true_u[[i, k]] = rng.random_range(0.5..1.0);
                labels.push(k);
            }
            for mut col in true_u.columns_mut() {
                let norm = col.dot(&col).sqrt();
                if norm > 0.0 {
                    col.mapv_inplace(|x| x / norm);
                }
            }
        } else {
            for x in true_u.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *x = if self.nonneg { g.abs() } else { g };
            }
            for mut col in true_u.columns_mut() {
                let target: f64 = rng.random_range(0.5..1.0);
                let norm = col.dot(&col).sqrt();
                if norm > 0.0 {
                    col.mapv_inplace(|x| x * target / norm);
                }
            }
            for row in true_u.rows() {
                let (k, _) = row
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |best, (k, &x)| if x.abs() > best.1 { (k, x.abs()) } else { best });
                labels.push(k);
            }
        }

        let clean = true_u.dot(&true_v.t());
        let sd = match self.noise {
            NoiseLevel::Absolute(sd) => sd,
            NoiseLevel::RelativeToSignal(frac) => {
                let rms = (clean.iter().map(|x| x * x).sum::<f64>() / clean.len() as f64).sqrt();
                frac * rms
            }
        };
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad noise level {sd}")));
        }
        let mut x = clean;
        if sd > 0.0 {
            for v in x.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v += sd * g;
            }
        }
        Ok(PlantedData {
            dataset: LabeledDataset::new(x, labels, Some(self.grid.clone()))?,
            true_u,
            true_v,
            rects,
            noise_sd: sd,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PlantedData {
    pub dataset: LabeledDataset,
    pub true_u: Array2<f64>,
    pub true_v: Array2<f64>,
    pub rects: Vec<Rect>,
    /// Absolute noise standard deviation that was applied.
    pub noise_sd: f64,
}

/// Planted data with random rectangular supports on a 2D grid.
pub fn generate_planted(
    grid: &GridSpec,
    rank: usize,
    n: usize,
    noise: NoiseLevel,
    seed: u64,
) -> Result<PlantedData> {
    PlantedSpec::new(grid.clone(), rank, n)
        .noise(noise)
        .seed(seed)
        .generate()
}

/// Indices `j` with `|v_j| > rel_tol · max|v|`.
pub fn support(v: ArrayView1<f64>, rel_tol: f64) -> Vec<usize> {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    let cut = rel_tol * max;
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > cut)
        .map(|(j, _)| j)
        .collect()
}

/// Per-element supports where the cut is `rel_tol` times the largest magnitude
/// found anywhere in the element's class.
pub fn class_supports(v: ArrayView2<f64>, partition: &Partition, rel_tol: f64) -> Result<Vec<Vec<usize>>> {
    if partition.r() != v.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} elements but V has {} columns",
            partition.r(),
            v.ncols()
        )));
    }
    let mut out = vec![Vec::new(); v.ncols()];
    for class in partition.classes() {
        let max = class
            .iter()
            .flat_map(|&k| v.column(k).into_iter().copied())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let cut = rel_tol * max;
        for &k in class {
            if max > 0.0 {
                out[k] = (0..v.nrows()).filter(|&j| v[[j, k]].abs() > cut).collect();
            }
        }
    }
    Ok(out)
}

/// Smallest rectangle enclosing a set of cells of an `h×w` grid.
pub fn bounding_rect(indices: &[usize], width: usize) -> Option<Rect> {
    if indices.is_empty() {
        return None;
    }
    let rows = indices.iter().map(|j| j / width);
    let cols = indices.iter().map(|j| j % width);
    let (top, bottom) = (rows.clone().min().unwrap(), rows.max().unwrap());
    let (left, right) = (cols.clone().min().unwrap(), cols.max().unwrap());
    Some(Rect {
        top,
        left,
        height: bottom - top + 1,
        width: right - left + 1,
    })
}

/// `|S| / area(bounding rectangle of S)`; 0 for an empty set.
pub fn rect_fill_ratio(indices: &[usize], width: usize) -> f64 {
    match bounding_rect(indices, width) {
        Some(rect) => indices.len() as f64 / rect.area() as f64,
        None => 0.0,
    }
}

/// `|⋃_k Supp(V^k)|² / (p Σ_k |Supp(V^k)|)` with thresholded supports.
pub fn lambda_coverage_score(v: ArrayView2<f64>, rel_tol: f64) -> f64 {
    let p = v.nrows();
    let mut union = vec![false; p];
    let mut total = 0usize;
    for col in v.columns() {
        let s = support(col, rel_tol);
        total += s.len();
        for j in s {
            union[j] = true;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let covered = union.iter().filter(|&&c| c).count() as f64;
    covered * covered / (p as f64 * total as f64)
}

/// Majority vote among the `k` nearest training rows (Euclidean). Ties go
/// to the smaller mean neighbor distance, then the smaller label.
pub fn knn_classify(
    train: ArrayView2<f64>,
    train_labels: &[usize],
    test: ArrayView2<f64>,
    k: usize,
) -> Result<Vec<usize>> {
    let m = train.nrows();
    if m == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if train_labels.len() != m {
        return Err(Error::DimensionMismatch(format!("{} labels for {m} training rows", train_labels.len())));
    }
    if train.ncols() != test.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "training rows have {} features, test rows {}",
            train.ncols(),
            test.ncols()
        )));
    }
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("k = {k} with {m} training rows")));
    }
    let predictions = test
        .rows()
        .into_iter()
        .map(|q| {
            let mut dists: Vec<(f64, usize)> = train
                .rows()
                .into_iter()
                .enumerate()
                .map(|(i, t)| {
                    let d2: f64 = t.iter().zip(q.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                    (d2.sqrt(), i)
                })
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
            for &(d, i) in &dists[..k] {
                let e = votes.entry(train_labels[i]).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += d;
            }
            // BTreeMap iterates labels ascending, so strict comparisons keep
            // the smallest label on a full tie.
            let mut best: Option<(usize, usize, f64)> = None;
            for (&label, &(count, sum)) in &votes {
                let mean = sum / count as f64;
                let better = match best {
                    None => true,
                    Some((_, bc, bm)) => count > bc || (count == bc && mean < bm),
                };
                if better {
                    best = Some((label, count, mean));
                }
            }
            best.unwrap().0
        })
        .collect();
    Ok(predictions)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Candidate values searched by [`cross_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CVGrid {
    pub k_candidates: Vec<usize>,
    pub log2_lambda: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl Default for CVGrid {
    /// k ∈ {1,3,5}, log₂λ ∈ {4,6,…,18}, r ∈ {10,20,…,70}.
    fn default() -> Self {
        CVGrid {
            k_candidates: vec![1, 3, 5],
            log2_lambda: (4..=18).step_by(2).map(f64::from).collect(),
            ranks: (10..=70).step_by(10).collect(),
        }
    }
}

impl CVGrid {
    pub fn validate(&self) -> Result<()> {
        if self.k_candidates.is_empty() || self.log2_lambda.is_empty() || self.ranks.is_empty() {
            return Err(Error::InvalidParameter("every CV candidate list must be nonempty".into()));
        }
        Ok(())
    }

    /// All `(log₂λ, r, k)` triples in search order.
    pub fn combinations(&self) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        for &l in &self.log2_lambda {
            for &r in &self.ranks {
                for &k in &self.k_candidates {
                    out.push((l, r, k));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldOptions {
    pub folds: usize,
    pub seed: u64,
}

impl Default for FoldOptions {
    fn default() -> Self {
        FoldOptions { folds: 5, seed: 0 }
    }
}

/// Train/validation index pairs for k-fold CV.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSplits {
    pub splits: Vec<(Vec<usize>, Vec<usize>)>,
    pub stratified: bool,
}

/// Stratified by label when every class has at least `folds` members;
/// otherwise a shuffled round-robin split (with a warning).
pub fn fold_splits(labels: &[usize], opts: FoldOptions) -> Result<FoldSplits> {
    let n = labels.len();
    if opts.folds < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    if n < opts.folds {
        return Err(Error::InvalidInput(format!("{n} rows cannot fill {} folds", opts.folds)));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let stratified = by_class.values().all(|c| c.len() >= opts.folds);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let order: Vec<usize> = if stratified {
        by_class
            .into_values()
            .flat_map(|mut members| {
                members.shuffle(&mut rng);
                members
            })
            .collect()
    } else {
        warn!("a class has fewer than {} members; using unstratified folds", opts.folds);
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all
    };
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % opts.folds;
    }
    let splits = (0..opts.folds)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            (train, val)
        })
        .collect();
    Ok(FoldSplits { splits, stratified })
}

/// Accuracy of one grid point on one fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvScore {
    pub log2_lambda: f64,
    pub rank: usize,
    pub k: usize,
    pub fold: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPointSummary {
    pub log2_lambda: f64,
    pub rank: usize,
    pub k: usize,
    pub mean_accuracy: f64,
}

impl GridPointSummary {
    pub fn lambda(&self) -> f64 {
        self.log2_lambda.exp2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub scores: Vec<CvScore>,
    pub summaries: Vec<GridPointSummary>,
    pub best: GridPointSummary,
    pub stratified: bool,
}

impl CvReport {
    /// `log2_lambda,lambda,rank,k,fold,accuracy` rows.
    pub fn scores_csv(&self) -> String {
        let mut out = String::from("log2_lambda,lambda,rank,k,fold,accuracy\n");
        for s in &self.scores {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.log2_lambda,
                s.log2_lambda.exp2(),
                s.rank,
                s.k,
                s.fold + 1,
                s.accuracy
            ));
        }
        out
    }
}

/// How the dictionary partition is built for each candidate rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionRule {
    #[default]
    Singletons,
    /// Consecutive classes of the given size.
    Contiguous(usize),
}

impl PartitionRule {
    pub fn build(self, r: usize) -> Result<Partition> {
        match self {
            PartitionRule::Singletons => Ok(Partition::singletons(r)),
            PartitionRule::Contiguous(size) => Partition::contiguous(r, size),
        }
    }
}

fn pick_best(summaries: &[GridPointSummary]) -> GridPointSummary {
    let mut best = summaries[0];
    for s in &summaries[1..] {
        let key = |g: &GridPointSummary| (g.log2_lambda, g.rank, g.k);
        let better = s.mean_accuracy > best.mean_accuracy
            || (s.mean_accuracy == best.mean_accuracy && {
                let (a, b) = (key(s), key(&best));
                a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)))
            });
        if better {
            best = *s;
        }
    }
    best
}

/// k-fold CV over `(λ, r, k)`: fit on the training rows, encode both
/// training and validation rows on the learned dictionary, and score k-NN
/// on the codes. The best mean accuracy wins; ties go to smaller λ, then
/// smaller r, then smaller k.
pub fn cross_validate(
    data: &LabeledDataset,
    gs: &GroupStructure,
    grid: &CVGrid,
    template: &SolverConfig,
    partition: PartitionRule,
    opts: FoldOptions,
) -> Result<CvReport> {
    grid.validate()?;
    let folds = fold_splits(&data.labels, opts)?;
    let jobs: Vec<(usize, usize, usize)> = (0..grid.log2_lambda.len())
        .flat_map(|li| (0..grid.ranks.len()).flat_map(move |ri| (0..opts.folds).map(move |f| (li, ri, f))))
        .collect();
    let results: Vec<Result<Vec<CvScore>>> = jobs
        .par_iter()
        .map(|&(li, ri, f)| {
            let log2_lambda = grid.log2_lambda[li];
            let rank = grid.ranks[ri];
            let (train_idx, val_idx) = &folds.splits[f];
            let train = data.select(train_idx);
            let val = data.select(val_idx);
            let mut cfg = template.clone();
            cfg.rank = rank;
            cfg.lambda = log2_lambda.exp2();
            let part = partition.build(rank)?;
            let fitted = solver::fit(train.x.view(), gs, &part, &cfg)?;
            let v = fitted.model.v.view();
            let train_codes = solver::encode(train.x.view(), v, &cfg)?;
            let val_codes = solver::encode(val.x.view(), v, &cfg)?;
            grid.k_candidates
                .iter()
                .map(|&k| {
                    let pred = knn_classify(train_codes.view(), &train.labels, val_codes.view(), k)?;
                    Ok(CvScore {
                        log2_lambda,
                        rank,
                        k,
                        fold: f,
                        accuracy: accuracy(&pred, &val.labels),
                    })
                })
                .collect()
        })
        .collect();
    let mut scores = Vec::with_capacity(jobs.len() * grid.k_candidates.len());
    for r in results {
        scores.extend(r?);
    }
    let summaries = summarize(&scores, grid, opts.folds);
    Ok(CvReport {
        best: pick_best(&summaries),
        scores,
        summaries,
        stratified: folds.stratified,
    })
}

fn summarize(scores: &[CvScore], grid: &CVGrid, folds: usize) -> Vec<GridPointSummary> {
    grid.combinations()
        .into_iter()
        .map(|(log2_lambda, rank, k)| {
            let total: f64 = scores
                .iter()
                .filter(|s| s.log2_lambda == log2_lambda && s.rank == rank && s.k == k)
                .map(|s| s.accuracy)
                .sum();
            GridPointSummary {
                log2_lambda,
                rank,
                k,
                mean_accuracy: total / folds as f64,
            }
        })
        .collect()
}

/// Mean k-fold accuracy of k-NN directly on the raw rows, per candidate k.
pub fn knn_baseline(data: &LabeledDataset, k_candidates: &[usize], opts: FoldOptions) -> Result<Vec<(usize, f64)>> {
    let folds = fold_splits(&data.labels, opts)?;
    k_candidates
        .iter()
        .map(|&k| {
            let mut total = 0.0;
            for (train_idx, val_idx) in &folds.splits {
                let train = data.select(train_idx);
                let val = data.select(val_idx);
                let pred = knn_classify(train.x.view(), &train.labels, val.x.view(), k)?;
                total += accuracy(&pred, &val.labels);
            }
            Ok((k, total / folds.splits.len() as f64))
        })
        .collect()
}

/// Coverage score for every candidate log₂λ, and the maximizer (first on ties).
pub fn select_lambda_by_coverage(
    x: ArrayView2<f64>,
    gs: &GroupStructure,
    part: &Partition,
    template: &SolverConfig,
    log2_lambdas: &[f64],
    rel_tol: f64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if log2_lambdas.is_empty() {
        return Err(Error::InvalidParameter("no lambda candidates".into()));
    }
    let scores: Vec<(f64, f64)> = log2_lambdas
        .par_iter()
        .map(|&l| {
            let mut cfg = template.clone();
            cfg.lambda = l.exp2();
            let fitted = solver::fit(x, gs, part, &cfg)?;
            Ok((l, lambda_coverage_score(fitted.model.v.view(), rel_tol)))
        })
        .collect::<Result<_>>()?;
    let best = scores
        .iter()
        .fold(scores[0], |b, &s| if s.1 > b.1 { s } else { b });
    Ok((best.0, scores))
}

/// Permutes elements by decreasing `‖U^k‖²·‖V^k‖²` (stable on ties).
/// Returns the reordered model and `perm`, where new element `i` is old
/// element `perm[i]`.
pub fn order_by_explained_variance(model: &FactorModel) -> (FactorModel, Vec<usize>) {
    let energy: Vec<f64> = (0..model.r())
        .map(|k| {
            let u = model.u.column(k);
            let v = model.v.column(k);
            u.dot(&u) * v.dot(&v)
        })
        .collect();
    let mut perm: Vec<usize> = (0..model.r()).collect();
    perm.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]));
    let reordered = FactorModel {
        u: model.u.select(Axis(1), &perm),
        v: model.v.select(Axis(1), &perm),
        partition: model.partition.permuted(&perm),
    };
    (reordered, perm)
}
