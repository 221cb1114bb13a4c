//! G-optimal designs, sample policies, and the λ-variation / λ-deviation estimators.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{norm, Cholesky, KernelError, PsdMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("context set is empty")]
    EmptySet,
    #[error("context vectors have inconsistent lengths")]
    Ragged,
    #[error("context vector {index} has norm {norm} > 1")]
    NormViolation { index: usize, norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("G-optimal solver did not converge (best max variance {best})")]
    DidNotConverge { best: f64 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("sample list is empty")]
    NoSamples,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

const NORM_SLACK: f64 = 1e-12;

/// One step's candidate context vectors, `K × d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ContextSet {
    dim: usize,
    data: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for ContextSet {
    type Error = DesignError;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        ContextSet::new(v)
    }
}

impl From<ContextSet> for Vec<Vec<f64>> {
    fn from(c: ContextSet) -> Self {
        c.rows().map(|r| r.to_vec()).collect()
    }
}

impl ContextSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, DesignError> {
        let dim = vectors.first().ok_or(DesignError::EmptySet)?.len();
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in &vectors {
            if v.len() != dim {
                return Err(DesignError::Ragged);
            }
            data.extend_from_slice(v);
        }
        Self::from_flat(dim, data)
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self, DesignError> {
        if dim == 0 || data.is_empty() {
            return Err(DesignError::EmptySet);
        }
        if data.len() % dim != 0 {
            return Err(DesignError::Ragged);
        }
        let set = ContextSet { dim, data };
        for (i, r) in set.rows().enumerate() {
            let n = norm(r);
            if !(n <= 1.0 + NORM_SLACK) {
                return Err(DesignError::NormViolation { index: i, norm: n });
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// The vectors at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> ContextSet {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        ContextSet {
            dim: self.dim,
            data,
        }
    }

    fn key(&self) -> SetKey {
        SetKey {
            dim: self.dim,
            bits: self.data.iter().map(|v| v.to_bits()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SetKey {
    dim: usize,
    bits: Vec<u64>,
}

/// Probability weights over the points of one context set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub weights: Vec<f64>,
}

impl Design {
    pub fn uniform(k: usize) -> Self {
        Design {
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, i: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[i] = 1.0;
        Design { weights }
    }

    /// `Σ wᵢ xᵢ xᵢᵀ`.
    pub fn info_matrix(&self, set: &ContextSet) -> PsdMatrix {
        let mut q = PsdMatrix::zeros(set.dim());
        self.accumulate_info(set, 1.0, &mut q);
        q
    }

    /// `acc += scale · Σ wᵢ xᵢ xᵢᵀ`.
    pub fn accumulate_info(&self, set: &ContextSet, scale: f64, acc: &mut PsdMatrix) {
        for (w, x) in self.weights.iter().zip(set.rows()) {
            if *w > 0.0 {
                acc.add_outer(x, scale * w);
            }
        }
    }

    /// Index drawn by inverting the CDF at one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.invert_cdf(u)
    }

    pub fn invert_cdf(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

/// Solver settings for the Frank–Wolfe G-optimal design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GOptimalConfig {
    pub jitter: f64,
    pub tol_factor: f64,
    pub max_iter: usize,
}

impl Default for GOptimalConfig {
    fn default() -> Self {
        GOptimalConfig {
            jitter: 1e-9,
            tol_factor: 2.0,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GOptimalOutcome {
    pub design: Design,
    pub max_variance: f64,
    pub iterations: usize,
}

/// `max_x xᵀ(Σ wᵢxᵢxᵢᵀ + jitter·I)⁻¹x` and its argmax.
pub fn max_variance(set: &ContextSet, design: &Design, jitter: f64) -> Result<(f64, usize), DesignError> {
    let chol = Cholesky::factor(&design.info_matrix(set), jitter)?;
    Ok(max_quad(&chol, set))
}

fn max_quad(chol: &Cholesky, set: &ContextSet) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, x) in set.rows().enumerate() {
        let v = chol.quad_form(x);
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// Frank–Wolfe from uniform weights, with the exact line-search step toward
/// the current max-variance point.
pub fn solve_g_optimal(set: &ContextSet, cfg: &GOptimalConfig) -> Result<GOptimalOutcome, DesignError> {
    let d = set.dim() as f64;
    let k = set.k();
    let target = cfg.tol_factor * d;
    let mut design = Design::uniform(k);
    let mut best = f64::INFINITY;
    for iter in 0..=cfg.max_iter {
        let (g, j) = max_variance(set, &design, cfg.jitter)?;
        best = best.min(g);
        if g <= target {
            return Ok(GOptimalOutcome {
                design,
                max_variance: g,
                iterations: iter,
            });
        }
        if iter == cfg.max_iter {
            break;
        }
        let step = (g / d - 1.0) / (g - 1.0);
        if !(step > 0.0 && step <= 1.0) {
            break;
        }
        for w in design.weights.iter_mut() {
            *w *= 1.0 - step;
        }
        design.weights[j] += step;
    }
    Err(DesignError::DidNotConverge { best })
}

pub fn g_optimal_design(
    set: &ContextSet,
    jitter: f64,
    tol_factor: f64,
    max_iter: usize,
) -> Result<Design, DesignError> {
    let cfg = GOptimalConfig {
        jitter,
        tol_factor,
        max_iter,
    };
    Ok(solve_g_optimal(set, &cfg)?.design)
}

const MEMO_CAPACITY: usize = 1 << 18;

/// G-optimal solver with a content-keyed memo, one per run.
#[derive(Debug, Default)]
pub struct GOptimalSolver {
    cfg: GOptimalConfig,
    memo: Mutex<HashMap<SetKey, Arc<Design>>>,
}

impl GOptimalSolver {
    pub fn new(cfg: GOptimalConfig) -> Self {
        GOptimalSolver {
            cfg,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &GOptimalConfig {
        &self.cfg
    }

    /// Drops every memoized design.
    pub fn clear(&self) {
        self.memo.lock().unwrap().clear();
    }

    pub fn design(&self, set: &ContextSet) -> Result<Arc<Design>, DesignError> {
        if set.k() == 1 {
            return Ok(Arc::new(Design::point_mass(1, 0)));
        }
        let key = set.key();
        if let Some(d) = self.memo.lock().unwrap().get(&key) {
            return Ok(Arc::clone(d));
        }
        let design = Arc::new(solve_g_optimal(set, &self.cfg)?.design);
        let mut memo = self.memo.lock().unwrap();
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        memo.insert(key, Arc::clone(&design));
        Ok(design)
    }
}

/// A map from context sets to distributions over their points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePolicy {
    Uniform,
    GOptimal,
    Argmax { matrix: PsdMatrix },
    Softmax { matrix: PsdMatrix, alpha: f64 },
    Mixed { components: Vec<MixedComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedComponent {
    pub weight: f64,
    pub policy: SamplePolicy,
}

impl SamplePolicy {
    pub fn mixed(components: Vec<(f64, SamplePolicy)>) -> Self {
        SamplePolicy::Mixed {
            components: components
                .into_iter()
                .map(|(weight, policy)| MixedComponent { weight, policy })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        match self {
            SamplePolicy::Softmax { alpha, .. } if !(*alpha >= 0.0) => Err(
                DesignError::InvalidPolicy(format!("softmax alpha {alpha} is negative")),
            ),
            SamplePolicy::Mixed { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight >= 0.0)) || (total - 1.0).abs() > 1e-10 {
                    return Err(DesignError::InvalidPolicy(format!(
                        "mixture weights must be nonnegative and sum to 1 (sum {total})"
                    )));
                }
                components.iter().try_for_each(|c| c.policy.validate())
            }
            _ => Ok(()),
        }
    }
}

/// Lowest index attaining the maximum score.
pub fn argmax_index(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Weights ∝ `s_i^α`, computed in log space; uniform when every score is zero.
pub fn softmax_weights(scores: &[f64], alpha: f64) -> Vec<f64> {
    let smax = scores.iter().cloned().fold(0.0f64, f64::max);
    if smax <= 0.0 {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let lmax = smax.ln();
    let mut w: Vec<f64> = scores
        .iter()
        .map(|&s| (alpha * (s.max(1e-300).ln() - lmax)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn check_dim(m: &PsdMatrix, set: &ContextSet) -> Result<(), DesignError> {
    if m.dim() != set.dim() {
        return Err(DesignError::DimensionMismatch {
            expected: set.dim(),
            found: m.dim(),
        });
    }
    Ok(())
}

/// Exact probability weights of `policy` on `set`.
pub fn policy_distribution(
    policy: &SamplePolicy,
    set: &ContextSet,
    solver: &GOptimalSolver,
) -> Result<Design, DesignError> {
    let k = set.k();
    match policy {
        SamplePolicy::Uniform => Ok(Design::uniform(k)),
        SamplePolicy::GOptimal => Ok((*solver.design(set)?).clone()),
        SamplePolicy::Argmax { matrix } => {
            check_dim(matrix, set)?;
            let scores: Vec<f64> = set.rows().map(|x| matrix.bilinear(x)).collect();
            Ok(Design::point_mass(k, argmax_index(&scores)))
        }
        SamplePolicy::Softmax { matrix, alpha } => {
            check_dim(matrix, set)?;
            let scores: Vec<f64> = set.rows().map(|x| matrix.bilinear(x)).collect();
            Ok(Design {
                weights: softmax_weights(&scores, *alpha),
            })
        }
        SamplePolicy::Mixed { components } => {
            let mut weights = vec![0.0; k];
            for c in components {
                if c.weight == 0.0 {
                    continue;
                }
                let inner = policy_distribution(&c.policy, set, solver)?;
                for (w, v) in weights.iter_mut().zip(&inner.weights) {
                    *w += c.weight * v;
                }
            }
            Ok(Design { weights })
        }
    }
}

pub fn draw_arm<R: Rng + ?Sized>(
    policy: &SamplePolicy,
    set: &ContextSet,
    solver: &GOptimalSolver,
    rng: &mut R,
) -> Result<usize, DesignError> {
    Ok(policy_distribution(policy, set, solver)?.sample(rng))
}

/// `Q_X(π) = Σ wᵢ xᵢ xᵢᵀ`.
pub fn policy_info_matrix(
    policy: &SamplePolicy,
    set: &ContextSet,
    solver: &GOptimalSolver,
) -> Result<PsdMatrix, DesignError> {
    Ok(policy_distribution(policy, set, solver)?.info_matrix(set))
}

/// Per-sample `max_x xᵀ(λI + Q̂)⁻¹x` where `Q̂` is the weighted mean information matrix.
fn per_sample_max_quad(
    samples: &[(&ContextSet, f64)],
    policy: &SamplePolicy,
    lambda: f64,
    solver: &GOptimalSolver,
) -> Result<Vec<f64>, DesignError> {
    let first = samples.first().ok_or(DesignError::NoSamples)?;
    let d = first.0.dim();
    let total: f64 = samples.iter().map(|s| s.1).sum();
    let mut q = PsdMatrix::zeros(d);
    for (set, w) in samples {
        policy_distribution(policy, set, solver)?.accumulate_info(set, w / total, &mut q);
    }
    let chol = Cholesky::factor(&q, lambda)?;
    Ok(samples.iter().map(|(set, _)| max_quad(&chol, set).0).collect())
}

fn weighted_mean(values: &[f64], samples: &[(&ContextSet, f64)], f: impl Fn(f64) -> f64) -> f64 {
    let total: f64 = samples.iter().map(|s| s.1).sum();
    values
        .iter()
        .zip(samples)
        .map(|(v, s)| s.1 * f(*v))
        .sum::<f64>()
        / total
}

/// λ-variation of `policy` over the empirical distribution of `samples`.
pub fn empirical_variation(
    samples: &[ContextSet],
    policy: &SamplePolicy,
    lambda: f64,
    solver: &GOptimalSolver,
) -> Result<f64, DesignError> {
    let weighted: Vec<(&ContextSet, f64)> = samples.iter().map(|s| (s, 1.0)).collect();
    weighted_variation(&weighted, policy, lambda, solver)
}

/// λ-deviation: as [`empirical_variation`] with the square root inside the mean.
pub fn empirical_deviation(
    samples: &[ContextSet],
    policy: &SamplePolicy,
    lambda: f64,
    solver: &GOptimalSolver,
) -> Result<f64, DesignError> {
    let weighted: Vec<(&ContextSet, f64)> = samples.iter().map(|s| (s, 1.0)).collect();
    weighted_deviation(&weighted, policy, lambda, solver)
}

/// λ-variation over a weighted sample (weights need not be normalized).
pub fn weighted_variation(
    samples: &[(&ContextSet, f64)],
    policy: &SamplePolicy,
    lambda: f64,
    solver: &GOptimalSolver,
) -> Result<f64, DesignError> {
    let v = per_sample_max_quad(samples, policy, lambda, solver)?;
    Ok(weighted_mean(&v, samples, |x| x))
}

pub fn weighted_deviation(
    samples: &[(&ContextSet, f64)],
    policy: &SamplePolicy,
    lambda: f64,
    solver: &GOptimalSolver,
) -> Result<f64, DesignError> {
    let v = per_sample_max_quad(samples, policy, lambda, solver)?;
    Ok(weighted_mean(&v, samples, f64::sqrt))
}

/// Score of `x` under a quadratic form given through its Cholesky factor: `xᵀ(LLᵀ)⁻¹x`.
pub(crate) fn inverse_scores(chol: &Cholesky, set: &ContextSet, out: &mut Vec<f64>) {
    out.clear();
    out.extend(set.rows().map(|x| chol.quad_form(x)));
}
