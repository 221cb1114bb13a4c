//! Distributional G-optimal designs built from sample multisets, core
//! identification, and the core-based policy learner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{
    argmax_index, inverse_scores, softmax_weights, ContextSet, DesignError, GOptimalSolver,
    SamplePolicy,
};
use crate::matrix::{eigen_bounds, Cholesky, KernelError, PsdMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("every stage was shorter than the sample count; no components survive")]
    EmptyOutput,
    #[error("core identification exceeded its iteration cap {cap}")]
    IterationCap { cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sample list is empty")]
    NoSamples,
    #[error(transparent)]
    Design(#[from] DesignError),
}

impl From<KernelError> for DistError {
    fn from(e: KernelError) -> Self {
        DistError::Design(DesignError::Kernel(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Argmax,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignComponent {
    pub p: f64,
    pub matrix: PsdMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedDesignParams {
    pub flavor: Flavor,
    /// Softmax exponent used by the assembled policy.
    pub alpha: f64,
    pub components: Vec<DesignComponent>,
}

/// Facts about one trajectory, kept for diagnostics and tests.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub blocks: usize,
    pub steps: usize,
    /// Length of every stage before discarding, in order.
    pub stage_lengths: Vec<usize>,
    pub log_det_start: f64,
    pub log_det_end: f64,
    /// `ln det U_t` after each step, only when requested.
    pub log_det_path: Vec<f64>,
}

impl MixedDesignParams {
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.matrix.dim())
    }

    /// Structural bounds: `n ≤ 4d log₂ d`, `p_i ≥ 1/d³`, `d⁻¹I ≼ M_i ≼ λ⁻¹I`, `Σ p_i = 1`.
    pub fn violations(&self, lambda: f64) -> Vec<String> {
        let d = self.dim() as f64;
        let mut out = Vec::new();
        let n = self.components.len() as f64;
        if n > 4.0 * d * d.log2() {
            out.push(format!("{n} components exceed 4 d log2 d = {}", 4.0 * d * d.log2()));
        }
        let total: f64 = self.components.iter().map(|c| c.p).sum();
        if (total - 1.0).abs() > 1e-10 {
            out.push(format!("weights sum to {total}"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.p < 1.0 / (d * d * d) {
                out.push(format!("component {i}: p = {} < 1/d^3", c.p));
            }
            let (lo, hi) = eigen_bounds(&c.matrix);
            if lo < 1.0 / d - 1e-8 {
                out.push(format!("component {i}: min eigenvalue {lo} < 1/d"));
            }
            if hi > 1.0 / lambda + 1e-8 {
                out.push(format!("component {i}: max eigenvalue {hi} > 1/lambda"));
            }
        }
        out
    }
}

/// Number of passes over the samples: `⌈multiplier · 2d² · log₂ d⌉`, at least 1.
pub fn block_count(d: usize, block_multiplier: f64) -> usize {
    let d = d as f64;
    ((block_multiplier * 2.0 * d * d * d.log2()).ceil() as usize).max(1)
}

pub fn build_mixed_design(
    samples: &[ContextSet],
    lambda: f64,
    flavor: Flavor,
    k: usize,
    block_multiplier: f64,
    solver: &GOptimalSolver,
) -> Result<MixedDesignParams, DistError> {
    Ok(build_mixed_design_traced(samples, lambda, flavor, k, block_multiplier, solver, false)?.0)
}

/// Replays the stage trajectory: cycle the samples `N` times, grow `U_t` by
/// the selected outer product (argmax) or the softmax information matrix,
/// and open a new stage whenever `det U_t > 2 det W`.
pub fn build_mixed_design_traced(
    samples: &[ContextSet],
    lambda: f64,
    flavor: Flavor,
    k: usize,
    block_multiplier: f64,
    solver: &GOptimalSolver,
    record_path: bool,
) -> Result<(MixedDesignParams, Trajectory), DistError> {
    let first = samples.first().ok_or(DistError::NoSamples)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(DistError::Precondition(format!("lambda {lambda} not in (0, 1)")));
    }
    if !(block_multiplier > 0.0) {
        return Err(DistError::Precondition(format!(
            "block multiplier {block_multiplier} must be positive"
        )));
    }
    let d = first.dim();
    let gamma = samples.len();
    if (gamma as f64) <= 1.0 / lambda {
        log::warn!("sample count {gamma} does not exceed 1/lambda = {}", 1.0 / lambda);
    }
    let n_blocks = block_count(d, block_multiplier);
    let total_steps = n_blocks * gamma;
    let alpha = (k.max(1) as f64).ln();

    let mut u = PsdMatrix::scaled_identity(d, lambda * total_steps as f64);
    let half_n = n_blocks as f64 / 2.0;
    for set in samples {
        solver.design(set)?.accumulate_info(set, half_n, &mut u);
    }

    let mut chol_u = Cholesky::factor(&u, 0.0)?;
    let mut ld_u = chol_u.log_det();
    let mut w = u.clone();
    let mut chol_w = chol_u.clone();
    let mut ld_w = ld_u;
    let ln2 = std::f64::consts::LN_2;

    let mut traj = Trajectory {
        blocks: n_blocks,
        steps: total_steps,
        log_det_start: ld_u,
        ..Default::default()
    };
    if record_path {
        traj.log_det_path.reserve(total_steps);
    }
    let mut stages: Vec<(usize, PsdMatrix, Cholesky)> = Vec::new();
    let mut current = 0usize;
    let mut scores = Vec::new();
    // Within a stage the policy is fixed, so per-sample softmax weights repeat every block.
    let mut stage_weights: Vec<Option<Vec<f64>>> = vec![None; gamma];

    for t in 0..total_steps {
        let idx = t % gamma;
        let set = &samples[idx];
        match flavor {
            Flavor::Argmax => {
                inverse_scores(&chol_w, set, &mut scores);
                let x = set.row(argmax_index(&scores));
                u.add_outer(x, 1.0);
                chol_u.rank_one_update(x);
            }
            Flavor::Softmax => {
                let weights = stage_weights[idx].get_or_insert_with(|| {
                    inverse_scores(&chol_w, set, &mut scores);
                    softmax_weights(&scores, alpha)
                });
                for (wt, x) in weights.iter().zip(set.rows()) {
                    if *wt > 0.0 {
                        u.add_outer(x, *wt);
                    }
                }
                // A few rank-one updates beat a refactorization for small sets.
                if 3 * set.k() < d {
                    for (wt, x) in weights.iter().zip(set.rows()) {
                        if *wt > 0.0 {
                            let s = wt.sqrt();
                            let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
                            chol_u.rank_one_update(&scaled);
                        }
                    }
                } else {
                    chol_u = Cholesky::factor(&u, 0.0)?;
                }
            }
        }
        ld_u = chol_u.log_det();
        if record_path {
            traj.log_det_path.push(ld_u);
        }
        current += 1;
        if ld_u > ln2 + ld_w {
            stages.push((current, w, chol_w));
            w = u.clone();
            chol_w = chol_u.clone();
            ld_w = ld_u;
            current = 0;
            stage_weights.iter_mut().for_each(|s| *s = None);
        }
    }
    if current > 0 {
        stages.push((current, w, chol_w));
    }
    traj.log_det_end = ld_u;
    traj.stage_lengths = stages.iter().map(|s| s.0).collect();

    let survivors: Vec<&(usize, PsdMatrix, Cholesky)> =
        stages.iter().filter(|s| s.0 >= gamma).collect();
    if survivors.is_empty() {
        return Err(DistError::EmptyOutput);
    }
    let kept: usize = survivors.iter().map(|s| s.0).sum();
    let components = survivors
        .iter()
        .map(|(len, _, chol)| DesignComponent {
            p: *len as f64 / kept as f64,
            matrix: chol.inverse().scaled(total_steps as f64),
        })
        .collect();
    Ok((
        MixedDesignParams {
            flavor,
            alpha,
            components,
        },
        traj,
    ))
}

/// Half the mass on the G-optimal sampler, half spread over the components.
pub fn assemble_policy(params: &MixedDesignParams) -> SamplePolicy {
    let mut parts = vec![(0.5, SamplePolicy::GOptimal)];
    for c in &params.components {
        let policy = match params.flavor {
            Flavor::Argmax => SamplePolicy::Argmax {
                matrix: c.matrix.clone(),
            },
            Flavor::Softmax => SamplePolicy::Softmax {
                matrix: c.matrix.clone(),
                alpha: params.alpha,
            },
        };
        parts.push((0.5 * c.p, policy));
    }
    SamplePolicy::mixed(parts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreResult {
    pub kept_indices: Vec<usize>,
    pub iterations: usize,
}

/// `⌈3d · log₂(2/λ)⌉`.
pub fn core_iteration_cap(d: usize, lambda: f64) -> usize {
    (3.0 * d as f64 * (2.0 / lambda).log2()).ceil() as usize
}

/// Core identification over a weighted multiset: `items[i]` stands for
/// `counts[i]` copies of a set. The information matrix is normalized by
/// `gamma`, the size of the original sample, not by the size of the current core.
pub fn core_identification_weighted(
    items: &[&ContextSet],
    counts: &[f64],
    gamma: f64,
    lambda: f64,
    c: u32,
    solver: &GOptimalSolver,
) -> Result<(Vec<bool>, usize), DistError> {
    let first = items.first().ok_or(DistError::NoSamples)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(DistError::Precondition(format!("lambda {lambda} not in (0, 1)")));
    }
    let d = first.dim();
    let threshold = (d as f64).powi(c as i32);
    let cap = core_iteration_cap(d, lambda);
    let designs = items
        .iter()
        .map(|s| solver.design(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut kept = vec![true; items.len()];
    let mut values = vec![0.0; items.len()];
    let mut scores = Vec::new();
    for iteration in 1..=cap {
        let mut q = PsdMatrix::zeros(d);
        for i in 0..items.len() {
            if kept[i] {
                designs[i].accumulate_info(items[i], counts[i] / gamma, &mut q);
            }
        }
        let chol = Cholesky::factor(&q, lambda)?;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..items.len() {
            if kept[i] {
                inverse_scores(&chol, items[i], &mut scores);
                values[i] = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(values[i]);
            }
        }
        if worst <= threshold {
            return Ok((kept, iteration));
        }
        for i in 0..items.len() {
            if kept[i] && values[i] > 0.5 * threshold {
                kept[i] = false;
            }
        }
    }
    Err(DistError::IterationCap { cap })
}

pub fn core_identification(
    samples: &[ContextSet],
    lambda: f64,
    c: u32,
    solver: &GOptimalSolver,
) -> Result<CoreResult, DistError> {
    let items: Vec<&ContextSet> = samples.iter().collect();
    let counts = vec![1.0; samples.len()];
    let gamma = samples.len() as f64;
    let (kept, iterations) = core_identification_weighted(&items, &counts, gamma, lambda, c, solver)?;
    Ok(CoreResult {
        kept_indices: kept
            .iter()
            .enumerate()
            .filter_map(|(i, k)| k.then_some(i))
            .collect(),
        iterations,
    })
}

/// Exponent of the core threshold `d^c`.
pub const CORE_EXPONENT: u32 = 6;

/// Core identification, then a softmax-flavored mixed design on the core.
/// Requires `λ ∈ (e^{-d}, 1)`.
pub fn core_learning(
    samples: &[ContextSet],
    lambda: f64,
    k: usize,
    block_multiplier: f64,
    solver: &GOptimalSolver,
) -> Result<SamplePolicy, DistError> {
    let d = samples.first().ok_or(DistError::NoSamples)?.dim();
    let lo = (-(d as f64)).exp();
    if !(lambda > lo && lambda < 1.0) {
        return Err(DistError::Precondition(format!(
            "lambda {lambda} not in (exp(-d), 1) = ({lo}, 1)"
        )));
    }
    core_learning_unchecked(samples, lambda, k, block_multiplier, solver)
}

/// [`core_learning`] without the `λ > e^{-d}` requirement.
pub fn core_learning_unchecked(
    samples: &[ContextSet],
    lambda: f64,
    k: usize,
    block_multiplier: f64,
    solver: &GOptimalSolver,
) -> Result<SamplePolicy, DistError> {
    let core = core_identification(samples, lambda, CORE_EXPONENT, solver)?;
    let kept: Vec<ContextSet> = core
        .kept_indices
        .iter()
        .map(|&i| samples[i].clone())
        .collect();
    if kept.is_empty() {
        return Err(DistError::EmptyOutput);
    }
    let params = build_mixed_design(&kept, lambda, Flavor::Softmax, k, block_multiplier, solver)?;
    Ok(assemble_policy(&params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{empirical_deviation, empirical_variation, policy_distribution, Design, GOptimalConfig};
    use crate::matrix::norm;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(d: usize) -> ContextSet {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        ContextSet::from_flat(d, data).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, d: usize, k: usize) -> ContextSet {
        let mut data = Vec::with_capacity(d * k);
        for _ in 0..k {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = norm(&v).max(1.0);
            data.extend(v.iter().map(|x| x / n));
        }
        ContextSet::from_flat(d, data).unwrap()
    }

    fn solver() -> GOptimalSolver {
        GOptimalSolver::new(GOptimalConfig::default())
    }

    #[test]
    fn block_counts() {
        assert_eq!(block_count(4, 1.0), 64);
        assert_eq!(block_count(16, 1.0), 2048);
        assert_eq!(block_count(1, 1.0), 1);
    }

    #[test]
    fn single_basis_set_structure() {
        let s = solver();
        for flavor in [Flavor::Argmax, Flavor::Softmax] {
            let p = build_mixed_design(&[basis(4)], 0.1, flavor, 4, 1.0, &s).unwrap();
            let total: f64 = p.components.iter().map(|c| c.p).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(p.components.len() <= 32);
            assert!(p.violations(0.1).is_empty(), "{:?}", p.violations(0.1));
        }
    }

    #[test]
    fn determinant_path_is_monotone_and_stage_count_bounded() {
        let s = solver();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 4;
        let samples: Vec<ContextSet> = (0..12).map(|_| random_set(&mut rng, d, 5)).collect();
        for flavor in [Flavor::Argmax, Flavor::Softmax] {
            let (_, tr) = build_mixed_design_traced(&samples, 0.1, flavor, 5, 1.0, &s, true).unwrap();
            let mut prev = tr.log_det_start;
            for &v in &tr.log_det_path {
                assert!(v >= prev - 1e-9);
                prev = v;
            }
            let stages = tr.stage_lengths.len() as f64;
            let ln2 = std::f64::consts::LN_2;
            assert!(stages <= (tr.log_det_end - tr.log_det_start) / ln2 + 1.0);
            assert!(stages <= 4.0 * d as f64 * (d as f64).log2() + 1.0);
        }
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let s = solver();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let samples: Vec<ContextSet> = (0..10).map(|_| random_set(&mut rng, 3, 4)).collect();
        for flavor in [Flavor::Argmax, Flavor::Softmax] {
            let a = build_mixed_design(&samples, 0.2, flavor, 4, 1.0, &s).unwrap();
            let b = build_mixed_design(&samples, 0.2, flavor, 4, 1.0, &solver()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mixed_variation_is_order_d_log_d() {
        let s = solver();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = 6;
        let lambda = 0.05;
        let samples: Vec<ContextSet> = (0..50).map(|_| random_set(&mut rng, d, 8)).collect();
        for flavor in [Flavor::Argmax, Flavor::Softmax] {
            let p = build_mixed_design(&samples, lambda, flavor, 8, 1.0, &s).unwrap();
            let v = empirical_variation(&samples, &assemble_policy(&p), lambda, &s).unwrap();
            assert!(v <= 30.0 * d as f64 * (d as f64).log2(), "{flavor:?}: {v}");
        }
    }

    #[test]
    fn assembled_weights() {
        let one = MixedDesignParams {
            flavor: Flavor::Argmax,
            alpha: 0.0,
            components: vec![DesignComponent { p: 1.0, matrix: PsdMatrix::identity(2) }],
        };
        let SamplePolicy::Mixed { components } = assemble_policy(&one) else { panic!() };
        assert_eq!(components.iter().map(|c| c.weight).collect::<Vec<_>>(), vec![0.5, 0.5]);
        let two = MixedDesignParams {
            flavor: Flavor::Softmax,
            alpha: 1.0,
            components: vec![
                DesignComponent { p: 0.5, matrix: PsdMatrix::identity(2) },
                DesignComponent { p: 0.5, matrix: PsdMatrix::diagonal(&[2.0, 1.0]) },
            ],
        };
        let SamplePolicy::Mixed { components } = assemble_policy(&two) else { panic!() };
        assert_eq!(components.iter().map(|c| c.weight).collect::<Vec<_>>(), vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn assembled_distribution_is_mixture() {
        let s = solver();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let samples: Vec<ContextSet> = (0..8).map(|_| random_set(&mut rng, 3, 5)).collect();
        let p = build_mixed_design(&samples, 0.2, Flavor::Softmax, 5, 1.0, &s).unwrap();
        let policy = assemble_policy(&p);
        for x in &samples {
            let got = policy_distribution(&policy, x, &s).unwrap();
            let g = s.design(x).unwrap();
            let mut want: Vec<f64> = g.weights.iter().map(|w| 0.5 * w).collect();
            for c in &p.components {
                let scores: Vec<f64> = x.rows().map(|r| c.matrix.bilinear(r)).collect();
                let inner = Design { weights: softmax_weights(&scores, p.alpha) };
                for (w, v) in want.iter_mut().zip(&inner.weights) {
                    *w += 0.5 * c.p * v;
                }
            }
            for (a, b) in got.weights.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn core_keeps_all_basis_copies_after_first_check() {
        let s = solver();
        let samples = vec![basis(3); 20];
        let core = core_identification(&samples, 0.1, 6, &s).unwrap();
        assert_eq!(core.kept_indices, (0..20).collect::<Vec<_>>());
        assert_eq!(core.iterations, 1);
    }

    fn explicit_certificate(samples: &[ContextSet], kept: &[usize], gamma: f64, lambda: f64, c: u32, s: &GOptimalSolver) -> bool {
        let d = samples[0].dim();
        let mut q = DMatrix::<f64>::identity(d, d) * lambda;
        for &i in kept {
            let w = s.design(&samples[i]).unwrap();
            for (wi, x) in w.weights.iter().zip(samples[i].rows()) {
                let v = DVector::from_row_slice(x);
                q += (*wi / gamma) * &v * v.transpose();
            }
        }
        let inv = q.try_inverse().unwrap();
        kept.iter().all(|&i| {
            samples[i].rows().all(|x| {
                let v = DVector::from_row_slice(x);
                (v.transpose() * &inv * &v)[(0, 0)] <= (d as f64).powi(c as i32)
            })
        })
    }

    #[test]
    fn core_prunes_lonely_direction() {
        // A rare set pointing along an otherwise unexplored direction.
        let s = solver();
        let d = 3;
        let mut samples = vec![ContextSet::new(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap(); 2000];
        samples.push(ContextSet::new(vec![vec![1.0, 0.0, 0.0]]).unwrap());
        let lambda = 1e-6;
        let c = 2;
        let core = core_identification(&samples, lambda, c, &s).unwrap();
        assert!(!core.kept_indices.contains(&2000));
        assert_eq!(core.kept_indices.len(), 2000);
        assert!(core.iterations <= core_iteration_cap(d, lambda));
        assert!(explicit_certificate(&samples, &core.kept_indices, samples.len() as f64, lambda, c, &s));
    }

    #[test]
    fn core_learning_rejects_lambda_out_of_range() {
        let s = solver();
        let samples = vec![basis(3); 4];
        assert!(matches!(core_learning(&samples, 1e-3, 3, 1.0, &s), Err(DistError::Precondition(_))));
        assert!(matches!(core_learning(&samples, 1.0, 3, 1.0, &s), Err(DistError::Precondition(_))));
    }

    #[test]
    fn core_learning_on_basis_sets_is_competitive_with_uniform() {
        let s = solver();
        let samples = vec![basis(3); 20];
        let lambda = 0.1;
        let policy = core_learning(&samples, lambda, 3, 1.0, &s).unwrap();
        policy.validate().unwrap();
        let got = empirical_deviation(&samples, &policy, lambda, &s).unwrap();
        let base = empirical_deviation(&samples, &SamplePolicy::Uniform, lambda, &s).unwrap();
        assert!(got <= 1.5 * base);
    }

    #[test]
    fn params_json_round_trip() {
        let s = solver();
        let p = build_mixed_design(&[basis(3)], 0.1, Flavor::Argmax, 3, 1.0, &s).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: MixedDesignParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn core_certificate_kept_fraction_and_idempotence(seed in 0u64..10_000, d in 2usize..5, n in 5usize..40) {
            let s = solver();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<ContextSet> = (0..n).map(|_| {
                let k = rng.random_range(1..4);
                random_set(&mut rng, d, k)
            }).collect();
            let lambda = 10f64.powf(-rng.random_range(1.0..6.0));
            let c = 2;
            let core = core_identification(&samples, lambda, c, &s).unwrap();
            prop_assert!(core.iterations <= core_iteration_cap(d, lambda));
            prop_assert!(explicit_certificate(&samples, &core.kept_indices, n as f64, lambda, c, &s));
            let frac = core.kept_indices.len() as f64 / n as f64;
            let bound = 1.0 - 2.0 * (d as f64).powi(2 - c as i32) * core.iterations as f64;
            prop_assert!(frac >= bound);
            // Idempotence: rerun on the kept sets with the same γ.
            let items: Vec<&ContextSet> = core.kept_indices.iter().map(|&i| &samples[i]).collect();
            if !items.is_empty() {
                let counts = vec![1.0; items.len()];
                let (again, _) = core_identification_weighted(&items, &counts, n as f64, lambda, c, &s).unwrap();
                prop_assert!(again.iter().all(|k| *k));
            }
        }
    }
}
