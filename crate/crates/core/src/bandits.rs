//! Ridge estimation, confidence widths, arm elimination and the learners.
//!
//! Learners interact with the world only through [`Session`], which hands
//! out context sets, returns noisy rewards, and meters regret against the
//! hidden parameter without exposing it.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{
    policy_distribution, solve_g_optimal, ContextSet, Design, DesignError, GOptimalConfig,
    GOptimalSolver, SamplePolicy,
};
use crate::dist_design::{core_learning_unchecked, DistError};
use crate::env::{EnvError, Environment};
use crate::matrix::{dot, Cholesky, KernelError, PsdMatrix};
use crate::rng::{step_rng, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Regularized least-squares state `Λ = λI + Σ xxᵀ`, `ξ = Σ r x`.
#[derive(Debug, Clone)]
pub struct RidgeState {
    lambda: f64,
    matrix: PsdMatrix,
    chol: Cholesky,
    xi: Vec<f64>,
    count: usize,
}

impl RidgeState {
    pub fn new(d: usize, lambda: f64) -> Result<Self, BanditError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(BanditError::Precondition(format!(
                "ridge regularizer must be positive, got {lambda}"
            )));
        }
        let matrix = PsdMatrix::scaled_identity(d, lambda);
        let chol = Cholesky::factor_exact(&matrix, 0.0)?;
        Ok(RidgeState {
            lambda,
            matrix,
            chol,
            xi: vec![0.0; d],
            count: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &PsdMatrix {
        &self.matrix
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn update(&mut self, x: &[f64], r: f64) -> Result<(), BanditError> {
        if x.len() != self.dim() {
            return Err(DesignError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            }
            .into());
        }
        self.matrix.add_outer(x, 1.0);
        self.chol.rank_one_update(x);
        for (v, xi) in self.xi.iter_mut().zip(x) {
            *v += r * xi;
        }
        self.count += 1;
        Ok(())
    }

    pub fn estimate(&self) -> Vec<f64> {
        self.chol.solve(&self.xi)
    }

    pub fn width(&self, x: &[f64], alpha: f64) -> f64 {
        alpha * self.chol.quad_form(x).max(0.0).sqrt()
    }

    pub fn log_det(&self) -> f64 {
        self.chol.log_det()
    }
}

pub fn ridge_update(mut s: RidgeState, x: &[f64], r: f64) -> Result<RidgeState, BanditError> {
    s.update(x, r)?;
    Ok(s)
}

pub fn ridge_estimate(s: &RidgeState) -> Vec<f64> {
    s.estimate()
}

/// `α √(xᵀΛ⁻¹x)`.
pub fn confidence_width(s: &RidgeState, x: &[f64], alpha: f64) -> f64 {
    s.width(x, alpha)
}

/// A frozen estimate with its confidence scale.
#[derive(Debug, Clone)]
pub struct Estimator {
    theta: Vec<f64>,
    chol: Cholesky,
    alpha: f64,
}

impl Estimator {
    pub fn from_ridge(s: &RidgeState, alpha: f64) -> Self {
        Estimator {
            theta: s.estimate(),
            chol: s.chol.clone(),
            alpha,
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Predicted reward and confidence width for `x`.
    pub fn score(&self, x: &[f64]) -> (f64, f64) {
        (
            dot(x, &self.theta),
            self.alpha * self.chol.quad_form(x).max(0.0).sqrt(),
        )
    }

    fn hash_into(&self, h: &mut DefaultHasher) {
        for v in self.theta.iter().chain(self.chol.lower()) {
            v.to_bits().hash(h);
        }
        self.alpha.to_bits().hash(h);
    }
}

/// Keeps `i` when `r̂ᵢ + ωᵢ ≥ max_j (r̂ⱼ − ωⱼ)` over the survivors.
/// `rhat` and `omega` are indexed by arm.
pub fn eliminate(survivors: &[usize], rhat: &[f64], omega: &[f64]) -> Vec<usize> {
    debug_assert!(!survivors.is_empty());
    let floor = survivors
        .iter()
        .map(|&j| rhat[j] - omega[j])
        .fold(f64::NEG_INFINITY, f64::max);
    survivors
        .iter()
        .copied()
        .filter(|&i| rhat[i] + omega[i] >= floor)
        .collect()
}

/// Runs every estimator's elimination in order, starting from all arms.
pub fn cascade(estimators: &[Estimator], set: &ContextSet) -> Vec<usize> {
    let mut survivors: Vec<usize> = (0..set.k()).collect();
    let mut rhat = vec![0.0; set.k()];
    let mut omega = vec![0.0; set.k()];
    for est in estimators {
        if survivors.len() == 1 {
            break;
        }
        survivors = eliminate_with(est, set, &survivors, &mut rhat, &mut omega);
    }
    survivors
}

fn eliminate_with(
    est: &Estimator,
    set: &ContextSet,
    survivors: &[usize],
    rhat: &mut [f64],
    omega: &mut [f64],
) -> Vec<usize> {
    for &i in survivors {
        let (r, w) = est.score(set.row(i));
        rhat[i] = r;
        omega[i] = w;
    }
    eliminate(survivors, rhat, omega)
}

/// `⌈v⌉`, except values within float noise of an integer snap to it.
fn ceil_snap(v: f64) -> usize {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// `⌈log₂ log₂ T⌉`, at least 1.
pub fn loglog_batches(horizon: usize) -> usize {
    let v = (horizon as f64).log2().log2();
    if v <= 0.0 {
        1
    } else {
        ceil_snap(v).max(1)
    }
}

fn finish_grid(raw: impl IntoIterator<Item = usize>, horizon: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = Vec::new();
    for v in raw {
        let v = v.clamp(1, horizon);
        if grid.last().is_none_or(|&last| v > last) {
            grid.push(v);
        }
    }
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

/// Batch ends `T_i = ⌈T^{1−2^{−i}}⌉` for `i < M`, then `T`.
pub fn batch_grid(horizon: usize) -> Vec<usize> {
    let m = loglog_batches(horizon);
    let t = horizon as f64;
    finish_grid(
        (1..m).map(|i| ceil_snap(t.powf(1.0 - 0.5f64.powi(i as i32)))),
        horizon,
    )
}

/// Batch ends `⌈√T⌉, ⌈2√T⌉, ⌈T^{1−2^{−(i−1)}}⌉ (3 ≤ i < M), T` with one
/// more batch than [`batch_grid`].
pub fn dg_grid(horizon: usize) -> Vec<usize> {
    let m = loglog_batches(horizon) + 1;
    let t = horizon as f64;
    let mut raw = vec![ceil_snap(t.sqrt()), ceil_snap(2.0 * t.sqrt())];
    raw.extend((3..m).map(|i| ceil_snap(t.powf(1.0 - 0.5f64.powi(i as i32 - 1)))));
    raw.truncate(m.saturating_sub(1));
    finish_grid(raw, horizon)
}

/// One metered step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub arm: usize,
    pub regret: f64,
    pub batch: usize,
    pub switches: usize,
    /// Hash of the policy state in force at this step.
    pub fingerprint: u64,
    pub layer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRecord {
    pub algo: String,
    pub steps: Vec<StepRecord>,
    /// Survived arm sets per step, when tracing was requested.
    pub survivors: Option<Vec<Vec<usize>>>,
    pub total_regret: f64,
    pub batches: usize,
    pub switches: usize,
}

impl LearnerRecord {
    pub fn cumulative_regret(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += s.regret;
                acc
            })
            .collect()
    }
}

/// Policy state attached to a played step.
#[derive(Debug, Clone, Copy)]
pub struct StepTag {
    pub batch: usize,
    pub fingerprint: u64,
    pub layer: Option<usize>,
}

/// The learner's view of an environment over `horizon` steps.
pub struct Session<'a> {
    env: &'a Environment,
    horizon: usize,
    t: usize,
    current: Option<ContextSet>,
    switches: usize,
    record: LearnerRecord,
}

impl<'a> Session<'a> {
    pub fn new(
        env: &'a Environment,
        horizon: usize,
        algo: &str,
        trace_survivors: bool,
    ) -> Result<Self, BanditError> {
        if horizon > env.horizon() {
            return Err(EnvError::StepOutOfRange {
                t: horizon,
                horizon: env.horizon(),
            }
            .into());
        }
        Ok(Session {
            env,
            horizon,
            t: 0,
            current: None,
            switches: 0,
            record: LearnerRecord {
                algo: algo.to_string(),
                steps: Vec::with_capacity(horizon),
                survivors: trace_survivors.then(Vec::new),
                total_regret: 0.0,
                batches: 0,
                switches: 0,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.env.dim()
    }

    pub fn num_arms(&self) -> usize {
        self.env.num_arms()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Steps played so far.
    pub fn played(&self) -> usize {
        self.t
    }

    /// Context set of the next step.
    pub fn observe(&mut self) -> Result<ContextSet, BanditError> {
        if self.t >= self.horizon {
            return Err(EnvError::StepOutOfRange {
                t: self.t + 1,
                horizon: self.horizon,
            }
            .into());
        }
        let set = self.env.contexts(self.t + 1)?;
        self.current = Some(set.clone());
        Ok(set)
    }

    pub fn switch(&mut self) {
        self.switches += 1;
    }

    pub fn switches(&self) -> usize {
        self.switches
    }

    /// Plays `arm` on the observed set and returns the noisy reward.
    pub fn play(&mut self, arm: usize, tag: StepTag, survivors: &[usize]) -> Result<f64, BanditError> {
        let set = self
            .current
            .take()
            .ok_or_else(|| BanditError::Precondition("play called before observe".into()))?;
        let (mean, regret) = self.env.mean_and_regret(&set, arm)?;
        self.t += 1;
        let mut rng = step_rng(self.env.noise_seed, Stream::Noise, self.t as u64);
        let reward = mean + self.env.noise.draw(&mut rng);
        self.record.total_regret += regret;
        self.record.steps.push(StepRecord {
            t: self.t,
            arm,
            regret,
            batch: tag.batch,
            switches: self.switches,
            fingerprint: tag.fingerprint,
            layer: tag.layer,
        });
        if let Some(trace) = self.record.survivors.as_mut() {
            trace.push(survivors.to_vec());
        }
        Ok(reward)
    }

    pub fn finish(mut self, batches: usize) -> LearnerRecord {
        self.record.batches = batches;
        self.record.switches = self.switches;
        self.record
    }
}

/// Replacements for the conservative confidence constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceOverride {
    /// Width multiplier of the elimination rounds and of layers `κ ≥ 1`.
    pub alpha: Option<f64>,
    /// Width multiplier of layer 0.
    pub alpha0: Option<f64>,
    /// Ridge regularizer of the batch learners.
    pub lambda_reg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub delta: f64,
    pub confidence: ConfidenceOverride,
    pub g_optimal: GOptimalConfig,
    pub block_multiplier: f64,
    /// Determinant growth factor that triggers a snapshot.
    pub switch_factor: f64,
    pub trace_survivors: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            delta: 0.05,
            confidence: ConfidenceOverride::default(),
            g_optimal: GOptimalConfig::default(),
            block_multiplier: 1.0,
            switch_factor: 2.0,
            trace_survivors: false,
        }
    }
}

impl LearnerConfig {
    fn check(&self) -> Result<(), BanditError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BanditError::Precondition(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// `10 √ln(2dKT/δ)` unless overridden.
    pub fn elimination_alpha(&self, d: usize, k: usize, horizon: usize) -> f64 {
        self.confidence.alpha.unwrap_or_else(|| {
            10.0 * (2.0 * d as f64 * k as f64 * horizon as f64 / self.delta).ln().sqrt()
        })
    }

    /// `2 √(d ln(2T/δ))` unless overridden.
    pub fn layer_zero_alpha(&self, d: usize, horizon: usize) -> f64 {
        self.confidence.alpha0.unwrap_or_else(|| {
            2.0 * (d as f64 * (2.0 * horizon as f64 / self.delta).ln()).sqrt()
        })
    }

    /// `factor · ln(2dT/δ)` unless overridden.
    pub fn ridge_lambda(&self, factor: f64, d: usize, horizon: usize) -> f64 {
        self.confidence
            .lambda_reg
            .unwrap_or_else(|| factor * (2.0 * d as f64 * horizon as f64 / self.delta).ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerMode {
    Uniform,
    GOptimal,
}

fn fingerprint(estimators: &[Estimator], extra: &str) -> u64 {
    let mut h = DefaultHasher::new();
    estimators.len().hash(&mut h);
    for e in estimators {
        e.hash_into(&mut h);
    }
    extra.hash(&mut h);
    h.finish()
}

fn batch_starts(grid: &[usize]) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    grid.iter()
        .enumerate()
        .map(|(k, &end)| (k + 1, if k == 0 { 0 } else { grid[k - 1] }, end))
}

/// Batched elimination with uniform or G-optimal sampling over the
/// survivors; one ridge estimate per batch.
pub fn run_batch_elimination<R: Rng + ?Sized>(
    env: &Environment,
    horizon: usize,
    mode: SamplerMode,
    cfg: &LearnerConfig,
    rng: &mut R,
) -> Result<LearnerRecord, BanditError> {
    cfg.check()?;
    if horizon < 4 {
        return Err(BanditError::Precondition(format!("horizon {horizon} < 4")));
    }
    let name = match mode {
        SamplerMode::Uniform => "BatchLinUCB",
        SamplerMode::GOptimal => "BatchLinUCB-KW",
    };
    let mut session = Session::new(env, horizon, name, cfg.trace_survivors)?;
    let d = session.dim();
    let alpha = cfg.elimination_alpha(d, session.num_arms(), horizon);
    let lambda = cfg.ridge_lambda(16.0, d, horizon);
    let grid = batch_grid(horizon);
    let mut estimators: Vec<Estimator> = Vec::with_capacity(grid.len());

    for (batch, start, end) in batch_starts(&grid) {
        session.switch();
        let tag = StepTag {
            batch,
            fingerprint: fingerprint(&estimators, name),
            layer: None,
        };
        let mut ridge = RidgeState::new(d, lambda)?;
        for _ in start..end {
            let set = session.observe()?;
            let survivors = cascade(&estimators, &set);
            let arm = if survivors.len() == 1 {
                survivors[0]
            } else {
                match mode {
                    SamplerMode::Uniform => survivors[rng.random_range(0..survivors.len())],
                    SamplerMode::GOptimal => {
                        let design = solve_g_optimal(&set.subset(&survivors), &cfg.g_optimal)?.design;
                        survivors[design.sample(rng)]
                    }
                }
            };
            let reward = session.play(arm, tag, &survivors)?;
            ridge.update(set.row(arm), reward)?;
        }
        if batch < grid.len() {
            estimators.push(Estimator::from_ridge(&ridge, alpha));
        }
    }
    Ok(session.finish(grid.len()))
}

struct Logged {
    set: ContextSet,
    survivors: Vec<usize>,
    arm: usize,
    reward: f64,
}

/// Batched elimination whose sampling policy for each batch is learned from
/// the previous batch's survived sets.
pub fn run_batch_linucb_dg<R: Rng + ?Sized>(
    env: &Environment,
    horizon: usize,
    cfg: &LearnerConfig,
    rng: &mut R,
) -> Result<LearnerRecord, BanditError> {
    cfg.check()?;
    if horizon < 16 {
        return Err(BanditError::Precondition(format!("horizon {horizon} < 16")));
    }
    let name = "BatchLinUCB-DG";
    let mut session = Session::new(env, horizon, name, cfg.trace_survivors)?;
    let d = session.dim();
    let k = session.num_arms();
    let alpha = cfg.elimination_alpha(d, k, horizon);
    let lambda_reg = cfg.ridge_lambda(32.0, d, horizon);
    let lambda_design = 1.0 / horizon as f64;
    let grid = dg_grid(horizon);
    let solver = GOptimalSolver::new(cfg.g_optimal);
    let mut estimators: Vec<Estimator> = Vec::with_capacity(grid.len());
    let mut policy = SamplePolicy::GOptimal;

    for (batch, start, end) in batch_starts(&grid) {
        session.switch();
        let policy_json = serde_json::to_string(&policy).expect("policy serializes");
        let tag = StepTag {
            batch,
            fingerprint: fingerprint(&estimators, &policy_json),
            layer: None,
        };
        let mut log: Vec<Logged> = Vec::with_capacity(end - start);
        for _ in start..end {
            let set = session.observe()?;
            let survivors = cascade(&estimators, &set);
            let arm = if survivors.len() == 1 {
                survivors[0]
            } else {
                let dist = policy_distribution(&policy, &set.subset(&survivors), &solver)?;
                survivors[dist.sample(rng)]
            };
            let reward = session.play(arm, tag, &survivors)?;
            log.push(Logged {
                set,
                survivors,
                arm,
                reward,
            });
        }
        if batch == grid.len() {
            break;
        }
        let mut ridge = RidgeState::new(d, lambda_reg)?;
        for entry in log.iter().step_by(2) {
            ridge.update(entry.set.row(entry.arm), entry.reward)?;
        }
        let est = Estimator::from_ridge(&ridge, alpha);
        let mut rhat = vec![0.0; k];
        let mut omega = vec![0.0; k];
        let learned: Vec<ContextSet> = log
            .iter()
            .skip(1)
            .step_by(2)
            .map(|entry| {
                let kept = eliminate_with(&est, &entry.set, &entry.survivors, &mut rhat, &mut omega);
                entry.set.subset(&kept)
            })
            .collect();
        estimators.push(est);
        solver.clear();
        if !learned.is_empty() {
            policy = core_learning_unchecked(&learned, lambda_design, k, cfg.block_multiplier, &solver)?;
        }
        solver.clear();
    }
    Ok(session.finish(grid.len()))
}

struct Layer {
    alpha: f64,
    threshold: f64,
    live: RidgeState,
    snapshot: Estimator,
    snapshot_log_det: f64,
}

/// `⌈log₂ d⌉`.
pub fn layer_count(d: usize) -> usize {
    (usize::BITS - d.saturating_sub(1).leading_zeros()) as usize
}

/// Upper bound on the rarely-switching learner's switch count.
pub fn switch_bound(d: usize, horizon: usize, c: f64) -> usize {
    let per_layer = (d as f64 * (1.0 + horizon as f64 / d as f64).ln() / c.ln() + 1.0).ceil();
    (layer_count(d) + 1) * per_layer as usize
}

fn lowest_argmax(candidates: &[usize], values: &[f64]) -> usize {
    let mut best = candidates[0];
    for &i in &candidates[1..] {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

/// Layered elimination with delayed per-layer snapshots; each layer's
/// snapshot moves only when its determinant has grown by `C`.
pub fn run_sup_linucb<R: Rng + ?Sized>(
    env: &Environment,
    horizon: usize,
    cfg: &LearnerConfig,
    _rng: &mut R,
) -> Result<LearnerRecord, BanditError> {
    cfg.check()?;
    let c = cfg.switch_factor;
    if !(c >= 2.0) {
        return Err(BanditError::Precondition(format!("switch factor {c} < 2")));
    }
    let d = env.dim();
    if horizon < d {
        return Err(BanditError::Precondition(format!("horizon {horizon} < d = {d}")));
    }
    let name = "SupLinUCB";
    let mut session = Session::new(env, horizon, name, cfg.trace_survivors)?;
    let k = session.num_arms();
    let top = layer_count(d);
    let mut threshold = (d as f64).powf(1.5) / (horizon as f64).sqrt();
    let mut layers: Vec<Layer> = Vec::with_capacity(top + 1);
    for kappa in 0..=top {
        let alpha = if kappa == 0 {
            cfg.layer_zero_alpha(d, horizon)
        } else {
            cfg.elimination_alpha(d, k, horizon)
        };
        let live = RidgeState::new(d, 1.0)?;
        layers.push(Layer {
            alpha,
            threshold,
            snapshot: Estimator::from_ridge(&live, alpha),
            snapshot_log_det: live.log_det(),
            live,
        });
        threshold /= 2.0;
        session.switch();
    }
    let layer_fingerprint = |layers: &[Layer]| {
        let mut h = DefaultHasher::new();
        for l in layers {
            l.snapshot.hash_into(&mut h);
        }
        h.finish()
    };
    let mut fp = layer_fingerprint(&layers);
    let mut rhat = vec![0.0; k];
    let mut omega = vec![0.0; k];

    for t in 1..=horizon {
        let set = session.observe()?;
        let all: Vec<usize> = (0..set.k()).collect();
        let mut survivors = eliminate_with(&layers[0].snapshot, &set, &all, &mut rhat, &mut omega);
        let mut chosen = None;
        for (kappa, layer) in layers.iter().enumerate() {
            if kappa > 0 {
                for &i in &survivors {
                    let (r, w) = layer.snapshot.score(set.row(i));
                    rhat[i] = r;
                    omega[i] = w;
                }
            }
            if kappa == top {
                chosen = Some((lowest_argmax(&survivors, &rhat), kappa));
                break;
            }
            if survivors.iter().all(|&i| omega[i] <= layer.threshold) {
                let best = survivors.iter().map(|&i| rhat[i]).fold(f64::NEG_INFINITY, f64::max);
                survivors.retain(|&i| rhat[i] >= best - 2.0 * layer.threshold);
            } else {
                chosen = Some((lowest_argmax(&survivors, &omega), kappa));
                break;
            }
        }
        let (arm, kappa_t) = chosen.expect("the last layer always selects");
        let tag = StepTag {
            batch: t,
            fingerprint: fp,
            layer: Some(kappa_t),
        };
        let reward = session.play(arm, tag, &survivors)?;
        let layer = &mut layers[kappa_t];
        layer.live.update(set.row(arm), reward)?;
        let ld = layer.live.log_det();
        if ld >= c.ln() + layer.snapshot_log_det {
            layer.snapshot = Estimator::from_ridge(&layer.live, layer.alpha);
            layer.snapshot_log_det = ld;
            session.switch();
            fp = layer_fingerprint(&layers);
        }
    }
    Ok(session.finish(horizon))
}

/// First-batch arm distribution on `set` for the design-learning learner.
pub fn initial_policy_distribution(set: &ContextSet, solver: &GOptimalSolver) -> Result<Design, BanditError> {
    Ok(policy_distribution(&SamplePolicy::GOptimal, set, solver)?)
}
