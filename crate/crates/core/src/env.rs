//! Environments: stochastic context distributions, the counterexample family,
//! and adversarial lower-bound instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{ContextSet, DesignError};
use crate::matrix::{dot, norm};
use crate::rng::{step_rng, stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("step {t} outside 1..={horizon}")]
    StepOutOfRange { t: usize, horizon: usize },
    #[error("arm {arm} outside 0..{k}")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("{what} has norm {norm} > 1")]
    NormViolation { what: String, norm: f64 },
    #[error("invalid environment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian { sd: f64 },
    Zero,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::Gaussian { sd: 1.0 }
    }
}

impl NoiseModel {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseModel::Gaussian { sd } => sd * rng.sample::<f64, _>(StandardNormal),
            NoiseModel::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StochasticSpec {
    FiniteMultiset { sets: Vec<ContextSet>, probs: Vec<f64> },
    UniformSphere,
    /// One rare singleton `{e₁}` and `d − 1` two-point sets tilted toward `e₁`.
    CounterexampleD6 { gamma: f64 },
}

/// A categorical distribution over a fixed list of context sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    pub sets: Vec<ContextSet>,
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(sets: Vec<ContextSet>, probs: &[f64]) -> Result<Self, EnvError> {
        if sets.is_empty() || sets.len() != probs.len() {
            return Err(EnvError::InvalidProbabilities(format!(
                "{} sets but {} probabilities",
                sets.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(EnvError::InvalidProbabilities("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(EnvError::InvalidProbabilities(format!("probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Categorical { sets, cdf })
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }
}

/// The counterexample family in dimension `d`: index 0 is `{e₁}`, index
/// `i ≥ 1` is `{√(1−ε²)e_{i+1} + εe₁, e_{i+1}}` with `ε = √(d/γ)`.
pub fn counterexample_family(d: usize, gamma: f64) -> Result<Categorical, EnvError> {
    if d < 2 {
        return Err(EnvError::Invalid("counterexample family needs d >= 2".into()));
    }
    let eps2 = d as f64 / gamma;
    if !(eps2 > 0.0 && eps2 <= 1.0) {
        return Err(EnvError::Invalid(format!("gamma {gamma} must be at least d = {d}")));
    }
    let eps = eps2.sqrt();
    let mut sets = Vec::with_capacity(d);
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    sets.push(ContextSet::new(vec![e1])?);
    for i in 1..d {
        let mut tilted = vec![0.0; d];
        tilted[i] = (1.0 - eps2).sqrt();
        tilted[0] = eps;
        let mut ei = vec![0.0; d];
        ei[i] = 1.0;
        sets.push(ContextSet::new(vec![tilted, ei])?);
    }
    let rare = 1.0 / (d as f64 * gamma);
    let mut probs = vec![(1.0 - rare) / (d - 1) as f64; d];
    probs[0] = rare;
    Categorical::new(sets, &probs)
}

fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Adversarial instance parameters: dimension (even), horizon, switch budget,
/// and one sign sequence per two-dimensional block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSpec {
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "M")]
    pub switches: usize,
    /// Per-block signs in {−1, +1}; defaults to `u_j = (−1)^j` in every block.
    #[serde(default)]
    pub u: Option<Vec<Vec<i8>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundInstance {
    pub d: usize,
    pub horizon: usize,
    pub switches: usize,
    /// Stages per interval.
    pub stages: usize,
    /// Steps per interval, `T/(d/2)`.
    pub interval: usize,
    pub upsilon: f64,
    pub u: Vec<Vec<i8>>,
    /// `ψ_j(u)` for `j = 0..=L`, per block.
    pub psi: Vec<Vec<f64>>,
    /// `z_j` for `j = 0..=L`.
    pub z: Vec<f64>,
    /// Stage ends `t_j` within an interval, `j = 0..=L`.
    pub boundaries: Vec<usize>,
    pub theta: Vec<f64>,
    /// True when the switch budget lies outside `20d ≤ M ≤ d ln T / 48`.
    pub illustrative: bool,
}

pub fn default_signs(stages: usize) -> Vec<i8> {
    (1..=stages).map(|j| if j % 2 == 1 { -1 } else { 1 }).collect()
}

impl LowerBoundInstance {
    /// Interval index `ℓ` (0-based) and stage `j` (1-based) of step `t`.
    pub fn locate(&self, t: usize) -> (usize, usize) {
        let ell = (t - 1) / self.interval;
        let tau = t - ell * self.interval;
        let j = self.boundaries.partition_point(|&b| b < tau);
        (ell, j)
    }

    /// The two candidate contexts of stage `j` in interval `ell`.
    pub fn stage_contexts(&self, ell: usize, j: usize) -> [Vec<f64>; 2] {
        let mut a = vec![0.0; self.d];
        let mut b = vec![0.0; self.d];
        a[2 * ell] = self.z[j];
        b[2 * ell + 1] = 1.5 * self.z[j] * self.psi[ell][j - 1];
        [a, b]
    }

    /// Index (0 or 1) of the arm with the smaller mean in stage `j` of interval `ell`.
    pub fn suboptimal_arm(&self, ell: usize, j: usize) -> usize {
        let [a, b] = self.stage_contexts(ell, j);
        if dot(&a, &self.theta) < dot(&b, &self.theta) {
            0
        } else {
            1
        }
    }

    pub fn check_norms(&self) -> Result<(), EnvError> {
        let n = norm(&self.theta);
        if n > 1.0 + 1e-12 {
            return Err(EnvError::NormViolation {
                what: "theta".into(),
                norm: n,
            });
        }
        for ell in 0..self.d / 2 {
            for j in 1..=self.stages {
                for (arm, x) in self.stage_contexts(ell, j).iter().enumerate() {
                    let n = norm(x);
                    if n > 1.0 + 1e-12 {
                        return Err(EnvError::NormViolation {
                            what: format!("context {arm} of stage {j} in interval {}", ell + 1),
                            norm: n,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The same layout with `u_j` of block `ell` negated; norms are not rechecked.
    pub fn flipped(&self, ell: usize, j: usize) -> LowerBoundInstance {
        let mut u = self.u.clone();
        u[ell][j - 1] *= -1;
        let spec = LowerBoundSpec {
            d: self.d,
            horizon: self.horizon,
            switches: self.switches,
            u: Some(u),
        };
        lower_bound_layout(&spec).expect("same layout as a valid instance")
    }

    /// Guaranteed per-step gap `υ⁻¹ / (2√(T/(d/2)))`.
    pub fn gap_floor(&self) -> f64 {
        1.0 / (2.0 * self.upsilon * (self.interval as f64).sqrt())
    }
}

/// Builds the instance and rejects it if `θ` or any context has norm above 1.
pub fn lower_bound_instance(spec: &LowerBoundSpec) -> Result<LowerBoundInstance, EnvError> {
    let inst = lower_bound_layout(spec)?;
    inst.check_norms()?;
    Ok(inst)
}

/// The instance's derived quantities without the norm checks.
pub fn lower_bound_layout(spec: &LowerBoundSpec) -> Result<LowerBoundInstance, EnvError> {
    let d = spec.d;
    if d < 2 || d % 2 != 0 {
        return Err(EnvError::Invalid(format!("d = {d} must be even and at least 2")));
    }
    let blocks = d / 2;
    if spec.horizon == 0 || spec.horizon % blocks != 0 {
        return Err(EnvError::Invalid(format!(
            "T = {} must be a positive multiple of d/2 = {blocks}",
            spec.horizon
        )));
    }
    if spec.switches == 0 || (8 * spec.switches) % d != 0 {
        return Err(EnvError::Invalid(format!(
            "8M = {} must be a positive multiple of d = {d}",
            8 * spec.switches
        )));
    }
    let l = 8 * spec.switches / d;
    let interval = spec.horizon / blocks;
    if interval < l {
        return Err(EnvError::Invalid(format!("interval {interval} shorter than {l} stages")));
    }
    let u = match &spec.u {
        Some(u) => u.clone(),
        None => vec![default_signs(l); blocks],
    };
    if u.len() != blocks || u.iter().any(|b| b.len() != l) {
        return Err(EnvError::Invalid(format!("u must hold {blocks} sign sequences of length {l}")));
    }
    if u.iter().flatten().any(|s| *s != 1 && *s != -1) {
        return Err(EnvError::Invalid("u entries must be +1 or -1".into()));
    }
    let tp = interval as f64;
    let upsilon = tp.powf(-1.0 / (2.0 * (l as f64 + 1.0)));
    let psi: Vec<Vec<f64>> = u
        .iter()
        .map(|signs| {
            let mut acc = 0.5;
            let mut out = vec![acc];
            for (i, s) in signs.iter().enumerate() {
                acc += *s as f64 * upsilon.powi(i as i32 + 1);
                out.push(acc);
            }
            out
        })
        .collect();
    let z: Vec<f64> = (0..=l)
        .map(|j| upsilon.powi(-(j as i32 + 1)) / tp.sqrt())
        .collect();
    let boundaries: Vec<usize> = (0..=l)
        .map(|j| ((j as f64 * tp) / l as f64).ceil() as usize)
        .collect();
    let mut theta = Vec::with_capacity(d);
    for p in &psi {
        theta.push(p[l]);
        theta.push(2.0 / 3.0);
    }
    let ln_t = (spec.horizon as f64).ln();
    let m = spec.switches as f64;
    let illustrative = !(20.0 * d as f64 <= m && m <= d as f64 * ln_t / 48.0);
    Ok(LowerBoundInstance {
        d,
        horizon: spec.horizon,
        switches: spec.switches,
        stages: l,
        interval,
        upsilon,
        u,
        psi,
        z,
        boundaries,
        theta,
        illustrative,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContextSource {
    Stochastic { sampler: Sampler, seed: u64 },
    Scheduled(Vec<ContextSet>),
    LowerBound(Box<LowerBoundInstance>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Categorical(Categorical),
    UniformSphere { d: usize, k: usize },
}

/// A bandit environment. The hidden parameter is readable only through
/// [`Environment::theta`], which the regret meter uses; learners see
/// contexts and rewards only (see `bandits::Session`).
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    d: usize,
    k: usize,
    horizon: usize,
    theta: Vec<f64>,
    source: ContextSource,
    pub noise: NoiseModel,
    pub noise_seed: u64,
}

impl Environment {
    pub fn new(
        theta: Vec<f64>,
        k: usize,
        horizon: usize,
        source: ContextSource,
        noise: NoiseModel,
        noise_seed: u64,
    ) -> Result<Self, EnvError> {
        let n = norm(&theta);
        if n > 1.0 + 1e-12 {
            return Err(EnvError::NormViolation {
                what: "theta".into(),
                norm: n,
            });
        }
        if let ContextSource::Scheduled(sets) = &source {
            if sets.len() < horizon {
                return Err(EnvError::Invalid(format!(
                    "schedule has {} steps, horizon is {horizon}",
                    sets.len()
                )));
            }
        }
        Ok(Environment {
            d: theta.len(),
            k,
            horizon,
            theta,
            source,
            noise,
            noise_seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest context-set size.
    pub fn num_arms(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn source(&self) -> &ContextSource {
        &self.source
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self, EnvError> {
        let n = norm(&theta);
        if theta.len() != self.d || n > 1.0 + 1e-12 {
            return Err(EnvError::NormViolation {
                what: "theta".into(),
                norm: n,
            });
        }
        self.theta = theta;
        Ok(self)
    }

    /// Context set at step `t` (1-based).
    pub fn contexts(&self, t: usize) -> Result<ContextSet, EnvError> {
        if t == 0 || t > self.horizon {
            return Err(EnvError::StepOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        match &self.source {
            ContextSource::Stochastic { sampler, seed } => {
                let mut rng = step_rng(*seed, Stream::Context, t as u64);
                Ok(draw_set(sampler, &mut rng))
            }
            ContextSource::Scheduled(sets) => Ok(sets[t - 1].clone()),
            ContextSource::LowerBound(inst) => {
                let (ell, j) = inst.locate(t);
                Ok(ContextSet::new(inst.stage_contexts(ell, j).to_vec())?)
            }
        }
    }

    /// Mean reward of arm `i` and its regret against the best arm of `set`.
    pub fn mean_and_regret(&self, set: &ContextSet, i: usize) -> Result<(f64, f64), EnvError> {
        if i >= set.k() {
            return Err(EnvError::ArmOutOfRange { arm: i, k: set.k() });
        }
        let means: Vec<f64> = set.rows().map(|x| dot(x, &self.theta)).collect();
        let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok((means[i], (best - means[i]).max(0.0)))
    }

    pub fn noise_rng(&self) -> ChaCha8Rng {
        stream_rng(self.noise_seed, Stream::Noise)
    }
}

pub fn draw_set<R: Rng + ?Sized>(sampler: &Sampler, rng: &mut R) -> ContextSet {
    match sampler {
        Sampler::Categorical(c) => c.sets[c.sample_index(rng)].clone(),
        Sampler::UniformSphere { d, k } => {
            let mut data = Vec::with_capacity(d * k);
            for _ in 0..*k {
                data.extend(uniform_sphere(rng, *d));
            }
            ContextSet::from_flat(*d, data).expect("unit vectors")
        }
    }
}

pub fn sampler_for(spec: &StochasticSpec, d: usize, k: usize) -> Result<Sampler, EnvError> {
    match spec {
        StochasticSpec::FiniteMultiset { sets, probs } => {
            if sets.iter().any(|s| s.dim() != d) {
                return Err(EnvError::Invalid(format!("every set must have dimension {d}")));
            }
            Ok(Sampler::Categorical(Categorical::new(sets.clone(), probs)?))
        }
        StochasticSpec::UniformSphere => Ok(Sampler::UniformSphere { d, k }),
        StochasticSpec::CounterexampleD6 { gamma } => {
            Ok(Sampler::Categorical(counterexample_family(d, *gamma)?))
        }
    }
}

/// i.i.d. context sets from `spec`; `θ` uniform on the unit sphere from `theta_seed`.
pub fn stochastic_env(
    spec: &StochasticSpec,
    d: usize,
    k: usize,
    horizon: usize,
    theta_seed: u64,
    ctx_seed: u64,
    noise_seed: u64,
) -> Result<Environment, EnvError> {
    let sampler = sampler_for(spec, d, k)?;
    let k = match &sampler {
        Sampler::Categorical(c) => c.sets.iter().map(|s| s.k()).max().unwrap_or(1),
        Sampler::UniformSphere { k, .. } => *k,
    };
    let theta = uniform_sphere(&mut stream_rng(theta_seed, Stream::Theta), d);
    Environment::new(
        theta,
        k,
        horizon,
        ContextSource::Stochastic {
            sampler,
            seed: ctx_seed,
        },
        NoiseModel::default(),
        noise_seed,
    )
}

pub fn lower_bound_env(inst: LowerBoundInstance, noise_seed: u64) -> Result<Environment, EnvError> {
    Environment::new(
        inst.theta.clone(),
        2,
        inst.horizon,
        ContextSource::LowerBound(Box::new(inst)),
        NoiseModel::default(),
        noise_seed,
    )
}

/// Reward and regret of playing arm `i` at step `t`.
pub fn step<R: Rng + ?Sized>(
    env: &Environment,
    t: usize,
    i: usize,
    rng: &mut R,
) -> Result<(f64, f64), EnvError> {
    let set = env.contexts(t)?;
    let (mean, regret) = env.mean_and_regret(&set, i)?;
    Ok((mean + env.noise.draw(rng), regret))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_set_multiset_repeats() {
        let set = ContextSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let spec = StochasticSpec::FiniteMultiset { sets: vec![set.clone()], probs: vec![1.0] };
        let env = stochastic_env(&spec, 2, 2, 50, 1, 2, 3).unwrap();
        for t in 1..=50 {
            assert_eq!(env.contexts(t).unwrap(), set);
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let set = ContextSet::new(vec![vec![1.0]]).unwrap();
        let spec = StochasticSpec::FiniteMultiset { sets: vec![set], probs: vec![0.7] };
        assert!(matches!(stochastic_env(&spec, 1, 1, 5, 0, 0, 0), Err(EnvError::InvalidProbabilities(_))));
    }

    #[test]
    fn counterexample_rare_frequency() {
        let d = 4;
        let gamma = 50.0;
        let fam = counterexample_family(d, gamma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 100_000;
        let hits = (0..n).filter(|_| fam.sample_index(&mut rng) == 0).count();
        let p = 1.0 / (d as f64 * gamma);
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - n as f64 * p).abs() <= 4.0 * sigma);
        for s in &fam.sets {
            for x in s.rows() {
                assert!(norm(x) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn sphere_contexts_are_unit_and_reproducible() {
        let env = stochastic_env(&StochasticSpec::UniformSphere, 5, 7, 100, 1, 2, 3).unwrap();
        let env2 = stochastic_env(&StochasticSpec::UniformSphere, 5, 7, 100, 1, 2, 3).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for t in 1..=100 {
            let s = env.contexts(t).unwrap();
            assert_eq!(s, env2.contexts(t).unwrap());
            for x in s.rows() {
                total += norm(x);
                count += 1;
            }
        }
        assert!((total / count as f64 - 1.0).abs() < 1e-12);
        assert!((norm(env.theta()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_step() {
        let env = stochastic_env(&StochasticSpec::UniformSphere, 3, 4, 10, 1, 2, 3)
            .unwrap()
            .with_noise(NoiseModel::Zero);
        let mut rng = env.noise_rng();
        let set = env.contexts(4).unwrap();
        let means: Vec<f64> = set.rows().map(|x| dot(x, env.theta())).collect();
        let best = argmax(&means);
        let (r, reg) = step(&env, 4, best, &mut rng).unwrap();
        assert_eq!(reg, 0.0);
        assert_eq!(r, means[best]);
        assert!(step(&env, 11, 0, &mut rng).is_err());
        assert!(step(&env, 1, 9, &mut rng).is_err());
    }

    fn argmax(v: &[f64]) -> usize {
        crate::design::argmax_index(v)
    }

    #[test]
    fn noisy_step_mean() {
        let env = stochastic_env(&StochasticSpec::UniformSphere, 3, 4, 10, 1, 2, 3).unwrap();
        let mut rng = env.noise_rng();
        let set = env.contexts(2).unwrap();
        let mean = dot(set.row(1), env.theta());
        let n = 100_000;
        let avg = (0..n).map(|_| step(&env, 2, 1, &mut rng).unwrap().0).sum::<f64>() / n as f64;
        assert!((avg - mean).abs() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn lower_bound_psi_zero_is_half() {
        let spec = LowerBoundSpec { d: 2, horizon: 1_000_000, switches: 1, u: None };
        let inst = lower_bound_instance(&spec).unwrap();
        assert_eq!(inst.psi[0][0], 0.5);
        assert_eq!(inst.stages, 4);
        assert!(inst.illustrative);
    }

    #[test]
    fn lower_bound_valid_regime_gap_and_flip() {
        // υ ≈ 0.251 here, inside the regime where the gap guarantee holds.
        let spec = LowerBoundSpec { d: 2, horizon: 1_000_000, switches: 1, u: None };
        let inst = lower_bound_instance(&spec).unwrap();
        let env = lower_bound_env(inst.clone(), 0).unwrap();
        let floor = inst.gap_floor();
        for t in (1..=inst.horizon).step_by(997).chain([inst.horizon]) {
            let set = env.contexts(t).unwrap();
            let (_, r0) = env.mean_and_regret(&set, 0).unwrap();
            let (_, r1) = env.mean_and_regret(&set, 1).unwrap();
            assert!(r0.max(r1) >= floor);
        }
        for j in 1..=inst.stages {
            let other = inst.flipped(0, j);
            assert_eq!(other.stage_contexts(0, j), inst.stage_contexts(0, j));
            assert_ne!(other.suboptimal_arm(0, j), inst.suboptimal_arm(0, j));
        }
    }

    #[test]
    fn lower_bound_rejects_long_vectors() {
        let spec = LowerBoundSpec { d: 2, horizon: 1_000_000, switches: 1, u: Some(vec![vec![1, 1, 1, 1]]) };
        assert!(matches!(lower_bound_instance(&spec), Err(EnvError::NormViolation { .. })));
    }

    #[test]
    fn lower_bound_stage_lookup() {
        let spec = LowerBoundSpec { d: 4, horizon: 4000, switches: 2, u: None };
        let inst = lower_bound_instance(&spec).unwrap();
        assert_eq!(inst.stages, 4);
        assert_eq!(inst.interval, 2000);
        assert_eq!(inst.boundaries, vec![0, 500, 1000, 1500, 2000]);
        assert_eq!(inst.locate(1), (0, 1));
        assert_eq!(inst.locate(500), (0, 1));
        assert_eq!(inst.locate(501), (0, 2));
        assert_eq!(inst.locate(2000), (0, 4));
        assert_eq!(inst.locate(2001), (1, 1));
        assert_eq!(inst.locate(4000), (1, 4));
    }
}
