//! Equilibrium-learning algorithms.
//!
//! Every solver starts from a Boltzmann policy over standard-normal logits and
//! its induced mean field, runs `iterations` updates and logs the
//! exploitability of its current output policy into a [`SolverTrace`].

mod fixed_point;
mod omd;
mod policy_iteration;
mod pso;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_distr::{Distribution as _, StandardNormal};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::dynamics::{exploitability_at, stationary_mean_field, BestResponse, BrConfig, MeanFieldConfig};
use crate::error::{CoreError, SolverError};
use crate::model::MfgModel;
use crate::types::{Distribution, Policy};

pub use fixed_point::{solve_damped_fp, solve_fictitious_play, solve_pure_fp};
pub use omd::{solve_omd, Omd};
pub use policy_iteration::{solve_boltzmann_pi, solve_policy_iteration, solve_smooth_pi};
pub use pso::{solve_mf_pso, Swarm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    FictitiousPlay,
    DampedFp,
    PureFp,
    PolicyIteration,
    SmoothPi,
    BoltzmannPi,
    Omd,
    MfPso,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 8] = [
        AlgorithmId::FictitiousPlay,
        AlgorithmId::DampedFp,
        AlgorithmId::PureFp,
        AlgorithmId::PolicyIteration,
        AlgorithmId::SmoothPi,
        AlgorithmId::BoltzmannPi,
        AlgorithmId::Omd,
        AlgorithmId::MfPso,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmId::FictitiousPlay => "fictitious_play",
            AlgorithmId::DampedFp => "damped_fp",
            AlgorithmId::PureFp => "pure_fp",
            AlgorithmId::PolicyIteration => "policy_iteration",
            AlgorithmId::SmoothPi => "smooth_pi",
            AlgorithmId::BoltzmannPi => "boltzmann_pi",
            AlgorithmId::Omd => "omd",
            AlgorithmId::MfPso => "mf_pso",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| SolverError::UnknownAlgorithm(s.to_string()))
    }
}

/// Damping schedule of smooth policy iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// `lambda_k = damping`.
    Constant,
    /// `lambda_k = 1 / k` for update `k = 1, 2, ...`, so the first update
    /// discards the initial mean field.
    Decreasing,
}

/// Hyperparameters of every solver; each algorithm reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of updates `K`.
    pub iterations: usize,
    /// Exploitability is logged every `eval_every` iterations and at the last one.
    pub eval_every: usize,
    /// Policy and mean-field snapshots every this many iterations (0 disables).
    pub snapshot_every: usize,
    pub mean_field: MeanFieldConfig,
    pub best_response: BrConfig,
    pub init_seed: u64,
    /// Temperature of the initial Boltzmann policy.
    pub init_temperature: f64,
    /// Replaces `M^N(pi_0)` as the starting mean field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_mean_field: Option<Vec<f64>>,
    /// Damping `lambda` of damped fixed point and constant smooth PI.
    pub damping: f64,
    pub smoothing: Smoothing,
    /// Softmax temperature of Boltzmann PI, OMD and MF-PSO.
    pub temperature: f64,
    /// OMD learning rate.
    pub learning_rate: f64,
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            eval_every: 1,
            snapshot_every: 0,
            mean_field: MeanFieldConfig::default(),
            best_response: BrConfig::default(),
            init_seed: 0,
            init_temperature: 1.0,
            initial_mean_field: None,
            damping: 0.5,
            smoothing: Smoothing::Constant,
            temperature: 0.2,
            learning_rate: 1.0,
            particles: 10,
            inertia: 0.5,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

fn invalid(message: impl Into<String>) -> SolverError {
    SolverError::InvalidConfig(message.into())
}

impl SolverConfig {
    /// Checks the shared fields and those read by `algorithm`.
    pub fn validate(&self, algorithm: AlgorithmId) -> Result<(), SolverError> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be >= 1"));
        }
        if self.eval_every == 0 {
            return Err(invalid("eval_every must be >= 1"));
        }
        self.mean_field.validate().map_err(invalid)?;
        self.best_response.validate().map_err(invalid)?;
        if !(self.init_temperature > 0.0) {
            return Err(invalid("init_temperature must be > 0"));
        }
        let damped = matches!(algorithm, AlgorithmId::DampedFp)
            || (algorithm == AlgorithmId::SmoothPi && self.smoothing == Smoothing::Constant);
        if damped && !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        let tempered = matches!(algorithm, AlgorithmId::BoltzmannPi | AlgorithmId::Omd | AlgorithmId::MfPso);
        if tempered && !(self.temperature > 0.0) {
            return Err(invalid(format!("temperature must be > 0, got {}", self.temperature)));
        }
        if algorithm == AlgorithmId::Omd && !(self.learning_rate > 0.0) {
            return Err(invalid(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if algorithm == AlgorithmId::MfPso {
            if self.particles == 0 {
                return Err(invalid("particles must be >= 1"));
            }
            for (name, value) in [("inertia", self.inertia), ("cognitive", self.cognitive), ("social", self.social)] {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(invalid(format!("{name} must be >= 0, got {value}")));
                }
            }
        }
        Ok(())
    }

    fn initial_mean_field(&self, model: &MfgModel) -> Result<Option<Distribution>, SolverError> {
        match &self.initial_mean_field {
            None => Ok(None),
            Some(probs) if probs.len() != model.n_states() => Err(invalid(format!(
                "initial_mean_field has {} entries, model has {} states",
                probs.len(),
                model.n_states()
            ))),
            Some(probs) => Ok(Some(Distribution::new(probs.clone())?)),
        }
    }
}

/// Standard-normal logits drawn from a seeded generator.
pub fn sample_logits(n_states: usize, n_actions: usize, rng: &mut Xoshiro256StarStar) -> Array2<f64> {
    Array2::from_shape_simple_fn((n_states, n_actions), || StandardNormal.sample(rng))
}

/// Boltzmann policy at temperature `tau0` over standard-normal logits.
pub fn init_policy(model: &MfgModel, seed: u64, tau0: f64) -> Result<Policy, CoreError> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let logits = sample_logits(model.n_states(), model.n_actions(), &mut rng);
    crate::dynamics::softmax_policy(&logits, tau0)
}

/// One logged iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub exploitability: f64,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_field: Option<Distribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace {
    pub algorithm: AlgorithmId,
    pub records: Vec<TraceRecord>,
    pub final_policy: Policy,
    /// Mean field induced by `final_policy`.
    pub final_mean_field: Distribution,
}

impl SolverTrace {
    pub fn final_exploitability(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.exploitability)
    }

    /// Number of updates performed (the last logged iteration index).
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn total_wall_time_ms(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.wall_time_ms)
    }

    /// Copy with every wall-clock field zeroed, the only non-deterministic content.
    pub fn without_timing(&self) -> SolverTrace {
        let mut trace = self.clone();
        trace.records.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
        trace
    }

    /// JSON serialization without timings; equal for equal inputs.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.without_timing()).expect("trace serialization cannot fail")
    }
}

/// Shared bookkeeping: timing, logging stride, snapshots and a one-slot
/// best-response cache keyed by mean field.
pub(crate) struct Recorder<'a> {
    model: &'a MfgModel,
    cfg: &'a SolverConfig,
    algorithm: AlgorithmId,
    start: Instant,
    records: Vec<TraceRecord>,
    cached: Option<(Distribution, BestResponse)>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(model: &'a MfgModel, cfg: &'a SolverConfig, algorithm: AlgorithmId) -> Result<Self, SolverError> {
        cfg.validate(algorithm)?;
        Ok(Self { model, cfg, algorithm, start: Instant::now(), records: Vec::new(), cached: None })
    }

    pub(crate) fn initial_policy(&self) -> Result<Policy, SolverError> {
        Ok(init_policy(self.model, self.cfg.init_seed, self.cfg.init_temperature)?)
    }

    /// `mu_0`: the configured override or `M^N(pi_0)`.
    pub(crate) fn initial_mean_field(&self, pi0: &Policy) -> Result<Distribution, SolverError> {
        match self.cfg.initial_mean_field(self.model)? {
            Some(mu) => Ok(mu),
            None => self.stationary(pi0),
        }
    }

    pub(crate) fn stationary(&self, pi: &Policy) -> Result<Distribution, SolverError> {
        Ok(stationary_mean_field(self.model, pi, &self.cfg.mean_field)?.mean_field)
    }

    /// Greedy best response to `mu`, reusing the one computed while logging when possible.
    pub(crate) fn best_response(&mut self, mu: &Distribution) -> Result<Policy, SolverError> {
        if let Some((cached_mu, br)) = &self.cached {
            if cached_mu == mu {
                return Ok(br.policy.clone());
            }
        }
        let br = crate::dynamics::backward_induction_br(self.model, mu, &self.cfg.best_response)?;
        let policy = br.policy.clone();
        self.cached = Some((mu.clone(), br));
        Ok(policy)
    }

    pub(crate) fn should_log(&self, iteration: usize) -> bool {
        iteration % self.cfg.eval_every == 0 || iteration == self.cfg.iterations
    }

    /// Logs `E(pi)`; `mu_pi` is the induced mean field when already known.
    pub(crate) fn log(&mut self, iteration: usize, pi: &Policy, mu_pi: Option<&Distribution>) -> Result<(), SolverError> {
        if !self.should_log(iteration) {
            return Ok(());
        }
        let owned;
        let mu_pi = match mu_pi {
            Some(mu) => mu,
            None => {
                owned = self.stationary(pi)?;
                &owned
            }
        };
        let at = exploitability_at(self.model, pi, mu_pi, &self.cfg.best_response)?;
        self.cached = Some((mu_pi.clone(), at.best_response));
        self.push(iteration, at.value, pi, mu_pi);
        Ok(())
    }

    /// Logs an exploitability computed by the caller.
    pub(crate) fn push(&mut self, iteration: usize, exploitability: f64, pi: &Policy, mu_pi: &Distribution) {
        let snapshot = self.cfg.snapshot_every > 0
            && (iteration % self.cfg.snapshot_every == 0 || iteration == self.cfg.iterations);
        self.records.push(TraceRecord {
            iteration,
            exploitability,
            wall_time_ms: self.start.elapsed().as_secs_f64() * 1e3,
            mean_field: snapshot.then(|| mu_pi.clone()),
            policy: snapshot.then(|| pi.clone()),
        });
    }

    pub(crate) fn finish(self, final_policy: Policy, final_mean_field: Distribution) -> SolverTrace {
        SolverTrace { algorithm: self.algorithm, records: self.records, final_policy, final_mean_field }
    }
}

/// Runs the named algorithm.
pub fn run_solver(model: &MfgModel, algorithm: AlgorithmId, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    match algorithm {
        AlgorithmId::FictitiousPlay => solve_fictitious_play(model, cfg),
        AlgorithmId::DampedFp => solve_damped_fp(model, cfg),
        AlgorithmId::PureFp => solve_pure_fp(model, cfg),
        AlgorithmId::PolicyIteration => solve_policy_iteration(model, cfg),
        AlgorithmId::SmoothPi => solve_smooth_pi(model, cfg),
        AlgorithmId::BoltzmannPi => solve_boltzmann_pi(model, cfg),
        AlgorithmId::Omd => solve_omd(model, cfg),
        AlgorithmId::MfPso => solve_mf_pso(model, cfg),
    }
}

/// Runs an algorithm given by name.
pub fn run_solver_by_name(model: &MfgModel, algorithm: &str, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    run_solver(model, algorithm.parse()?, cfg)
}
