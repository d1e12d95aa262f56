//! Policy-iteration family: greedy, smoothed and Boltzmann improvement steps.

use super::{AlgorithmId, Recorder, SolverConfig, SolverTrace, Smoothing};
use crate::dynamics::{policy_evaluation, softmax_policy};
use crate::error::SolverError;
use crate::model::MfgModel;
use crate::types::{Policy, QTable};

enum Improvement {
    Greedy,
    Softmax(f64),
}

impl Improvement {
    fn apply(&self, q: &QTable) -> Result<Policy, SolverError> {
        match self {
            Improvement::Greedy => Ok(q.greedy_policy()),
            Improvement::Softmax(tau) => Ok(softmax_policy(q.as_array(), *tau)?),
        }
    }
}

/// `pi_k = argmax Q_{k-1}`, `mu_k = M^N(pi_k)`, `Q_k = Q^{pi_k, mu_k}`.
pub fn solve_policy_iteration(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    iterate(model, cfg, AlgorithmId::PolicyIteration, Improvement::Greedy, |_| 1.0)
}

/// Policy iteration evaluated against a damped mean field
/// `mu_k = lambda_k M^N(pi_k) + (1 - lambda_k) mu_{k-1}`.
pub fn solve_smooth_pi(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let lambda = cfg.damping;
    match cfg.smoothing {
        Smoothing::Constant => iterate(model, cfg, AlgorithmId::SmoothPi, Improvement::Greedy, |_| lambda),
        Smoothing::Decreasing => iterate(model, cfg, AlgorithmId::SmoothPi, Improvement::Greedy, |k| 1.0 / k as f64),
    }
}

/// `pi_k = softmax_tau(Q_{k-1})`, `mu_k = M^N(pi_k)`, `Q_k = Q^{pi_k, mu_k}`.
pub fn solve_boltzmann_pi(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    iterate(model, cfg, AlgorithmId::BoltzmannPi, Improvement::Softmax(cfg.temperature), |_| 1.0)
}

fn iterate(
    model: &MfgModel,
    cfg: &SolverConfig,
    id: AlgorithmId,
    improvement: Improvement,
    schedule: impl Fn(usize) -> f64,
) -> Result<SolverTrace, SolverError> {
    let mut rec = Recorder::new(model, cfg, id)?;
    let mut pi = rec.initial_policy()?;
    let mut mu_pi = rec.stationary(&pi)?;
    let mut mu = rec.initial_mean_field(&pi)?;
    let mut q = policy_evaluation(model, &pi, &mu)?.q;
    rec.log(0, &pi, Some(&mu_pi))?;
    for k in 1..=cfg.iterations {
        pi = improvement.apply(&q)?;
        mu_pi = rec.stationary(&pi)?;
        mu = mu.mix(&mu_pi, schedule(k))?;
        q = policy_evaluation(model, &pi, &mu)?.q;
        rec.log(k, &pi, Some(&mu_pi))?;
    }
    Ok(rec.finish(pi, mu_pi))
}
