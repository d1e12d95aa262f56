//! Online mirror descent: play the softmax of accumulated Q-values.

use super::{AlgorithmId, Recorder, SolverConfig, SolverTrace};
use crate::dynamics::{policy_evaluation, softmax_policy};
use crate::error::SolverError;
use crate::model::MfgModel;
use crate::types::{Distribution, Policy, QTable};

/// Stepwise OMD state: `pi_k = softmax_tau(Qsum_{k-1})`, `mu_k = M^N(pi_k)`,
/// `Qsum_k = Qsum_{k-1} + alpha Q^{pi_k, mu_k}`, with `Qsum_0 = Q^{pi_0, mu_0}`.
pub struct Omd<'a> {
    rec: Recorder<'a>,
    model: &'a MfgModel,
    cfg: &'a SolverConfig,
    iteration: usize,
    policy: Policy,
    mean_field: Distribution,
    last_q: QTable,
    cumulative_q: QTable,
}

impl<'a> Omd<'a> {
    pub fn new(model: &'a MfgModel, cfg: &'a SolverConfig) -> Result<Self, SolverError> {
        let mut rec = Recorder::new(model, cfg, AlgorithmId::Omd)?;
        let policy = rec.initial_policy()?;
        let mu_pi = rec.stationary(&policy)?;
        let mu = rec.initial_mean_field(&policy)?;
        let q = policy_evaluation(model, &policy, &mu)?.q;
        rec.log(0, &policy, Some(&mu_pi))?;
        Ok(Self { rec, model, cfg, iteration: 0, policy, mean_field: mu_pi, last_q: q.clone(), cumulative_q: q })
    }

    pub fn step(&mut self) -> Result<(), SolverError> {
        self.iteration += 1;
        self.policy = softmax_policy(self.cumulative_q.as_array(), self.cfg.temperature)?;
        self.mean_field = self.rec.stationary(&self.policy)?;
        self.last_q = policy_evaluation(self.model, &self.policy, &self.mean_field)?.q;
        self.cumulative_q = self.cumulative_q.add_scaled(&self.last_q, self.cfg.learning_rate);
        self.rec.log(self.iteration, &self.policy, Some(&self.mean_field))
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    /// `Q^{pi_k, mu_k}` of the latest step.
    pub fn last_q(&self) -> &QTable {
        &self.last_q
    }

    pub fn cumulative_q(&self) -> &QTable {
        &self.cumulative_q
    }

    pub fn finish(self) -> SolverTrace {
        self.rec.finish(self.policy, self.mean_field)
    }
}

pub fn solve_omd(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let mut omd = Omd::new(model, cfg)?;
    for _ in 0..cfg.iterations {
        omd.step()?;
    }
    Ok(omd.finish())
}
