//! Best-response fixed-point iterations: pure, damped and fictitious play.

use super::{AlgorithmId, Recorder, SolverConfig, SolverTrace};
use crate::dynamics::PolicyAverager;
use crate::error::SolverError;
use crate::model::MfgModel;

/// `pi*_k = BR(mu_{k-1})`, `mu_k = M^N(pi*_k)`.
pub fn solve_pure_fp(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    damped(model, cfg, AlgorithmId::PureFp, 1.0)
}

/// `pi*_k = BR(mu_{k-1})`, `mu_k = (1 - lambda) mu_{k-1} + lambda M^N(pi*_k)`.
pub fn solve_damped_fp(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    damped(model, cfg, AlgorithmId::DampedFp, cfg.damping)
}

fn damped(model: &MfgModel, cfg: &SolverConfig, id: AlgorithmId, lambda: f64) -> Result<SolverTrace, SolverError> {
    let mut rec = Recorder::new(model, cfg, id)?;
    let mut pi = rec.initial_policy()?;
    let mut mu_pi = rec.stationary(&pi)?;
    let mut mu = rec.initial_mean_field(&pi)?;
    rec.log(0, &pi, Some(&mu_pi))?;
    for k in 1..=cfg.iterations {
        pi = rec.best_response(&mu)?;
        mu_pi = rec.stationary(&pi)?;
        mu = mu.mix(&mu_pi, lambda)?;
        rec.log(k, &pi, Some(&mu_pi))?;
    }
    Ok(rec.finish(pi, mu_pi))
}

/// Best response to the running average of past mean fields; the output
/// policy is the occupancy-weighted average of the best responses.
pub fn solve_fictitious_play(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let mut rec = Recorder::new(model, cfg, AlgorithmId::FictitiousPlay)?;
    let pi0 = rec.initial_policy()?;
    let mut mu_bar = rec.initial_mean_field(&pi0)?;
    rec.log(0, &pi0, None)?;
    let mut averager = PolicyAverager::new(model.n_states(), model.n_actions());
    let mut pi_bar = pi0;
    for k in 1..=cfg.iterations {
        let br = rec.best_response(&mu_bar)?;
        let mu_br = rec.stationary(&br)?;
        mu_bar = mu_bar.mix(&mu_br, 1.0 / (k as f64 + 1.0))?;
        averager.add(&br, &mu_br)?;
        pi_bar = averager.average();
        rec.log(k, &pi_bar, None)?;
    }
    let mu_final = rec.stationary(&pi_bar)?;
    Ok(rec.finish(pi_bar, mu_final))
}
