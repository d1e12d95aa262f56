//! Structural diagnostics for a configured game.

use std::fmt;

use mfg_core::checks::{model_monotonicity, model_potential, Monotonicity, Symmetry};
use mfg_core::envs::{ContractionCertificate, CoordinationParams};
use mfg_core::GameClass;

use crate::error::HarnessError;
use crate::run::EnvSpec;

pub const CHECK_TRIALS: usize = 100;
pub const CHECK_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub env: String,
    pub class: GameClass,
    /// `None` when the reward has no separable population term.
    pub monotonicity: Option<Monotonicity>,
    /// `None` when the model exposes no interaction Jacobian.
    pub potential: Option<Symmetry>,
    pub certificate: Option<ContractionCertificate>,
}

pub fn check_env(env: &EnvSpec) -> Result<CheckReport, HarnessError> {
    let model = env.build()?;
    let potential = model_potential(&model, CHECK_TRIALS, CHECK_SEED).transpose().map_err(mfg_core::SolverError::from)?;
    let certificate = match env {
        EnvSpec::Named { name, params } if name == "coordination" => {
            Some(CoordinationParams::from_map(params)?.certificate())
        }
        _ => None,
    };
    Ok(CheckReport {
        env: env.label().to_string(),
        class: model.class(),
        monotonicity: model_monotonicity(&model, CHECK_TRIALS, CHECK_SEED),
        potential,
        certificate,
    })
}

fn fmt_dist(d: &mfg_core::Distribution) -> String {
    let parts: Vec<String> = d.as_slice().iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "env: {}", self.env)?;
        writeln!(f, "class: {}", self.class)?;
        match &self.monotonicity {
            None => writeln!(f, "monotonicity: not applicable")?,
            Some(Monotonicity::Monotone) => writeln!(f, "monotonicity: Monotone ({CHECK_TRIALS} pairs)")?,
            Some(Monotonicity::ViolatedAt { mu, nu, value }) => {
                writeln!(f, "monotonicity: ViolatedAt mu={} nu={} value={value:.6e}", fmt_dist(mu), fmt_dist(nu))?
            }
        }
        match &self.potential {
            None => writeln!(f, "potential: not applicable")?,
            Some(Symmetry::Potential) => writeln!(f, "potential: Potential")?,
            Some(Symmetry::NotPotential { x, y, gap }) => writeln!(f, "potential: NotPotential x={x} y={y} gap={gap:.6e}")?,
        }
        match &self.certificate {
            None => Ok(()),
            Some(ContractionCertificate::Holds) => writeln!(f, "certificate: Holds"),
            Some(ContractionCertificate::Fails { threshold }) => {
                writeln!(f, "certificate: Fails (needs C > {threshold})")
            }
        }
    }
}
