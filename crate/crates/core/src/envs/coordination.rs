//! Two-state coordination game with a switching cost and congestion penalty.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{build, check_discount, check_positive, echo, ParamReader};
use crate::error::EnvError;
use crate::model::{GameClass, GameDynamics, MfgModel};
use crate::types::Distribution;

pub const STAY: usize = 0;
pub const SWITCH: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinationParams {
    pub switch_cost: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for CoordinationParams {
    fn default() -> Self {
        Self { switch_cost: 80.0, alpha: 1.0, gamma: 0.9 }
    }
}

impl CoordinationParams {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("coordination", map);
        let params =
            Self { switch_cost: r.take("C", d.switch_cost), alpha: r.take("alpha", d.alpha), gamma: r.take("gamma", d.gamma) };
        r.finish()?;
        Ok(params)
    }

    /// The best response is constant (always stay) when `C > alpha / (1 - gamma)`.
    pub fn certificate(&self) -> ContractionCertificate {
        let threshold = self.alpha / (1.0 - self.gamma);
        if self.switch_cost > threshold {
            ContractionCertificate::Holds
        } else {
            ContractionCertificate::Fails { threshold }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ContractionCertificate {
    Holds,
    Fails { threshold: f64 },
}

impl ContractionCertificate {
    pub fn holds(&self) -> bool {
        matches!(self, ContractionCertificate::Holds)
    }
}

#[derive(Debug)]
struct Coordination {
    switch_cost: f64,
    alpha: f64,
}

impl GameDynamics for Coordination {
    fn transition(&self, state: usize, action: usize, _mu: &Distribution, next: &mut [f64]) {
        let target = if action == SWITCH { 1 - state } else { state };
        next[target] = 1.0;
    }

    fn reward(&self, state: usize, action: usize, mu: &Distribution) -> f64 {
        let switching = if action == SWITCH { self.switch_cost } else { 0.0 };
        -switching - self.alpha * mu[state]
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        false
    }

    fn population_reward(&self, state: usize, mu: &Distribution) -> Option<f64> {
        Some(-self.alpha * mu[state])
    }

    fn population_jacobian(&self, mu: &Distribution) -> Option<Array2<f64>> {
        Some(Array2::eye(mu.len()) * -self.alpha)
    }
}

pub fn make_coordination(params: &CoordinationParams) -> Result<(MfgModel, ContractionCertificate), EnvError> {
    check_positive("C", params.switch_cost)?;
    check_positive("alpha", params.alpha)?;
    check_discount(params.gamma)?;
    let dynamics = Arc::new(Coordination { switch_cost: params.switch_cost, alpha: params.alpha });
    let model = build(MfgModel::new("coordination", 2, 2, params.gamma, GameClass::Contractive, dynamics))?
        .with_params(echo(&[("C", params.switch_cost), ("alpha", params.alpha), ("gamma", params.gamma)]));
    Ok((model, params.certificate()))
}
