//! SIS epidemic: infection risk grows with both social intensity and prevalence.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{build, check_discount, check_positive, check_probability, echo, ParamReader};
use crate::error::EnvError;
use crate::model::{GameClass, GameDynamics, MfgModel};
use crate::types::Distribution;

pub const SUSCEPTIBLE: usize = 0;
pub const INFECTED: usize = 1;
const LEVELS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisParams {
    pub infection: f64,
    pub recovery: f64,
    pub infection_cost: f64,
    pub gamma: f64,
}

impl Default for SisParams {
    fn default() -> Self {
        Self { infection: 0.5, recovery: 0.1, infection_cost: 5.0, gamma: super::DEFAULT_DISCOUNT }
    }
}

impl SisParams {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("sis", map);
        let params = Self {
            infection: r.take("beta", d.infection),
            recovery: r.take("nu", d.recovery),
            infection_cost: r.take("C", d.infection_cost),
            gamma: r.take("gamma", d.gamma),
        };
        r.finish()?;
        Ok(params)
    }
}

/// Interaction intensity of action `i`, evenly spaced over `[0, 1]`.
fn intensity(action: usize) -> f64 {
    action as f64 / (LEVELS - 1) as f64
}

#[derive(Debug)]
struct Sis {
    infection: f64,
    recovery: f64,
    infection_cost: f64,
}

impl GameDynamics for Sis {
    fn transition(&self, state: usize, action: usize, mu: &Distribution, next: &mut [f64]) {
        if state == SUSCEPTIBLE {
            let infected = self.infection * intensity(action) * mu[INFECTED];
            next[INFECTED] = infected;
            next[SUSCEPTIBLE] = 1.0 - infected;
        } else {
            next[SUSCEPTIBLE] = self.recovery;
            next[INFECTED] = 1.0 - self.recovery;
        }
    }

    fn reward(&self, state: usize, action: usize, _mu: &Distribution) -> f64 {
        let sick = if state == INFECTED { self.infection_cost } else { 0.0 };
        intensity(action) - sick
    }

    fn population_reward(&self, _state: usize, _mu: &Distribution) -> Option<f64> {
        Some(0.0)
    }
}

pub fn make_sis(params: &SisParams) -> Result<MfgModel, EnvError> {
    check_probability("beta", params.infection)?;
    check_probability("nu", params.recovery)?;
    check_positive("C", params.infection_cost)?;
    check_discount(params.gamma)?;
    let dynamics = Arc::new(Sis {
        infection: params.infection,
        recovery: params.recovery,
        infection_cost: params.infection_cost,
    });
    let model = build(MfgModel::new("sis", 2, LEVELS, params.gamma, GameClass::DynamicsCoupled, dynamics))?;
    Ok(model.with_params(echo(&[
        ("beta", params.infection),
        ("nu", params.recovery),
        ("C", params.infection_cost),
        ("gamma", params.gamma),
    ])))
}
