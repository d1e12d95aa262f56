//! One-dimensional clamped walks on seven states: Move Forward and the beach bars.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;

use super::{build, check_discount, check_non_negative, check_positive, check_probability, echo, ParamReader};
use crate::error::EnvError;
use crate::model::{GameClass, GameDynamics, MfgModel};
use crate::types::Distribution;

const N_STATES: usize = 7;
const N_ACTIONS: usize = 3;
const BAR: f64 = 3.0;
const LEFT_BAR: f64 = 2.0;
const RIGHT_BAR: f64 = 4.0;

/// Signed displacement of action index `a` (`0 -> -1`, `1 -> 0`, `2 -> +1`).
fn displacement(action: usize) -> i64 {
    action as i64 - 1
}

/// Writes the clamped walk `x + a + e`, `e` drawn from `noise` over `{-1, 0, 1}`.
fn clamped_walk(state: usize, action: usize, noise: &[f64; 3], next: &mut [f64]) {
    for (e, &weight) in (-1..=1).zip(noise) {
        let target = (state as i64 + displacement(action) + e).clamp(0, N_STATES as i64 - 1);
        next[target as usize] += weight;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveForwardParams {
    pub move_cost: f64,
    pub gamma: f64,
}

impl Default for MoveForwardParams {
    fn default() -> Self {
        Self { move_cost: 0.1, gamma: super::DEFAULT_DISCOUNT }
    }
}

impl MoveForwardParams {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("move_forward", map);
        let params = Self { move_cost: r.take("c", d.move_cost), gamma: r.take("gamma", d.gamma) };
        r.finish()?;
        Ok(params)
    }
}

#[derive(Debug)]
struct MoveForward {
    move_cost: f64,
}

impl GameDynamics for MoveForward {
    fn transition(&self, state: usize, action: usize, _mu: &Distribution, next: &mut [f64]) {
        clamped_walk(state, action, &[1.0 / 3.0; 3], next);
    }

    fn reward(&self, state: usize, action: usize, _mu: &Distribution) -> f64 {
        -self.move_cost * displacement(action).abs() as f64 + state as f64
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        false
    }

    fn population_reward(&self, _state: usize, _mu: &Distribution) -> Option<f64> {
        Some(0.0)
    }

    fn population_jacobian(&self, mu: &Distribution) -> Option<Array2<f64>> {
        Some(Array2::zeros((mu.len(), mu.len())))
    }
}

pub fn make_move_forward(params: &MoveForwardParams) -> Result<MfgModel, EnvError> {
    check_non_negative("c", params.move_cost)?;
    check_discount(params.gamma)?;
    let dynamics = Arc::new(MoveForward { move_cost: params.move_cost });
    let model = build(MfgModel::new("move_forward", N_STATES, N_ACTIONS, params.gamma, GameClass::NoInteraction, dynamics))?;
    Ok(model.with_params(echo(&[("c", params.move_cost), ("gamma", params.gamma)])))
}

/// Parameters shared by the single- and two-bar variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeachBarParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    /// Probability that the noise leaves the move unchanged.
    pub stay_prob: f64,
    pub gamma: f64,
}

impl BeachBarParams {
    pub fn beach_bar() -> Self {
        Self { c1: 2.0, c2: 5.0, alpha: 5.0, stay_prob: 1.0 / 3.0, gamma: super::DEFAULT_DISCOUNT }
    }

    pub fn two_beach_bars() -> Self {
        Self { c1: 0.5, c2: 15.0, alpha: 60.0, stay_prob: 0.9, gamma: super::DEFAULT_DISCOUNT }
    }

    pub fn from_map(env: &'static str, map: &BTreeMap<String, f64>, defaults: Self) -> Result<Self, EnvError> {
        let mut r = ParamReader::new(env, map);
        let params = Self {
            c1: r.take("c1", defaults.c1),
            c2: r.take("c2", defaults.c2),
            alpha: r.take("alpha", defaults.alpha),
            stay_prob: r.take("p", defaults.stay_prob),
            gamma: r.take("gamma", defaults.gamma),
        };
        r.finish()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), EnvError> {
        check_positive("c1", self.c1)?;
        check_positive("c2", self.c2)?;
        check_positive("alpha", self.alpha)?;
        check_probability("p", self.stay_prob)?;
        check_discount(self.gamma)
    }

    fn noise(&self) -> [f64; 3] {
        let side = (1.0 - self.stay_prob) / 2.0;
        [side, self.stay_prob, side]
    }

    fn echo(&self) -> BTreeMap<String, f64> {
        echo(&[("c1", self.c1), ("c2", self.c2), ("alpha", self.alpha), ("p", self.stay_prob), ("gamma", self.gamma)])
    }
}

/// Crowd sign: `-1` for crowd aversion (single bar), `+1` for crowd seeking (two bars).
#[derive(Debug)]
struct BeachBar {
    c1: f64,
    c2: f64,
    alpha: f64,
    noise: [f64; 3],
    crowd_sign: f64,
    two_bars: bool,
}

impl BeachBar {
    fn distance(&self, state: usize) -> f64 {
        let x = state as f64;
        if self.two_bars {
            (x - LEFT_BAR).abs().min((x - RIGHT_BAR).abs())
        } else {
            (x - BAR).abs()
        }
    }
}

impl GameDynamics for BeachBar {
    fn transition(&self, state: usize, action: usize, _mu: &Distribution, next: &mut [f64]) {
        clamped_walk(state, action, &self.noise, next);
    }

    fn reward(&self, state: usize, action: usize, mu: &Distribution) -> f64 {
        -self.c1 * displacement(action).abs() as f64 - self.c2 * self.distance(state) + self.crowd_sign * self.alpha * mu[state]
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        false
    }

    fn population_reward(&self, state: usize, mu: &Distribution) -> Option<f64> {
        Some(self.crowd_sign * self.alpha * mu[state])
    }

    fn population_jacobian(&self, mu: &Distribution) -> Option<Array2<f64>> {
        Some(Array2::eye(mu.len()) * (self.crowd_sign * self.alpha))
    }
}

pub fn make_beach_bar(params: &BeachBarParams) -> Result<MfgModel, EnvError> {
    params.validate()?;
    let dynamics = Arc::new(BeachBar {
        c1: params.c1,
        c2: params.c2,
        alpha: params.alpha,
        noise: params.noise(),
        crowd_sign: -1.0,
        two_bars: false,
    });
    let model = build(MfgModel::new("beach_bar", N_STATES, N_ACTIONS, params.gamma, GameClass::LasryLions, dynamics))?;
    Ok(model.with_params(params.echo()))
}

pub fn make_two_beach_bars(params: &BeachBarParams) -> Result<MfgModel, EnvError> {
    params.validate()?;
    let dynamics = Arc::new(BeachBar {
        c1: params.c1,
        c2: params.c2,
        alpha: params.alpha,
        noise: params.noise(),
        crowd_sign: 1.0,
        two_bars: true,
    });
    let model =
        build(MfgModel::new("two_beach_bars", N_STATES, N_ACTIONS, params.gamma, GameClass::MultiEquilibria, dynamics))?;
    Ok(model.with_params(params.echo()))
}
