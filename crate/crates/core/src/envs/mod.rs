//! The eight benchmark environments and a name-keyed registry over them.
//!
//! Every constructor validates its parameters and echoes the resolved values
//! (defaults included) into [`MfgModel::params`].

mod coordination;
mod grid;
mod rps;
mod sis;
mod walk;

use std::collections::BTreeMap;

use crate::error::EnvError;
use crate::model::MfgModel;

pub use coordination::{make_coordination, ContractionCertificate, CoordinationParams, STAY, SWITCH};
pub use grid::{
    make_four_rooms, make_kinetic_congestion, FourRoomsGrid, FourRoomsParams, KineticCongestionParams,
    FOUR_ROOMS_MOVES, GRID_MOVES,
};
pub use rps::{make_rps, RpsParams, RPS_MATRIX};
pub use sis::{make_sis, SisParams, INFECTED, SUSCEPTIBLE};
pub use walk::{make_beach_bar, make_move_forward, make_two_beach_bars, BeachBarParams, MoveForwardParams};

/// Discount used when a parameter map does not set `gamma`.
pub const DEFAULT_DISCOUNT: f64 = 0.99;

/// Registered environment names, in registry order.
pub const ENV_NAMES: [&str; 8] =
    ["move_forward", "coordination", "beach_bar", "two_beach_bars", "four_rooms", "rps", "sis", "kinetic_congestion"];

/// Builds a registered environment from a string-keyed parameter map.
/// Missing keys take their defaults; unknown keys are rejected.
pub fn make_env(name: &str, params: &BTreeMap<String, f64>) -> Result<MfgModel, EnvError> {
    match name {
        "move_forward" => make_move_forward(&MoveForwardParams::from_map(params)?),
        "coordination" => make_coordination(&CoordinationParams::from_map(params)?).map(|(model, _)| model),
        "beach_bar" => make_beach_bar(&BeachBarParams::from_map("beach_bar", params, BeachBarParams::beach_bar())?),
        "two_beach_bars" => {
            make_two_beach_bars(&BeachBarParams::from_map("two_beach_bars", params, BeachBarParams::two_beach_bars())?)
        }
        "four_rooms" => make_four_rooms(&FourRoomsParams::from_map(params)?),
        "rps" => make_rps(&RpsParams::from_map(params)?),
        "sis" => make_sis(&SisParams::from_map(params)?),
        "kinetic_congestion" => make_kinetic_congestion(&KineticCongestionParams::from_map(params)?),
        other => Err(EnvError::UnknownEnv(other.to_string())),
    }
}

/// Reads typed parameters out of a string map, tracking which keys were consumed.
pub(crate) struct ParamReader<'a> {
    env: &'static str,
    map: &'a BTreeMap<String, f64>,
    known: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    pub(crate) fn new(env: &'static str, map: &'a BTreeMap<String, f64>) -> Self {
        Self { env, map, known: Vec::new() }
    }

    pub(crate) fn take(&mut self, key: &'static str, default: f64) -> f64 {
        self.known.push(key);
        self.map.get(key).copied().unwrap_or(default)
    }

    pub(crate) fn finish(self) -> Result<(), EnvError> {
        match self.map.keys().find(|k| !self.known.contains(&k.as_str())) {
            Some(name) => Err(EnvError::UnknownParam { env: self.env.to_string(), name: name.clone() }),
            None => Ok(()),
        }
    }
}

pub(crate) fn check_discount(gamma: f64) -> Result<(), EnvError> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(EnvError::invalid("gamma", gamma, "must lie in [0, 1)"))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<(), EnvError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(EnvError::invalid(name, value, "must be positive"))
    }
}

pub(crate) fn check_non_negative(name: &str, value: f64) -> Result<(), EnvError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(EnvError::invalid(name, value, "must be non-negative"))
    }
}

pub(crate) fn check_probability(name: &str, value: f64) -> Result<(), EnvError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EnvError::invalid(name, value, "must lie in [0, 1]"))
    }
}

pub(crate) fn echo(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Wraps a model construction error (only reachable through invalid sizes).
pub(crate) fn build(result: Result<MfgModel, crate::error::CoreError>) -> Result<MfgModel, EnvError> {
    result.map_err(|e| EnvError::invalid("model", f64::NAN, &e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_every_env_with_defaults() {
        for name in ENV_NAMES {
            let model = make_env(name, &BTreeMap::new()).unwrap();
            assert_eq!(model.name(), name);
            assert!(model.params().contains_key("gamma"));
        }
    }

    #[test]
    fn registry_rejects_unknowns() {
        assert_eq!(make_env("chess", &BTreeMap::new()).unwrap_err(), EnvError::UnknownEnv("chess".into()));
        let params = echo(&[("bogus", 1.0)]);
        assert!(matches!(make_env("sis", &params), Err(EnvError::UnknownParam { .. })));
    }

    #[test]
    fn registry_rejects_bad_discount() {
        let params = echo(&[("gamma", 1.0)]);
        assert!(matches!(make_env("move_forward", &params), Err(EnvError::InvalidParam { .. })));
    }
}
