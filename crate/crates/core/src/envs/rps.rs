//! Rock-paper-scissors: a cyclic population game where agents pick their next stance.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;

use super::{build, check_discount, ParamReader};
use crate::error::EnvError;
use crate::model::{GameClass, GameDynamics, MfgModel};
use crate::types::Distribution;

/// `A[x][y] = 1` when stance `x` beats stance `y` (rock, paper, scissors).
pub const RPS_MATRIX: [[f64; 3]; 3] = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];

const SKEW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpsParams {
    pub matrix: [[f64; 3]; 3],
    pub gamma: f64,
}

impl Default for RpsParams {
    fn default() -> Self {
        Self { matrix: RPS_MATRIX, gamma: super::DEFAULT_DISCOUNT }
    }
}

const ENTRY_KEYS: [[&str; 3]; 3] = [["a00", "a01", "a02"], ["a10", "a11", "a12"], ["a20", "a21", "a22"]];

impl RpsParams {
    /// Matrix entries are read from keys `a{row}{col}`.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("rps", map);
        let mut matrix = d.matrix;
        for (i, row) in ENTRY_KEYS.iter().enumerate() {
            for (j, key) in row.iter().enumerate() {
                matrix[i][j] = r.take(key, d.matrix[i][j]);
            }
        }
        let params = Self { matrix, gamma: r.take("gamma", d.gamma) };
        r.finish()?;
        Ok(params)
    }

    pub fn interaction(&self) -> Array2<f64> {
        Array2::from_shape_fn((3, 3), |(i, j)| self.matrix[i][j])
    }
}

#[derive(Debug)]
struct Rps {
    matrix: Array2<f64>,
}

impl Rps {
    fn payoff(&self, state: usize, mu: &Distribution) -> f64 {
        self.matrix.row(state).dot(mu.as_array())
    }
}

impl GameDynamics for Rps {
    fn transition(&self, _state: usize, action: usize, _mu: &Distribution, next: &mut [f64]) {
        next[action] = 1.0;
    }

    fn reward(&self, state: usize, _action: usize, mu: &Distribution) -> f64 {
        self.payoff(state, mu)
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        false
    }

    fn population_reward(&self, state: usize, mu: &Distribution) -> Option<f64> {
        Some(self.payoff(state, mu))
    }

    fn population_jacobian(&self, _mu: &Distribution) -> Option<Array2<f64>> {
        Some(self.matrix.clone())
    }
}

pub fn make_rps(params: &RpsParams) -> Result<MfgModel, EnvError> {
    for row in 0..3 {
        for col in row..3 {
            let gap = params.matrix[row][col] + params.matrix[col][row];
            if !(gap.abs() <= SKEW_TOL) {
                return Err(EnvError::NotSkewSymmetric { row, col, gap });
            }
        }
    }
    check_discount(params.gamma)?;
    let dynamics = Arc::new(Rps { matrix: params.interaction() });
    let mut echo = BTreeMap::new();
    for (i, row) in ENTRY_KEYS.iter().enumerate() {
        for (j, key) in row.iter().enumerate() {
            echo.insert(key.to_string(), params.matrix[i][j]);
        }
    }
    echo.insert("gamma".to_string(), params.gamma);
    let model = build(MfgModel::new("rps", 3, 3, params.gamma, GameClass::Cyclic, dynamics))?;
    Ok(model.with_params(echo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_examples() {
        let model = make_rps(&RpsParams::default()).unwrap();
        let uniform = Distribution::uniform(3).unwrap();
        assert_eq!(model.reward(0, 1, &uniform), 0.0);
        let scissors = Distribution::point_mass(3, 2).unwrap();
        assert_eq!(model.reward(0, 0, &scissors), 1.0);
        assert_eq!(model.kernel(0, 2, &scissors), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_non_skew() {
        let mut matrix = RPS_MATRIX;
        matrix[0][1] = 1.0;
        let err = make_rps(&RpsParams { matrix, gamma: 0.9 }).unwrap_err();
        assert_eq!(err, EnvError::NotSkewSymmetric { row: 0, col: 1, gap: 2.0 });
        let mut matrix = RPS_MATRIX;
        matrix[1][1] = 0.5;
        assert!(make_rps(&RpsParams { matrix, gamma: 0.9 }).is_err());
    }
}
