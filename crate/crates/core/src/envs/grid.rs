//! Grid worlds: Four Rooms exploration and kinetic congestion.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;

use super::{build, check_discount, check_non_negative, check_positive, echo, ParamReader};
use crate::error::EnvError;
use crate::model::{GameClass, GameDynamics, GridLayout, MfgModel};
use crate::types::Distribution;

const FOUR_ROOMS_SIDE: i64 = 11;
const WALL_LINE: i64 = 5;
const DOORS: [(i64, i64); 4] = [(2, 5), (7, 5), (5, 7), (5, 2)];
/// Floor applied to `mu(x)` before taking its logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

/// Four Rooms actions as `(dx, dy)`: up, right, down, left, stay.
pub const FOUR_ROOMS_MOVES: [(i64, i64); 5] = [(0, 1), (1, 0), (0, -1), (-1, 0), (0, 0)];

/// Kinetic congestion actions as `(drow, dcol)`: up, down, left, right, stay.
pub const GRID_MOVES: [(i64, i64); 5] = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];

/// Navigable cells of the Four Rooms grid: the 11x11 square minus the wall
/// cross on line 5, with the four doors reopened.
#[derive(Debug, Clone)]
pub struct FourRoomsGrid {
    cells: Vec<(usize, usize)>,
    index: Vec<Option<usize>>,
}

impl Default for FourRoomsGrid {
    fn default() -> Self {
        Self::new()
    }
}

impl FourRoomsGrid {
    pub fn new() -> Self {
        let mut cells = Vec::new();
        let mut index = vec![None; (FOUR_ROOMS_SIDE * FOUR_ROOMS_SIDE) as usize];
        for x in 0..FOUR_ROOMS_SIDE {
            for y in 0..FOUR_ROOMS_SIDE {
                let wall = (x == WALL_LINE || y == WALL_LINE) && !DOORS.contains(&(x, y));
                if !wall {
                    index[(x * FOUR_ROOMS_SIDE + y) as usize] = Some(cells.len());
                    cells.push((x as usize, y as usize));
                }
            }
        }
        Self { cells, index }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn cell_of(&self, state: usize) -> Option<(usize, usize)> {
        self.cells.get(state).copied()
    }

    /// State index of a cell, or `None` for walls and off-grid coordinates.
    pub fn index_of(&self, x: i64, y: i64) -> Option<usize> {
        if !(0..FOUR_ROOMS_SIDE).contains(&x) || !(0..FOUR_ROOMS_SIDE).contains(&y) {
            return None;
        }
        self.index[(x * FOUR_ROOMS_SIDE + y) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourRoomsParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for FourRoomsParams {
    fn default() -> Self {
        Self { alpha: 1.0, gamma: super::DEFAULT_DISCOUNT }
    }
}

impl FourRoomsParams {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("four_rooms", map);
        let params = Self { alpha: r.take("alpha", d.alpha), gamma: r.take("gamma", d.gamma) };
        r.finish()?;
        Ok(params)
    }
}

#[derive(Debug)]
struct FourRooms {
    grid: FourRoomsGrid,
    alpha: f64,
}

impl GameDynamics for FourRooms {
    fn transition(&self, state: usize, action: usize, _mu: &Distribution, next: &mut [f64]) {
        let (x, y) = self.grid.cells[state];
        let (ax, ay) = FOUR_ROOMS_MOVES[action];
        let weight = 1.0 / FOUR_ROOMS_MOVES.len() as f64;
        for (ex, ey) in FOUR_ROOMS_MOVES {
            let target = self.grid.index_of(x as i64 + ax + ex, y as i64 + ay + ey).unwrap_or(state);
            next[target] += weight;
        }
    }

    fn reward(&self, state: usize, _action: usize, mu: &Distribution) -> f64 {
        -self.alpha * mu[state].max(LOG_FLOOR).ln()
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        false
    }

    fn population_reward(&self, state: usize, mu: &Distribution) -> Option<f64> {
        Some(-self.alpha * mu[state].max(LOG_FLOOR).ln())
    }

    fn population_jacobian(&self, mu: &Distribution) -> Option<Array2<f64>> {
        let diagonal = mu.as_array().mapv(|m| if m > LOG_FLOOR { -self.alpha / m } else { 0.0 });
        Some(Array2::from_diag(&diagonal))
    }
}

pub fn make_four_rooms(params: &FourRoomsParams) -> Result<MfgModel, EnvError> {
    check_positive("alpha", params.alpha)?;
    check_discount(params.gamma)?;
    let grid = FourRoomsGrid::new();
    let layout = GridLayout { rows: FOUR_ROOMS_SIDE as usize, cols: FOUR_ROOMS_SIDE as usize, cells: grid.cells.clone() };
    let n_states = grid.len();
    let dynamics = Arc::new(FourRooms { grid, alpha: params.alpha });
    let model = build(MfgModel::new("four_rooms", n_states, FOUR_ROOMS_MOVES.len(), params.gamma, GameClass::Potential, dynamics))?;
    Ok(model.with_params(echo(&[("alpha", params.alpha), ("gamma", params.gamma)])).with_layout(layout))
}

const CONGESTION_SIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticCongestionParams {
    /// Density at which a target cell becomes impassable.
    pub capacity: f64,
    pub move_cost: f64,
    pub gamma: f64,
}

impl Default for KineticCongestionParams {
    fn default() -> Self {
        Self { capacity: 0.18, move_cost: 0.1, gamma: super::DEFAULT_DISCOUNT }
    }
}

impl KineticCongestionParams {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, EnvError> {
        let d = Self::default();
        let mut r = ParamReader::new("kinetic_congestion", map);
        let params = Self {
            capacity: r.take("tau", d.capacity),
            move_cost: r.take("c_move", d.move_cost),
            gamma: r.take("gamma", d.gamma),
        };
        r.finish()?;
        Ok(params)
    }
}

#[derive(Debug)]
struct KineticCongestion {
    capacity: f64,
    move_cost: f64,
}

impl KineticCongestion {
    fn target(state: usize, action: usize) -> Option<usize> {
        let (row, col) = ((state / CONGESTION_SIDE) as i64, (state % CONGESTION_SIDE) as i64);
        let (dr, dc) = GRID_MOVES[action];
        let (r, c) = (row + dr, col + dc);
        let side = CONGESTION_SIDE as i64;
        ((0..side).contains(&r) && (0..side).contains(&c)).then(|| (r * side + c) as usize)
    }
}

impl GameDynamics for KineticCongestion {
    fn transition(&self, state: usize, action: usize, mu: &Distribution, next: &mut [f64]) {
        match Self::target(state, action) {
            Some(target) => {
                let success = 1.0 - (mu[target] / self.capacity).min(1.0);
                next[target] += success;
                next[state] += 1.0 - success;
            }
            None => next[state] = 1.0,
        }
    }

    fn reward(&self, state: usize, action: usize, _mu: &Distribution) -> f64 {
        let goal = CONGESTION_SIDE * CONGESTION_SIDE - 1;
        let away = if state == goal { 0.0 } else { 1.0 };
        let moving = if GRID_MOVES[action] == (0, 0) { 0.0 } else { self.move_cost };
        -away - moving
    }

    fn population_reward(&self, _state: usize, _mu: &Distribution) -> Option<f64> {
        Some(0.0)
    }
}

pub fn make_kinetic_congestion(params: &KineticCongestionParams) -> Result<MfgModel, EnvError> {
    check_positive("tau", params.capacity)?;
    check_non_negative("c_move", params.move_cost)?;
    check_discount(params.gamma)?;
    let cells = (0..CONGESTION_SIDE * CONGESTION_SIDE).map(|s| (s / CONGESTION_SIDE, s % CONGESTION_SIDE)).collect();
    let layout = GridLayout { rows: CONGESTION_SIDE, cols: CONGESTION_SIDE, cells };
    let dynamics = Arc::new(KineticCongestion { capacity: params.capacity, move_cost: params.move_cost });
    let model = build(MfgModel::new(
        "kinetic_congestion",
        CONGESTION_SIDE * CONGESTION_SIDE,
        GRID_MOVES.len(),
        params.gamma,
        GameClass::DynamicsCoupled,
        dynamics,
    ))?;
    Ok(model
        .with_params(echo(&[("tau", params.capacity), ("c_move", params.move_cost), ("gamma", params.gamma)]))
        .with_layout(layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_rooms_has_104_states() {
        let model = make_four_rooms(&FourRoomsParams::default()).unwrap();
        assert_eq!(model.n_states(), 121 - (11 + 11 - 1) + 4);
        let uniform = Distribution::uniform(104).unwrap();
        let expected = -(1.0f64 / 104.0).ln();
        assert!((model.reward(0, 4, &uniform) - expected).abs() < 1e-12);
    }

    #[test]
    fn four_rooms_doors_are_open() {
        let grid = FourRoomsGrid::new();
        for (x, y) in DOORS {
            assert!(grid.index_of(x, y).is_some());
        }
        assert!(grid.index_of(5, 5).is_none());
        assert!(grid.index_of(5, 0).is_none());
        assert!(grid.index_of(-1, 3).is_none());
    }

    #[test]
    fn four_rooms_corner_pushes_outward_stay() {
        let model = make_four_rooms(&FourRoomsParams::default()).unwrap();
        let grid = FourRoomsGrid::new();
        let corner = grid.index_of(0, 0).unwrap();
        let mu = Distribution::uniform(104).unwrap();
        // Moving left from (0, 0): only the "right" noise draw lands on the grid, back at the corner.
        let next = model.kernel(corner, 3, &mu);
        assert!((next[corner] - 1.0).abs() < 1e-12);
        let next = model.kernel(corner, 4, &mu);
        assert!((next[corner] - 0.6).abs() < 1e-12);
        assert!((next[grid.index_of(0, 1).unwrap()] - 0.2).abs() < 1e-12);
        assert!((next[grid.index_of(1, 0).unwrap()] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn congestion_success_probability() {
        let params = KineticCongestionParams::default();
        let model = make_kinetic_congestion(&params).unwrap();
        let empty_target = Distribution::point_mass(25, 0).unwrap();
        // From (0, 0) moving down targets (1, 0) = state 5.
        assert_eq!(model.kernel(0, 1, &empty_target)[5], 1.0);
        let mut half = vec![0.0; 25];
        half[5] = 0.09;
        half[0] = 0.91;
        let mu = Distribution::new(half).unwrap();
        assert!((model.kernel(0, 1, &mu)[5] - 0.5).abs() < 1e-12);
        let mut full = vec![0.0; 25];
        full[5] = 0.18;
        full[0] = 0.82;
        let mu = Distribution::new(full).unwrap();
        assert_eq!(model.kernel(0, 1, &mu)[5], 0.0);
        assert_eq!(model.kernel(0, 0, &mu)[0], 1.0);
        assert_eq!(model.reward(24, 4, &mu), 0.0);
        assert!((model.reward(0, 1, &mu) + 1.1).abs() < 1e-12);
    }
}
