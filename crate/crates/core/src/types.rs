//! Tabular domain types shared by every other module.
//!
//! All objects are dense: the largest benchmark state space has 121 cells,
//! so sparse storage buys nothing. Every constructor validates its invariant
//! and every type is immutable once built.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Serialize, Serializer};

use crate::error::CoreError;

/// Absolute tolerance on the unit-sum constraint of a simplex point.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Entries below `-NEGATIVE_MASS_TOL` are rejected as negative.
pub const NEGATIVE_MASS_TOL: f64 = 1e-12;

/// Checks that `probs` is a point of the probability simplex.
pub fn validate_distribution(probs: &[f64]) -> Result<(), CoreError> {
    if probs.is_empty() {
        return Err(CoreError::ZeroStates);
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() {
            return Err(CoreError::NonFinite { row: 0, col: index });
        }
        if value < -NEGATIVE_MASS_TOL {
            return Err(CoreError::NegativeMass { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(CoreError::NotNormalized { sum });
    }
    Ok(())
}

/// Uniform distribution over `n` states.
pub fn uniform_distribution(n: usize) -> Result<Distribution, CoreError> {
    Distribution::uniform(n)
}

/// A population distribution over states (the mean field).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Array1<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, CoreError> {
        validate_distribution(&probs)?;
        Ok(Self(Array1::from_vec(probs)))
    }

    pub fn uniform(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::ZeroStates);
        }
        Ok(Self(Array1::from_elem(n, 1.0 / n as f64)))
    }

    /// All mass on `state`.
    pub fn point_mass(n: usize, state: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::ZeroStates);
        }
        if state >= n {
            return Err(CoreError::dims(format!("state < {n}"), state));
        }
        let mut probs = Array1::zeros(n);
        probs[state] = 1.0;
        Ok(Self(probs))
    }

    /// Wraps an array the caller has already produced as a simplex point
    /// (e.g. a stochastic matrix applied to a distribution).
    pub(crate) fn from_array_unchecked(probs: Array1<f64>) -> Self {
        debug_assert!(validate_distribution(probs.as_slice().unwrap()).is_ok());
        Self(probs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("distributions are contiguous")
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0.into_raw_vec_and_offset().0
    }

    pub fn l1_distance(&self, other: &Distribution) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Returns `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &Distribution, weight: f64) -> Result<Distribution, CoreError> {
        if self.len() != other.len() {
            return Err(CoreError::dims(self.len(), other.len()));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(CoreError::NotNormalized { sum: weight });
        }
        let mixed = &self.0 * (1.0 - weight) + &other.0 * weight;
        Ok(Self(mixed))
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

fn check_finite(values: &Array2<f64>) -> Result<(), CoreError> {
    for ((row, col), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(CoreError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// A stationary policy: row `x` is the action distribution at state `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy(Array2<f64>);

impl Policy {
    pub fn new(action_probs: Array2<f64>) -> Result<Self, CoreError> {
        if action_probs.nrows() == 0 || action_probs.ncols() == 0 {
            return Err(CoreError::ZeroStates);
        }
        check_finite(&action_probs)?;
        for row in action_probs.rows() {
            validate_distribution(&row.to_vec())?;
        }
        Ok(Self(action_probs))
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Result<Self, CoreError> {
        if n_states == 0 || n_actions == 0 {
            return Err(CoreError::ZeroStates);
        }
        Ok(Self(Array2::from_elem((n_states, n_actions), 1.0 / n_actions as f64)))
    }

    /// One-hot policy playing `actions[x]` at state `x`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self, CoreError> {
        if actions.is_empty() || n_actions == 0 {
            return Err(CoreError::ZeroStates);
        }
        let mut probs = Array2::zeros((actions.len(), n_actions));
        for (x, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(CoreError::dims(format!("action < {n_actions}"), a));
            }
            probs[[x, a]] = 1.0;
        }
        Ok(Self(probs))
    }

    pub(crate) fn from_array_unchecked(action_probs: Array2<f64>) -> Self {
        Self(action_probs)
    }

    pub fn n_states(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.0.ncols()
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.0[[state, action]]
    }

    pub fn row(&self, state: usize) -> ArrayView1<'_, f64> {
        self.0.row(state)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    /// Action index per state when every row is one-hot.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.0
            .rows()
            .into_iter()
            .map(|row| {
                let ones: Vec<usize> =
                    row.iter().enumerate().filter(|(_, &p)| p == 1.0).map(|(a, _)| a).collect();
                let zeros = row.iter().filter(|&&p| p == 0.0).count();
                (ones.len() == 1 && zeros + 1 == row.len()).then(|| ones[0])
            })
            .collect()
    }
}

/// State-action values for a fixed mean field.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable(Array2<f64>);

impl QTable {
    pub fn new(values: Array2<f64>) -> Result<Self, CoreError> {
        check_finite(&values)?;
        Ok(Self(values))
    }

    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self(Array2::zeros((n_states, n_actions)))
    }

    pub(crate) fn from_array_unchecked(values: Array2<f64>) -> Self {
        Self(values)
    }

    pub fn n_states(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.0[[state, action]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    /// `max_a Q(x, a)` per state.
    pub fn state_values(&self) -> ValueTable {
        ValueTable(
            self.0.rows().into_iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
        )
    }

    /// Argmax per state, ties resolved toward the lowest action index.
    pub fn greedy_actions(&self) -> Vec<usize> {
        self.0
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (a, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = a;
                    }
                }
                best
            })
            .collect()
    }

    /// Deterministic greedy policy (first maximizing action).
    pub fn greedy_policy(&self) -> Policy {
        let actions = self.greedy_actions();
        Policy::deterministic(&actions, self.n_actions()).expect("greedy actions are in range")
    }

    /// Returns `self + scale * other`.
    pub fn add_scaled(&self, other: &QTable, scale: f64) -> QTable {
        QTable(&self.0 + &(&other.0 * scale))
    }
}

/// State values for a fixed mean field.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable(Array1<f64>);

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite { row: 0, col });
        }
        Ok(Self(Array1::from_vec(values)))
    }

    pub(crate) fn from_array_unchecked(values: Array1<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("value tables are contiguous")
    }

    /// `sum_x mu(x) V(x)`.
    pub fn expectation(&self, mu: &Distribution) -> f64 {
        self.0.iter().zip(mu.as_slice()).map(|(v, m)| v * m).sum()
    }
}

impl std::ops::Index<usize> for ValueTable {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Unnormalized action preferences (e.g. PSO particle positions).
#[derive(Debug, Clone, PartialEq)]
pub struct Logits(Array2<f64>);

impl Logits {
    pub fn new(raw: Array2<f64>) -> Result<Self, CoreError> {
        check_finite(&raw)?;
        Ok(Self(raw))
    }

    pub fn n_states(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }
}

impl From<QTable> for Logits {
    fn from(q: QTable) -> Self {
        Logits(q.0)
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl Serialize for Policy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.rows().into_iter().map(|row| row.to_vec()))
    }
}
