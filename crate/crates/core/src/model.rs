//! The mean field game model: state/action sizes, a mean-field-coupled
//! transition kernel, a reward function and a discount factor.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::types::Distribution;

/// Structural class of a game, as used for benchmarking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameClass {
    NoInteraction,
    Contractive,
    LasryLions,
    MultiEquilibria,
    Potential,
    Cyclic,
    DynamicsCoupled,
    Garnet,
}

impl fmt::Display for GameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GameClass::NoInteraction => "no_interaction",
            GameClass::Contractive => "contractive",
            GameClass::LasryLions => "lasry_lions",
            GameClass::MultiEquilibria => "multi_equilibria",
            GameClass::Potential => "potential",
            GameClass::Cyclic => "cyclic",
            GameClass::DynamicsCoupled => "dynamics_coupled",
            GameClass::Garnet => "garnet",
        };
        f.write_str(name)
    }
}

/// Placement of states on a 2-D grid, for environments that live on one.
///
/// `cells[i]` is the `(first, second)` coordinate pair of state `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridLayout {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<(usize, usize)>,
}

/// Dynamics and payoff of one environment.
///
/// `transition` must write a probability vector over next states into `next`
/// (which arrives zeroed and has length `n_states`).
pub trait GameDynamics: Send + Sync + fmt::Debug {
    fn transition(&self, state: usize, action: usize, mu: &Distribution, next: &mut [f64]);

    fn reward(&self, state: usize, action: usize, mu: &Distribution) -> f64;

    /// `false` when the kernel ignores `mu`, so it can be materialized once.
    fn kernel_depends_on_mean_field(&self) -> bool {
        true
    }

    /// The population term `g(x, mu)` of a separable reward `psi(x, a) + g(x, mu)`.
    fn population_reward(&self, _state: usize, _mu: &Distribution) -> Option<f64> {
        None
    }

    /// Jacobian `d g(x, mu) / d mu(y)` of the population term, when available in closed form.
    fn population_jacobian(&self, _mu: &Distribution) -> Option<Array2<f64>> {
        None
    }
}

/// A stationary discounted mean field game `(X, A, p, r, gamma)`.
#[derive(Debug, Clone)]
pub struct MfgModel {
    name: String,
    n_states: usize,
    n_actions: usize,
    discount: f64,
    class: GameClass,
    params: BTreeMap<String, f64>,
    layout: Option<GridLayout>,
    dynamics: Arc<dyn GameDynamics>,
}

impl MfgModel {
    pub fn new(
        name: impl Into<String>,
        n_states: usize,
        n_actions: usize,
        discount: f64,
        class: GameClass,
        dynamics: Arc<dyn GameDynamics>,
    ) -> Result<Self, CoreError> {
        if n_states == 0 || n_actions == 0 {
            return Err(CoreError::ZeroStates);
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(CoreError::dims("discount in [0, 1)", discount));
        }
        Ok(Self {
            name: name.into(),
            n_states,
            n_actions,
            discount,
            class,
            params: BTreeMap::new(),
            layout: None,
            dynamics,
        })
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_layout(mut self, layout: GridLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn with_class(mut self, class: GameClass) -> Self {
        self.class = class;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn class(&self) -> GameClass {
        self.class
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn layout(&self) -> Option<&GridLayout> {
        self.layout.as_ref()
    }

    pub fn dynamics(&self) -> &dyn GameDynamics {
        self.dynamics.as_ref()
    }

    pub fn kernel_depends_on_mean_field(&self) -> bool {
        self.dynamics.kernel_depends_on_mean_field()
    }

    pub(crate) fn check_mean_field(&self, mu: &Distribution) -> Result<(), CoreError> {
        if mu.len() != self.n_states {
            return Err(CoreError::dims(self.n_states, mu.len()));
        }
        Ok(())
    }

    /// Next-state distribution `p(. | x, a, mu)`.
    pub fn kernel(&self, state: usize, action: usize, mu: &Distribution) -> Vec<f64> {
        let mut next = vec![0.0; self.n_states];
        self.dynamics.transition(state, action, mu, &mut next);
        next
    }

    pub fn reward(&self, state: usize, action: usize, mu: &Distribution) -> f64 {
        self.dynamics.reward(state, action, mu)
    }

    /// Kernel materialized for a fixed `mu`, indexed `[x, a, x']`.
    pub fn kernel_tensor(&self, mu: &Distribution) -> Array3<f64> {
        let mut tensor = Array3::zeros((self.n_states, self.n_actions, self.n_states));
        for x in 0..self.n_states {
            for a in 0..self.n_actions {
                let mut lane = tensor.slice_mut(ndarray::s![x, a, ..]);
                let next = lane.as_slice_mut().expect("innermost axis is contiguous");
                self.dynamics.transition(x, a, mu, next);
            }
        }
        tensor
    }

    /// Rewards materialized for a fixed `mu`, indexed `[x, a]`.
    pub fn reward_table(&self, mu: &Distribution) -> Array2<f64> {
        Array2::from_shape_fn((self.n_states, self.n_actions), |(x, a)| self.dynamics.reward(x, a, mu))
    }
}
