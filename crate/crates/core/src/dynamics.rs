//! Exact dynamic-programming primitives for a stationary mean field game.
//!
//! Every routine here works on a model materialized at a fixed mean field:
//! the kernel tensor `p[x, a, x']` and the reward table `r[x, a]`. The
//! mean-field operator re-materializes the kernel at every step so that
//! dynamics-coupled games are handled correctly.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::model::MfgModel;
use crate::types::{Distribution, Policy, QTable, ValueTable, SIMPLEX_TOL};

/// Occupancy below which a state counts as unvisited when averaging policies.
pub const OCCUPANCY_FLOOR: f64 = 1e-12;

/// Row-stochastic state-to-state matrix `P_{mu,pi}(x' | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(Array2<f64>);

impl TransitionMatrix {
    pub fn new(rows: Array2<f64>) -> Result<Self, CoreError> {
        if rows.nrows() != rows.ncols() {
            return Err(CoreError::NotSquare { rows: rows.nrows(), cols: rows.ncols() });
        }
        for row in rows.rows() {
            crate::types::validate_distribution(&row.to_vec())?;
        }
        Ok(Self(rows))
    }

    pub fn n_states(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Settings of the stationary mean-field operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanFieldConfig {
    /// Maximum number of forward steps `N`.
    pub max_steps: usize,
    /// Early stop once one step moves the distribution by less than this (L1).
    pub tol: f64,
    /// Starting distribution; uniform when absent.
    #[serde(skip)]
    pub init: Option<Distribution>,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self { max_steps: 1000, tol: 1e-12, init: None }
    }
}

impl MeanFieldConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_steps == 0 {
            return Err("mean_field.max_steps must be >= 1".into());
        }
        if !(self.tol > 0.0) {
            return Err("mean_field.tol must be > 0".into());
        }
        Ok(())
    }
}

/// Settings of value iteration and iterative policy evaluation.
///
/// Iteration stops after `horizon` sweeps, once a sweep changes the values by
/// less than `tol` (sup norm), or once the sweep-to-sweep change stops
/// contracting, which only happens at the floating-point floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrConfig {
    pub horizon: usize,
    pub tol: f64,
}

impl Default for BrConfig {
    fn default() -> Self {
        Self { horizon: 100_000, tol: 1e-12 }
    }
}

impl BrConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.horizon == 0 {
            return Err("best_response.horizon must be >= 1".into());
        }
        if !(self.tol > 0.0) {
            return Err("best_response.tol must be > 0".into());
        }
        Ok(())
    }
}

/// Kernel and rewards of a model frozen at one mean field.
#[derive(Debug, Clone)]
pub struct FrozenModel {
    kernel: Array3<f64>,
    rewards: Array2<f64>,
    discount: f64,
}

impl FrozenModel {
    pub fn new(model: &MfgModel, mu: &Distribution) -> Result<Self, CoreError> {
        model.check_mean_field(mu)?;
        Ok(Self { kernel: model.kernel_tensor(mu), rewards: model.reward_table(mu), discount: model.discount() })
    }

    pub fn kernel(&self) -> &Array3<f64> {
        &self.kernel
    }

    pub fn rewards(&self) -> &Array2<f64> {
        &self.rewards
    }

    fn n_states(&self) -> usize {
        self.kernel.shape()[0]
    }

    fn n_actions(&self) -> usize {
        self.kernel.shape()[1]
    }

    fn check_policy(&self, pi: &Policy) -> Result<(), CoreError> {
        if pi.n_states() != self.n_states() || pi.n_actions() != self.n_actions() {
            return Err(CoreError::dims(
                format!("{}x{}", self.n_states(), self.n_actions()),
                format!("{}x{}", pi.n_states(), pi.n_actions()),
            ));
        }
        Ok(())
    }

    /// `Q(x, a) = r(x, a) + gamma * sum_x' p(x' | x, a) V(x')`.
    pub fn q_from_values(&self, values: &Array1<f64>) -> Array2<f64> {
        let (nx, na) = (self.n_states(), self.n_actions());
        let flat = self.kernel.view().into_shape_with_order((nx * na, nx)).expect("kernel is contiguous");
        let continuation = flat.dot(values).into_shape_with_order((nx, na)).expect("shape matches");
        &self.rewards + &(continuation * self.discount)
    }

    fn policy_chain(&self, pi: &Policy) -> (Array2<f64>, Array1<f64>) {
        let chain = induced_from_tensor(&self.kernel, pi);
        let rewards = (&self.rewards * pi.as_array()).sum_axis(Axis(1));
        (chain, rewards)
    }

    /// Exact solution of `(I - gamma P_pi) V = r_pi` by LU decomposition.
    pub fn evaluate(&self, pi: &Policy) -> Result<Array1<f64>, CoreError> {
        self.check_policy(pi)?;
        let (chain, rewards) = self.policy_chain(pi);
        let n = self.n_states();
        let system = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - self.discount * chain[[i, j]]);
        let rhs = DVector::from_iterator(n, rewards.iter().copied());
        match system.lu().solve(&rhs) {
            Some(solution) => Ok(Array1::from_iter(solution.iter().copied())),
            None => Ok(self.iterate_values(&chain, &rewards, &BrConfig::default())),
        }
    }

    /// Iterative evaluation of `V = r_pi + gamma P_pi V` from `V = 0`.
    pub fn evaluate_iterative(&self, pi: &Policy, cfg: &BrConfig) -> Result<Array1<f64>, CoreError> {
        self.check_policy(pi)?;
        let (chain, rewards) = self.policy_chain(pi);
        Ok(self.iterate_values(&chain, &rewards, cfg))
    }

    fn iterate_values(&self, chain: &Array2<f64>, rewards: &Array1<f64>, cfg: &BrConfig) -> Array1<f64> {
        let mut values = Array1::zeros(self.n_states());
        let mut last_delta = f64::INFINITY;
        for _ in 0..cfg.horizon {
            let next = rewards + &(chain.dot(&values) * self.discount);
            let delta = sup_distance(&next, &values);
            values = next;
            if delta < cfg.tol || delta >= last_delta {
                break;
            }
            last_delta = delta;
        }
        values
    }

    /// Value iteration from `V = 0`; returns the values and the sweep count.
    pub fn optimal_values(&self, cfg: &BrConfig) -> (Array1<f64>, usize) {
        let mut values = Array1::zeros(self.n_states());
        let mut last_delta = f64::INFINITY;
        let mut sweeps = 0;
        while sweeps < cfg.horizon {
            let q = self.q_from_values(&values);
            let next = row_max(&q);
            let delta = sup_distance(&next, &values);
            values = next;
            sweeps += 1;
            if delta < cfg.tol || delta >= last_delta {
                break;
            }
            last_delta = delta;
        }
        (values, sweeps)
    }
}

fn sup_distance(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn row_max(values: &Array2<f64>) -> Array1<f64> {
    values.map_axis(Axis(1), |row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn induced_from_tensor(kernel: &Array3<f64>, pi: &Policy) -> Array2<f64> {
    let (nx, na) = (kernel.shape()[0], kernel.shape()[1]);
    let mut chain = Array2::zeros((nx, nx));
    for x in 0..nx {
        let mut row = chain.row_mut(x);
        for a in 0..na {
            let weight = pi.prob(x, a);
            if weight != 0.0 {
                row.scaled_add(weight, &kernel.slice(ndarray::s![x, a, ..]));
            }
        }
    }
    chain
}

/// `P_{mu,pi}(x' | x) = sum_a p(x' | x, a, mu) pi(a | x)`.
pub fn induced_transition_matrix(
    model: &MfgModel,
    mu: &Distribution,
    pi: &Policy,
) -> Result<TransitionMatrix, CoreError> {
    model.check_mean_field(mu)?;
    if pi.n_states() != model.n_states() || pi.n_actions() != model.n_actions() {
        return Err(CoreError::dims(
            format!("{}x{}", model.n_states(), model.n_actions()),
            format!("{}x{}", pi.n_states(), pi.n_actions()),
        ));
    }
    Ok(TransitionMatrix(induced_from_tensor(&model.kernel_tensor(mu), pi)))
}

/// One forward step of the population: `P^T mu`.
pub fn mean_field_step(chain: &TransitionMatrix, mu: &Distribution) -> Result<Distribution, CoreError> {
    if chain.n_states() != mu.len() {
        return Err(CoreError::dims(chain.n_states(), mu.len()));
    }
    Ok(Distribution::from_array_unchecked(chain.0.t().dot(mu.as_array())))
}

/// Output of the stationary mean-field operator.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMeanField {
    pub mean_field: Distribution,
    pub steps_used: usize,
    /// L1 change of the last step taken.
    pub residual: f64,
}

/// Iterates `mu <- P_{mu,pi}^T mu` for at most `cfg.max_steps` steps.
///
/// Non-convergence (e.g. a periodic chain) is reported through `residual`.
pub fn stationary_mean_field(
    model: &MfgModel,
    pi: &Policy,
    cfg: &MeanFieldConfig,
) -> Result<StationaryMeanField, CoreError> {
    let mut mu = match &cfg.init {
        Some(init) => init.clone(),
        None => Distribution::uniform(model.n_states())?,
    };
    let fixed_chain = if model.kernel_depends_on_mean_field() {
        None
    } else {
        Some(induced_transition_matrix(model, &mu, pi)?)
    };
    let mut residual = f64::INFINITY;
    let mut steps_used = 0;
    for step in 1..=cfg.max_steps.max(1) {
        let next = match &fixed_chain {
            Some(chain) => mean_field_step(chain, &mu)?,
            None => mean_field_step(&induced_transition_matrix(model, &mu, pi)?, &mu)?,
        };
        residual = next.l1_distance(&mu);
        mu = next;
        steps_used = step;
        if residual < cfg.tol {
            break;
        }
    }
    Ok(StationaryMeanField { mean_field: mu, steps_used, residual })
}

/// Values of a policy facing a fixed mean field.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValue {
    pub q: QTable,
    pub v: ValueTable,
    /// `J(pi; mu) = sum_x mu(x) V(x)`, the initial state being drawn from `mu`.
    pub objective: f64,
}

/// Exact policy evaluation by a dense linear solve.
pub fn policy_evaluation(model: &MfgModel, pi: &Policy, mu: &Distribution) -> Result<PolicyValue, CoreError> {
    let frozen = FrozenModel::new(model, mu)?;
    let v = frozen.evaluate(pi)?;
    Ok(package_values(&frozen, v, mu))
}

/// Policy evaluation by fixed-point sweeps from `V = 0`, stopped as described on [`BrConfig`].
pub fn policy_evaluation_iterative(
    model: &MfgModel,
    pi: &Policy,
    mu: &Distribution,
    cfg: &BrConfig,
) -> Result<PolicyValue, CoreError> {
    let frozen = FrozenModel::new(model, mu)?;
    let v = frozen.evaluate_iterative(pi, cfg)?;
    Ok(package_values(&frozen, v, mu))
}

fn package_values(frozen: &FrozenModel, v: Array1<f64>, mu: &Distribution) -> PolicyValue {
    let q = frozen.q_from_values(&v);
    let v = ValueTable::from_array_unchecked(v);
    let objective = v.expectation(mu);
    PolicyValue { q: QTable::from_array_unchecked(q), v, objective }
}

/// Optimal action values and the greedy best response at a fixed mean field.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub q: QTable,
    pub policy: Policy,
    pub sweeps: usize,
}

/// Value iteration from `V = 0`, then greedy extraction with ties resolved
/// toward the first action.
pub fn backward_induction_br(model: &MfgModel, mu: &Distribution, cfg: &BrConfig) -> Result<BestResponse, CoreError> {
    let frozen = FrozenModel::new(model, mu)?;
    Ok(best_response_frozen(&frozen, cfg))
}

pub(crate) fn best_response_frozen(frozen: &FrozenModel, cfg: &BrConfig) -> BestResponse {
    let (values, sweeps) = frozen.optimal_values(cfg);
    let q = QTable::from_array_unchecked(frozen.q_from_values(&values));
    let policy = q.greedy_policy();
    BestResponse { q, policy, sweeps }
}

/// Boltzmann policy `pi(a | x) ∝ exp(q(x, a) / tau)`.
pub fn softmax_policy(preferences: &Array2<f64>, tau: f64) -> Result<Policy, CoreError> {
    if !(tau > 0.0) {
        return Err(CoreError::NonPositiveTemperature(tau));
    }
    if preferences.nrows() == 0 || preferences.ncols() == 0 {
        return Err(CoreError::ZeroStates);
    }
    let mut probs = preferences.clone();
    for mut row in probs.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(CoreError::NonFinite { row: 0, col: 0 });
        }
        row.mapv_inplace(|v| ((v - max) / tau).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    Ok(Policy::from_array_unchecked(probs))
}

/// Running occupancy-weighted policy average, `sum_i mu_i(x) pi_i(a|x) / sum_i mu_i(x)`.
#[derive(Debug, Clone)]
pub struct PolicyAverager {
    numerator: Array2<f64>,
    denominator: Array1<f64>,
    lower: Array2<f64>,
    upper: Array2<f64>,
}

impl PolicyAverager {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            numerator: Array2::zeros((n_states, n_actions)),
            denominator: Array1::zeros(n_states),
            lower: Array2::from_elem((n_states, n_actions), f64::INFINITY),
            upper: Array2::from_elem((n_states, n_actions), f64::NEG_INFINITY),
        }
    }

    pub fn add(&mut self, pi: &Policy, occupancy: &Distribution) -> Result<(), CoreError> {
        let (nx, na) = self.numerator.dim();
        if pi.n_states() != nx || pi.n_actions() != na || occupancy.len() != nx {
            return Err(CoreError::dims(
                format!("{nx}x{na} policy with {nx} occupancies"),
                format!("{}x{} policy with {} occupancies", pi.n_states(), pi.n_actions(), occupancy.len()),
            ));
        }
        for x in 0..nx {
            let weight = occupancy[x];
            self.denominator[x] += weight;
            if weight > 0.0 {
                for a in 0..na {
                    let p = pi.prob(x, a);
                    self.numerator[[x, a]] += weight * p;
                    self.lower[[x, a]] = self.lower[[x, a]].min(p);
                    self.upper[[x, a]] = self.upper[[x, a]].max(p);
                }
            }
        }
        Ok(())
    }

    /// The current average; unvisited states get the uniform row.
    pub fn average(&self) -> Policy {
        let (nx, na) = self.numerator.dim();
        let mut probs = Array2::from_elem((nx, na), 1.0 / na as f64);
        for x in 0..nx {
            let total = self.denominator[x];
            if total < OCCUPANCY_FLOOR {
                continue;
            }
            for a in 0..na {
                // The quotient is a convex combination; clamp away round-off.
                probs[[x, a]] = (self.numerator[[x, a]] / total).clamp(self.lower[[x, a]], self.upper[[x, a]]);
            }
        }
        Policy::from_array_unchecked(probs)
    }
}

/// Occupancy-weighted average of `policies`.
pub fn average_policies(policies: &[Policy], occupancies: &[Distribution]) -> Result<Policy, CoreError> {
    let first = policies.first().ok_or(CoreError::EmptyList)?;
    if policies.len() != occupancies.len() {
        return Err(CoreError::dims(policies.len(), occupancies.len()));
    }
    let mut averager = PolicyAverager::new(first.n_states(), first.n_actions());
    for (pi, mu) in policies.iter().zip(occupancies) {
        averager.add(pi, mu)?;
    }
    Ok(averager.average())
}

/// Exploitability of a policy together with its induced mean field.
#[derive(Debug, Clone, PartialEq)]
pub struct Exploitability {
    /// Raw `sum_x mu(x) (V*(x) - V^pi(x))`; may be slightly negative from round-off.
    pub value: f64,
    pub mean_field: Distribution,
}

impl Exploitability {
    pub fn clipped(&self) -> f64 {
        self.value.max(0.0)
    }
}

/// Exploitability evaluated at an already computed induced mean field.
#[derive(Debug, Clone)]
pub struct ExploitabilityAt {
    pub value: f64,
    pub best_response: BestResponse,
    pub best_value: ValueTable,
    pub policy_value: ValueTable,
}

/// `E(pi) = max_pi' J(pi'; mu^pi) - J(pi; mu^pi)` with `mu^pi` from the
/// stationary mean-field operator.
pub fn exploitability(
    model: &MfgModel,
    pi: &Policy,
    mf_cfg: &MeanFieldConfig,
    br_cfg: &BrConfig,
) -> Result<Exploitability, CoreError> {
    let stationary = stationary_mean_field(model, pi, mf_cfg)?;
    let at = exploitability_at(model, pi, &stationary.mean_field, br_cfg)?;
    Ok(Exploitability { value: at.value, mean_field: stationary.mean_field })
}

/// Exploitability of `pi` given its induced mean field `mu_pi`.
///
/// The optimal values are those of the greedy best response, evaluated with
/// the same routine as `pi`, so a policy equal to its own best response
/// scores exactly zero.
pub fn exploitability_at(
    model: &MfgModel,
    pi: &Policy,
    mu_pi: &Distribution,
    br_cfg: &BrConfig,
) -> Result<ExploitabilityAt, CoreError> {
    let frozen = FrozenModel::new(model, mu_pi)?;
    let best_response = best_response_frozen(&frozen, br_cfg);
    let best_value = frozen.evaluate(&best_response.policy)?;
    let policy_value =
        if best_response.policy == *pi { best_value.clone() } else { frozen.evaluate(pi)? };
    let value = mu_pi.as_array().dot(&(&best_value - &policy_value));
    Ok(ExploitabilityAt {
        value,
        best_response,
        best_value: ValueTable::from_array_unchecked(best_value),
        policy_value: ValueTable::from_array_unchecked(policy_value),
    })
}

/// Bellman optimality residual `max_x |max_a Q(x, a) - T V(x)|` of a Q table.
pub fn bellman_residual(model: &MfgModel, mu: &Distribution, q: &QTable) -> Result<f64, CoreError> {
    let frozen = FrozenModel::new(model, mu)?;
    let values = q.state_values();
    let backed_up = row_max(&frozen.q_from_values(values.as_array()));
    Ok(sup_distance(&backed_up, values.as_array()))
}

/// Row sums of a transition matrix are within the simplex tolerance.
pub fn is_row_stochastic(matrix: &Array2<f64>) -> bool {
    matrix.rows().into_iter().all(|r| r.iter().all(|&p| p >= 0.0) && (r.sum() - 1.0).abs() <= SIMPLEX_TOL)
}
