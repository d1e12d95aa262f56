//! Procedurally generated random mean field games.
//!
//! A sparse base kernel `P0` is perturbed by a dense coupling tensor
//! `Gamma[x, a, x', y]` weighted by the mean field, either additively or as a
//! multiplicative gate. Rewards combine a base table `R0` with an interaction
//! matrix `M` in the same two ways.
//!
//! Each random tensor draws from its own substream: the generator is
//! `Xoshiro256StarStar::seed_from_u64(seed)` advanced by `k` calls to `jump()`
//! for substream `k` (0: base kernel, 1: coupling tensor, 2: the four
//! coupling scalars, 3: base rewards, 4: interaction matrix).

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, Array4};
use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Distribution as _, StandardNormal};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::checks::sample_simplex;
use crate::error::GarnetError;
use crate::model::{GameClass, GameDynamics, MfgModel};
use crate::types::Distribution;

/// Name of the generator and stream-splitting scheme, recorded in manifests.
pub const GARNET_RNG: &str = "xoshiro256starstar-jump-substreams";

const STREAM_BASE_P: u32 = 0;
const STREAM_GAMMA: u32 = 1;
const STREAM_SCALARS: u32 = 2;
const STREAM_BASE_R: u32 = 3;
const STREAM_M: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Additive,
    Multiplicative,
}

impl Structure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Structure::Additive => "additive",
            Structure::Multiplicative => "multiplicative",
        }
    }

    /// Single-letter tag used in shape labels (`A` / `M`).
    pub fn letter(&self) -> char {
        match self {
            Structure::Additive => 'A',
            Structure::Multiplicative => 'M',
        }
    }
}

impl std::str::FromStr for Structure {
    type Err = GarnetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "additive" | "a" => Ok(Structure::Additive),
            "multiplicative" | "m" => Ok(Structure::Multiplicative),
            other => Err(GarnetError::InvalidSpec(format!("unknown structure `{other}`"))),
        }
    }
}

/// Fixed values replacing the sampled coupling scalars.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingOverrides {
    pub c_p: Option<f64>,
    pub rho_p: Option<f64>,
    pub c_r: Option<f64>,
    pub rho_r: Option<f64>,
}

impl CouplingOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GarnetSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub branching: usize,
    pub dynamics_structure: Structure,
    pub reward_structure: Structure,
    /// Row sums at or below this fall back to a default row.
    pub epsilon: f64,
    pub seed: u64,
    pub discount: f64,
    #[serde(skip_serializing_if = "CouplingOverrides::is_empty")]
    pub overrides: CouplingOverrides,
    /// Replace `M` by its symmetric part `(M + M^T) / 2`.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub symmetric_interaction: bool,
}

impl Default for GarnetSpec {
    fn default() -> Self {
        Self {
            n_states: 5,
            n_actions: 5,
            branching: 5,
            dynamics_structure: Structure::Additive,
            reward_structure: Structure::Additive,
            epsilon: 1e-8,
            seed: 0,
            discount: 0.9,
            overrides: CouplingOverrides::default(),
            symmetric_interaction: false,
        }
    }
}

impl GarnetSpec {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        branching: usize,
        dynamics_structure: Structure,
        reward_structure: Structure,
        seed: u64,
    ) -> Self {
        Self { n_states, n_actions, branching, dynamics_structure, reward_structure, seed, ..Self::default() }
    }

    pub fn with_overrides(mut self, overrides: CouplingOverrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn with_discount(mut self, discount: f64) -> Self {
        self.discount = discount;
        self
    }

    /// Shape label such as `25x10x10 (A/A)`.
    pub fn shape_label(&self) -> String {
        format!(
            "{}x{}x{} ({}/{})",
            self.n_states,
            self.n_actions,
            self.branching,
            self.dynamics_structure.letter(),
            self.reward_structure.letter()
        )
    }

    pub fn validate(&self) -> Result<(), GarnetError> {
        if self.n_states == 0 || self.n_actions == 0 {
            return Err(GarnetError::InvalidSpec("n_states and n_actions must be positive".into()));
        }
        if self.branching == 0 || self.branching > self.n_states {
            return Err(GarnetError::InvalidBranching { branching: self.branching, n_states: self.n_states });
        }
        if !(self.epsilon > 0.0) {
            return Err(GarnetError::InvalidSpec(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(GarnetError::InvalidSpec(format!("discount must lie in [0, 1), got {}", self.discount)));
        }
        let o = &self.overrides;
        for (name, value) in [("c_p", o.c_p), ("rho_p", o.rho_p), ("c_r", o.c_r), ("rho_r", o.rho_r)] {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(GarnetError::InvalidSpec(format!("override {name} must be finite")));
                }
            }
        }
        Ok(())
    }
}

/// Serializable record from which an instance can be regenerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarnetManifest {
    #[serde(flatten)]
    pub spec: GarnetSpec,
    pub rng_algorithm: String,
}

impl From<&GarnetSpec> for GarnetManifest {
    fn from(spec: &GarnetSpec) -> Self {
        Self { spec: spec.clone(), rng_algorithm: GARNET_RNG.to_string() }
    }
}

/// All random ingredients of one generated game.
#[derive(Debug, Clone, PartialEq)]
pub struct GarnetInstance {
    pub spec: GarnetSpec,
    /// `P0[x, a, x']`, `branching` nonzeros per row.
    pub base_p: Array3<f64>,
    /// `Gamma[x, a, x', y]`.
    pub coupling_gamma: Array4<f64>,
    pub c_p: f64,
    pub rho_p: f64,
    /// `R0[x, a]`.
    pub base_r: Array2<f64>,
    /// `M[x, y]`.
    pub interaction_m: Array2<f64>,
    pub c_r: f64,
    pub rho_r: f64,
}

fn substream(seed: u64, index: u32) -> Xoshiro256StarStar {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// Sparse random kernel: for each `(x, a)`, `b` distinct next states chosen
/// uniformly without replacement, weighted by a flat-Dirichlet draw.
pub fn sample_base_tensor<R: Rng + ?Sized>(
    n_states: usize,
    n_actions: usize,
    branching: usize,
    rng: &mut R,
) -> Result<Array3<f64>, GarnetError> {
    if branching == 0 || branching > n_states {
        return Err(GarnetError::InvalidBranching { branching, n_states });
    }
    let mut tensor = Array3::zeros((n_states, n_actions, n_states));
    for x in 0..n_states {
        for a in 0..n_actions {
            let support = rand::seq::index::sample(rng, n_states, branching);
            let weights = sample_simplex(branching, rng);
            for (next, weight) in support.iter().zip(weights) {
                tensor[[x, a, next]] = weight;
            }
        }
    }
    Ok(tensor)
}

impl GarnetInstance {
    pub fn generate(spec: &GarnetSpec) -> Result<Self, GarnetError> {
        spec.validate()?;
        let (nx, na) = (spec.n_states, spec.n_actions);
        let base_p = sample_base_tensor(nx, na, spec.branching, &mut substream(spec.seed, STREAM_BASE_P))?;

        let mut rng = substream(spec.seed, STREAM_GAMMA);
        let coupling_gamma = Array4::from_shape_simple_fn((nx, na, nx, nx), || StandardNormal.sample(&mut rng));

        let mut rng = substream(spec.seed, STREAM_SCALARS);
        let scalars: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());

        let mut rng = substream(spec.seed, STREAM_BASE_R);
        let base_r = Array2::from_shape_simple_fn((nx, na), || rng.random::<f64>());

        let mut rng = substream(spec.seed, STREAM_M);
        let mut interaction_m = Array2::from_shape_simple_fn((nx, nx), || StandardNormal.sample(&mut rng));
        if spec.symmetric_interaction {
            interaction_m = (&interaction_m + &interaction_m.t()) * 0.5;
        }

        let o = &spec.overrides;
        Ok(Self {
            spec: spec.clone(),
            base_p,
            coupling_gamma,
            c_p: o.c_p.unwrap_or(scalars[0]),
            rho_p: o.rho_p.unwrap_or(scalars[1]),
            base_r,
            interaction_m,
            c_r: o.c_r.unwrap_or(scalars[2]),
            rho_r: o.rho_r.unwrap_or(scalars[3]),
        })
    }

    /// `sum_y Gamma[x, a, x', y] mu(y)` for every `x'`.
    fn coupling(&self, x: usize, a: usize, mu: &Distribution) -> Array1<f64> {
        self.coupling_gamma.slice(ndarray::s![x, a, .., ..]).dot(mu.as_array())
    }

    fn normalize(&self, mut intensity: Vec<f64>, fallback: impl FnOnce(usize) -> Vec<f64>) -> Vec<f64> {
        let total: f64 = intensity.iter().sum();
        if total <= self.spec.epsilon {
            return fallback(intensity.len());
        }
        intensity.iter_mut().for_each(|v| *v /= total);
        intensity
    }

    /// `ReLU(c_p P0(x'|x,a) + rho_p sum_y Gamma(x,a,x',y) mu(y))`, normalized;
    /// uniform when every intensity vanishes.
    pub fn additive_intensity(&self, x: usize, a: usize, mu: &Distribution) -> Vec<f64> {
        let coupling = self.coupling(x, a, mu);
        let raw = (0..self.spec.n_states)
            .map(|next| (self.c_p * self.base_p[[x, a, next]] + self.rho_p * coupling[next]).max(0.0))
            .collect();
        self.normalize(raw, |n| vec![1.0 / n as f64; n])
    }

    /// `P0(x'|x,a) ReLU(c_p + rho_p sum_y Gamma(x,a,x',y) mu(y))`, normalized;
    /// the base row when the gate closes everywhere.
    pub fn multiplicative_intensity(&self, x: usize, a: usize, mu: &Distribution) -> Vec<f64> {
        let coupling = self.coupling(x, a, mu);
        let raw = (0..self.spec.n_states)
            .map(|next| self.base_p[[x, a, next]] * (self.c_p + self.rho_p * coupling[next]).max(0.0))
            .collect();
        self.normalize(raw, |_| self.base_row(x, a))
    }

    /// The base kernel row, renormalized.
    pub fn base_row(&self, x: usize, a: usize) -> Vec<f64> {
        let row = self.base_p.slice(ndarray::s![x, a, ..]);
        let total = row.sum();
        row.iter().map(|p| p / total).collect()
    }

    pub fn kernel_row(&self, x: usize, a: usize, mu: &Distribution) -> Vec<f64> {
        match self.spec.dynamics_structure {
            Structure::Additive => self.additive_intensity(x, a, mu),
            Structure::Multiplicative => self.multiplicative_intensity(x, a, mu),
        }
    }

    fn interaction(&self, x: usize, mu: &Distribution) -> f64 {
        self.interaction_m.row(x).dot(mu.as_array())
    }

    pub fn reward(&self, x: usize, a: usize, mu: &Distribution) -> f64 {
        let interaction = self.interaction(x, mu);
        match self.spec.reward_structure {
            Structure::Additive => self.c_r * self.base_r[[x, a]] + self.rho_r * interaction,
            Structure::Multiplicative => self.base_r[[x, a]] * (self.c_r + self.rho_r * interaction),
        }
    }
}

#[derive(Debug)]
struct GarnetDynamics {
    instance: Arc<GarnetInstance>,
}

impl GameDynamics for GarnetDynamics {
    fn transition(&self, state: usize, action: usize, mu: &Distribution, next: &mut [f64]) {
        next.copy_from_slice(&self.instance.kernel_row(state, action, mu));
    }

    fn reward(&self, state: usize, action: usize, mu: &Distribution) -> f64 {
        self.instance.reward(state, action, mu)
    }

    fn kernel_depends_on_mean_field(&self) -> bool {
        self.instance.rho_p != 0.0
    }

    fn population_reward(&self, state: usize, mu: &Distribution) -> Option<f64> {
        match self.instance.spec.reward_structure {
            Structure::Additive => Some(self.instance.rho_r * self.instance.interaction(state, mu)),
            Structure::Multiplicative => None,
        }
    }

    fn population_jacobian(&self, _mu: &Distribution) -> Option<Array2<f64>> {
        match self.instance.spec.reward_structure {
            Structure::Additive => Some(&self.instance.interaction_m * self.instance.rho_r),
            Structure::Multiplicative => None,
        }
    }
}

/// Generates the instance for `spec` and wraps it as a model.
pub fn generate(spec: &GarnetSpec) -> Result<(Arc<GarnetInstance>, MfgModel), GarnetError> {
    let instance = Arc::new(GarnetInstance::generate(spec)?);
    let dynamics = Arc::new(GarnetDynamics { instance: Arc::clone(&instance) });
    let model = MfgModel::new("garnet", spec.n_states, spec.n_actions, spec.discount, GameClass::Garnet, dynamics)
        .map_err(|e| GarnetError::InvalidSpec(e.to_string()))?;
    let params = [
        ("n_states", spec.n_states as f64),
        ("n_actions", spec.n_actions as f64),
        ("branching", spec.branching as f64),
        ("c_p", instance.c_p),
        ("rho_p", instance.rho_p),
        ("c_r", instance.c_r),
        ("rho_r", instance.rho_r),
        ("gamma", spec.discount),
    ];
    let model = model.with_params(params.iter().map(|&(k, v)| (k.to_string(), v)).collect());
    Ok((instance, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branching_extremes() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(1);
        let one_hot = sample_base_tensor(6, 2, 1, &mut rng).unwrap();
        for row in one_hot.lanes(ndarray::Axis(2)) {
            assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), 1);
            assert_eq!(row.sum(), 1.0);
        }
        let full = sample_base_tensor(6, 2, 6, &mut rng).unwrap();
        for row in full.lanes(ndarray::Axis(2)) {
            assert!(row.iter().all(|&p| p > 0.0));
        }
        assert_eq!(
            sample_base_tensor(6, 2, 7, &mut rng),
            Err(GarnetError::InvalidBranching { branching: 7, n_states: 6 })
        );
    }

    #[test]
    fn spec_validation() {
        let spec = GarnetSpec::new(4, 2, 0, Structure::Additive, Structure::Additive, 0);
        assert!(matches!(spec.validate(), Err(GarnetError::InvalidBranching { .. })));
        let spec = GarnetSpec { epsilon: 0.0, ..GarnetSpec::default() };
        assert!(matches!(spec.validate(), Err(GarnetError::InvalidSpec(_))));
    }

    #[test]
    fn shape_label_and_structure_parsing() {
        let spec = GarnetSpec::new(25, 10, 10, Structure::Additive, Structure::Multiplicative, 3);
        assert_eq!(spec.shape_label(), "25x10x10 (A/M)");
        assert_eq!("Multiplicative".parse::<Structure>().unwrap(), Structure::Multiplicative);
        assert!("both".parse::<Structure>().is_err());
    }

    #[test]
    fn degenerate_additive_row_is_uniform() {
        let spec = GarnetSpec::new(3, 1, 1, Structure::Additive, Structure::Additive, 0)
            .with_overrides(CouplingOverrides { c_p: Some(0.0), rho_p: Some(1.0), ..Default::default() });
        let mut instance = GarnetInstance::generate(&spec).unwrap();
        instance.coupling_gamma.fill(-1.0);
        let mu = Distribution::uniform(3).unwrap();
        assert_eq!(instance.additive_intensity(0, 0, &mu), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn closed_gate_falls_back_to_base_row() {
        let spec = GarnetSpec::new(4, 1, 2, Structure::Multiplicative, Structure::Additive, 5)
            .with_overrides(CouplingOverrides { c_p: Some(0.0), rho_p: Some(1.0), ..Default::default() });
        let mut instance = GarnetInstance::generate(&spec).unwrap();
        instance.coupling_gamma.fill(-1.0);
        let mu = Distribution::uniform(4).unwrap();
        assert_eq!(instance.multiplicative_intensity(2, 0, &mu), instance.base_row(2, 0));
    }
}
