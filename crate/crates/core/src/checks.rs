//! Structural class checkers: Lasry-Lions monotonicity and potential symmetry.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::CoreError;
use crate::model::MfgModel;
use crate::types::Distribution;

/// A monotonicity sum above this counts as a violation.
pub const MONOTONICITY_TOL: f64 = 1e-10;
/// Largest asymmetry `|A_xy - A_yx|` still accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Uniform sample from the probability simplex with `n` vertices
/// (sorted-uniform spacings, i.e. a flat Dirichlet).
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.push(1.0);
    let mut previous = 0.0;
    cuts.iter()
        .map(|&c| {
            let gap = c - previous;
            previous = c;
            gap
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Monotonicity {
    Monotone,
    ViolatedAt { mu: Distribution, nu: Distribution, value: f64 },
}

impl Monotonicity {
    pub fn is_monotone(&self) -> bool {
        matches!(self, Monotonicity::Monotone)
    }
}

/// Samples `trials` pairs `(mu, nu)` and returns the first pair where
/// `sum_x (g(x, mu) - g(x, nu)) (mu(x) - nu(x))` exceeds [`MONOTONICITY_TOL`].
pub fn ll_monotonicity_check<G>(model: &MfgModel, g: G, trials: usize, seed: u64) -> Monotonicity
where
    G: Fn(usize, &Distribution) -> f64,
{
    let n = model.n_states();
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..trials {
        let mu = Distribution::from_array_unchecked(sample_simplex(n, &mut rng).into());
        let nu = Distribution::from_array_unchecked(sample_simplex(n, &mut rng).into());
        let value: f64 = (0..n).map(|x| (g(x, &mu) - g(x, &nu)) * (mu[x] - nu[x])).sum();
        if value > MONOTONICITY_TOL {
            return Monotonicity::ViolatedAt { mu, nu, value };
        }
    }
    Monotonicity::Monotone
}

/// Runs [`ll_monotonicity_check`] on the model's own population reward term,
/// or `None` when the reward is not separable.
pub fn model_monotonicity(model: &MfgModel, trials: usize, seed: u64) -> Option<Monotonicity> {
    let probe = Distribution::uniform(model.n_states()).ok()?;
    model.dynamics().population_reward(0, &probe)?;
    let dynamics = model.dynamics();
    Some(ll_monotonicity_check(
        model,
        |x, mu| dynamics.population_reward(x, mu).unwrap_or(0.0),
        trials,
        seed,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Symmetry {
    Potential,
    NotPotential { x: usize, y: usize, gap: f64 },
}

impl Symmetry {
    pub fn is_potential(&self) -> bool {
        matches!(self, Symmetry::Potential)
    }
}

/// Symmetry test of the interaction Jacobian of `g(x, mu) = [A mu]_x`.
///
/// Reports the pair with the largest asymmetry, first in row-major order on ties.
pub fn potential_symmetry_check(a: &Array2<f64>) -> Result<Symmetry, CoreError> {
    if a.nrows() != a.ncols() {
        return Err(CoreError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    let mut worst: Option<(usize, usize, f64)> = None;
    for x in 0..n {
        for y in (x + 1)..n {
            let gap = (a[[x, y]] - a[[y, x]]).abs();
            if gap > worst.map_or(SYMMETRY_TOL, |w| w.2) {
                worst = Some((x, y, gap));
            }
        }
    }
    Ok(match worst {
        Some((x, y, gap)) => Symmetry::NotPotential { x, y, gap },
        None => Symmetry::Potential,
    })
}

/// Runs [`potential_symmetry_check`] on the model's interaction Jacobian at
/// the uniform distribution and at `trials` sampled ones, or `None` when the
/// model exposes no Jacobian.
pub fn model_potential(model: &MfgModel, trials: usize, seed: u64) -> Option<Result<Symmetry, CoreError>> {
    let dynamics = model.dynamics();
    let n = model.n_states();
    let uniform = Distribution::uniform(n).ok()?;
    dynamics.population_jacobian(&uniform)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let probes = std::iter::once(uniform)
        .chain((0..trials).map(|_| Distribution::from_array_unchecked(sample_simplex(n, &mut rng).into())));
    for mu in probes {
        let jacobian = dynamics.population_jacobian(&mu)?;
        match potential_symmetry_check(&jacobian) {
            Ok(Symmetry::Potential) => {}
            other => return Some(other),
        }
    }
    Some(Ok(Symmetry::Potential))
}
