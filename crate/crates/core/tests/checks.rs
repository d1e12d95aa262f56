use std::collections::BTreeMap;

use mfg_core::checks::{
    ll_monotonicity_check, model_monotonicity, model_potential, potential_symmetry_check, Monotonicity, Symmetry,
};
use mfg_core::envs::make_env;
use mfg_core::{generate, GarnetSpec, Structure};
use ndarray::Array2;
use proptest::prelude::*;

fn env(name: &str) -> mfg_core::MfgModel {
    make_env(name, &BTreeMap::new()).unwrap()
}

#[test]
fn crowd_aversion_is_monotone() {
    assert_eq!(model_monotonicity(&env("beach_bar"), 100, 0), Some(Monotonicity::Monotone));
}

#[test]
fn crowd_seeking_violation_is_reported_with_its_witness() {
    let model = env("two_beach_bars");
    let Some(Monotonicity::ViolatedAt { mu, nu, value }) = model_monotonicity(&model, 100, 0) else {
        panic!("two bars should violate monotonicity");
    };
    let alpha = model.params()["alpha"];
    let want: f64 = (0..7).map(|x| alpha * (mu[x] - nu[x]).powi(2)).sum();
    assert!((value - want).abs() < 1e-9 * want.max(1.0));
    assert!(value > 0.0);
}

#[test]
fn separable_reward_is_required() {
    let (_, garnet) = generate(&GarnetSpec::new(4, 2, 2, Structure::Additive, Structure::Multiplicative, 0)).unwrap();
    assert_eq!(model_monotonicity(&garnet, 10, 0), None);
    assert_eq!(model_potential(&garnet, 10, 0), None);
}

#[test]
fn potential_classification() {
    let verdict = model_potential(&env("rps"), 10, 0).unwrap().unwrap();
    assert_eq!(verdict, Symmetry::NotPotential { x: 0, y: 1, gap: 2.0 });
    assert!(model_potential(&env("beach_bar"), 10, 0).unwrap().unwrap().is_potential());

    let spec = GarnetSpec { symmetric_interaction: true, ..GarnetSpec::new(8, 3, 4, Structure::Additive, Structure::Additive, 3) };
    let (inst, model) = generate(&spec).unwrap();
    assert!(model_potential(&model, 10, 0).unwrap().unwrap().is_potential());
    let m = &inst.interaction_m;
    assert!((0..8).all(|x| (0..8).all(|y| m[[x, y]] == m[[y, x]])));

    let (_, plain) = generate(&GarnetSpec { symmetric_interaction: false, ..spec }).unwrap();
    assert!(!model_potential(&plain, 10, 0).unwrap().unwrap().is_potential());
}

fn square() -> impl Strategy<Value = Array2<f64>> {
    (1usize..6).prop_flat_map(|n| {
        proptest::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| Array2::from_shape_vec((n, n), v).unwrap())
    })
}

proptest! {
    #[test]
    fn symmetrized_matrices_are_potential(a in square()) {
        let sym = &a + &a.t();
        prop_assert!(potential_symmetry_check(&sym).unwrap().is_potential());
    }

    #[test]
    fn negative_semidefinite_interactions_are_monotone(a in square(), seed in 0u64..1000) {
        // g = -B^T B mu has a negative semidefinite Jacobian.
        let n = a.nrows();
        let jac = -a.t().dot(&a);
        let model = make_env("move_forward", &BTreeMap::new()).unwrap();
        prop_assume!(model.n_states() >= n);
        let head = |mu: &mfg_core::Distribution| -> Vec<f64> { mu.as_slice()[..n].to_vec() };
        let verdict = ll_monotonicity_check(&model, |x, mu| {
            if x < n { (0..n).map(|y| jac[[x, y]] * head(mu)[y]).sum() } else { 0.0 }
        }, 20, seed);
        prop_assert!(verdict.is_monotone());
    }
}
