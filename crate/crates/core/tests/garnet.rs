use mfg_core::garnet::{sample_base_tensor, CouplingOverrides, GarnetInstance};
use mfg_core::types::validate_distribution;
use mfg_core::{generate, Distribution, GameClass, GarnetSpec, Structure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const COMBOS: [(Structure, Structure); 4] = [
    (Structure::Additive, Structure::Additive),
    (Structure::Additive, Structure::Multiplicative),
    (Structure::Multiplicative, Structure::Additive),
    (Structure::Multiplicative, Structure::Multiplicative),
];

fn random_mu(n: usize, rng: &mut impl Rng) -> Distribution {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
    let s: f64 = w.iter().sum();
    Distribution::new(w.iter().map(|v| v / s).collect()).unwrap()
}

fn oracle_row(inst: &GarnetInstance, x: usize, a: usize, mu: &Distribution) -> Vec<f64> {
    let n = inst.spec.n_states;
    let mut raw = vec![0.0; n];
    for (next, r) in raw.iter_mut().enumerate() {
        let mut coupling = 0.0;
        for y in 0..n {
            coupling += inst.coupling_gamma[[x, a, next, y]] * mu[y];
        }
        let base = inst.base_p[[x, a, next]];
        *r = match inst.spec.dynamics_structure {
            Structure::Additive => (inst.c_p * base + inst.rho_p * coupling).max(0.0),
            Structure::Multiplicative => base * (inst.c_p + inst.rho_p * coupling).max(0.0),
        };
    }
    let total: f64 = raw.iter().sum();
    if total > inst.spec.epsilon {
        return raw.iter().map(|v| v / total).collect();
    }
    match inst.spec.dynamics_structure {
        Structure::Additive => vec![1.0 / n as f64; n],
        Structure::Multiplicative => {
            let s: f64 = (0..n).map(|y| inst.base_p[[x, a, y]]).sum();
            (0..n).map(|y| inst.base_p[[x, a, y]] / s).collect()
        }
    }
}

fn oracle_reward(inst: &GarnetInstance, x: usize, a: usize, mu: &Distribution) -> f64 {
    let mut interaction = 0.0;
    for y in 0..inst.spec.n_states {
        interaction += inst.interaction_m[[x, y]] * mu[y];
    }
    match inst.spec.reward_structure {
        Structure::Additive => inst.c_r * inst.base_r[[x, a]] + inst.rho_r * interaction,
        Structure::Multiplicative => inst.base_r[[x, a]] * (inst.c_r + inst.rho_r * interaction),
    }
}

#[test]
fn kernels_are_row_stochastic_for_every_structure() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(1);
    for (d, r) in COMBOS {
        let (_, model) = generate(&GarnetSpec::new(5, 5, 5, d, r, 0)).unwrap();
        for _ in 0..1000 {
            let (x, a) = (rng.random_range(0..5), rng.random_range(0..5));
            let mu = random_mu(5, &mut rng);
            let row = model.kernel(x, a, &mu);
            validate_distribution(&row).unwrap();
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn kernel_and_reward_match_scalar_loops() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(2);
    for (i, (d, r)) in COMBOS.into_iter().enumerate() {
        let (inst, model) = generate(&GarnetSpec::new(7, 3, 4, d, r, i as u64)).unwrap();
        for _ in 0..100 {
            let (x, a) = (rng.random_range(0..7), rng.random_range(0..3));
            let mu = random_mu(7, &mut rng);
            let got = model.kernel(x, a, &mu);
            let want = oracle_row(&inst, x, a, &mu);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
            assert!((model.reward(x, a, &mu) - oracle_reward(&inst, x, a, &mu)).abs() < 1e-12);
        }
    }
}

#[test]
fn multiplicative_rows_stay_on_base_support() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(3);
    let (inst, model) = generate(&GarnetSpec::new(10, 3, 2, Structure::Multiplicative, Structure::Additive, 4)).unwrap();
    for _ in 0..200 {
        let (x, a) = (rng.random_range(0..10), rng.random_range(0..3));
        let row = model.kernel(x, a, &random_mu(10, &mut rng));
        for (y, p) in row.iter().enumerate() {
            if inst.base_p[[x, a, y]] == 0.0 {
                assert_eq!(*p, 0.0);
            }
        }
    }
}

#[test]
fn same_seed_same_instance() {
    for (d, r) in COMBOS {
        let spec = GarnetSpec::new(6, 4, 3, d, r, 42);
        let (a, _) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(*a, *b);
        let bits = |i: &GarnetInstance| -> Vec<u64> {
            i.base_p.iter().chain(i.coupling_gamma.iter()).chain(i.base_r.iter()).map(|v| v.to_bits()).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        let (c, _) = generate(&GarnetSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(*a, *c);
    }
}

#[test]
fn zero_coupling_is_mean_field_invariant() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(4);
    let overrides = CouplingOverrides { rho_p: Some(0.0), rho_r: Some(0.0), ..Default::default() };
    for (d, r) in COMBOS {
        let (inst, model) = generate(&GarnetSpec::new(6, 3, 3, d, r, 7).with_overrides(overrides)).unwrap();
        assert!(!model.kernel_depends_on_mean_field());
        let reference = random_mu(6, &mut rng);
        for _ in 0..50 {
            let mu = random_mu(6, &mut rng);
            for x in 0..6 {
                for a in 0..3 {
                    assert_eq!(model.kernel(x, a, &mu), model.kernel(x, a, &reference));
                    assert_eq!(model.reward(x, a, &mu), model.reward(x, a, &reference));
                    let base = inst.base_row(x, a);
                    for (k, b) in model.kernel(x, a, &mu).iter().zip(&base) {
                        assert!((k - b).abs() < 1e-15);
                    }
                }
            }
        }
    }
}

#[test]
fn overrides_leave_other_draws_alone() {
    let spec = GarnetSpec::new(5, 2, 2, Structure::Additive, Structure::Additive, 9);
    let (plain, _) = generate(&spec).unwrap();
    let (forced, _) =
        generate(&spec.clone().with_overrides(CouplingOverrides { c_r: Some(0.25), ..Default::default() })).unwrap();
    assert_eq!(forced.c_r, 0.25);
    assert_eq!((plain.c_p, plain.rho_p, plain.rho_r), (forced.c_p, forced.rho_p, forced.rho_r));
    assert_eq!(plain.coupling_gamma, forced.coupling_gamma);
    assert_eq!(plain.base_r, forced.base_r);
}

#[test]
fn generated_models_carry_the_garnet_tag() {
    let (inst, model) = generate(&GarnetSpec::default()).unwrap();
    assert_eq!(model.class(), GameClass::Garnet);
    assert!((0.0..=1.0).contains(&inst.c_p) && (0.0..=1.0).contains(&inst.rho_p));
    assert!((0.0..=1.0).contains(&inst.c_r) && (0.0..=1.0).contains(&inst.rho_r));
    assert!(inst.base_r.iter().all(|v| (0.0..1.0).contains(v)));
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(generate(&GarnetSpec::new(3, 2, 4, Structure::Additive, Structure::Additive, 0)).is_err());
    assert!(generate(&GarnetSpec::new(3, 2, 0, Structure::Additive, Structure::Additive, 0)).is_err());
    assert!(generate(&GarnetSpec { epsilon: 0.0, ..GarnetSpec::default() }).is_err());
    assert!(generate(&GarnetSpec::new(0, 2, 1, Structure::Additive, Structure::Additive, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn base_tensor_rows_have_exactly_b_atoms(nx in 1usize..12, na in 1usize..4, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let b = 1 + ((nx - 1) as f64 * frac) as usize;
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let t = sample_base_tensor(nx, na, b, &mut rng).unwrap();
        for x in 0..nx {
            for a in 0..na {
                let row: Vec<f64> = (0..nx).map(|y| t[[x, a, y]]).collect();
                prop_assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), b);
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
