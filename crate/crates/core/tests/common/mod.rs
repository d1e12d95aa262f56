//! Independent reference implementations: plain loops over `Vec<f64>`,
//! no ndarray or nalgebra.

#![allow(dead_code)]

use mfg_core::{Distribution, MfgModel, Policy};

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-14, "singular system");
        for k in 0..n {
            a[col][k] /= p;
        }
        b[col] /= p;
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col];
                for k in 0..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    b
}

/// `P_pi(x, x') = sum_a pi(a|x) p(x'|x, a, mu)` by direct summation.
pub fn induced_matrix(model: &MfgModel, mu: &Distribution, pi: &Policy) -> Vec<Vec<f64>> {
    let n = model.n_states();
    let mut m = vec![vec![0.0; n]; n];
    for (x, row) in m.iter_mut().enumerate() {
        for a in 0..model.n_actions() {
            let next = model.kernel(x, a, mu);
            for (y, p) in next.iter().enumerate() {
                row[y] += pi.prob(x, a) * p;
            }
        }
    }
    m
}

/// `V = (I - gamma P_pi)^{-1} r_pi`.
pub fn evaluate(model: &MfgModel, mu: &Distribution, pi: &Policy) -> Vec<f64> {
    let n = model.n_states();
    let gamma = model.discount();
    let p = induced_matrix(model, mu, pi);
    let mut a = vec![vec![0.0; n]; n];
    let mut r = vec![0.0; n];
    for x in 0..n {
        for y in 0..n {
            a[x][y] = if x == y { 1.0 } else { 0.0 } - gamma * p[x][y];
        }
        r[x] = (0..model.n_actions()).map(|u| pi.prob(x, u) * model.reward(x, u, mu)).sum();
    }
    gauss_jordan(a, r)
}

/// Every deterministic policy, as action lists.
pub fn all_deterministic(n_states: usize, n_actions: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n_states {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..n_actions).map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

/// Statewise maximum of `V^pi` over all deterministic policies.
pub fn brute_force_optimal_values(model: &MfgModel, mu: &Distribution) -> Vec<f64> {
    let mut best = vec![f64::NEG_INFINITY; model.n_states()];
    for actions in all_deterministic(model.n_states(), model.n_actions()) {
        let pi = Policy::deterministic(&actions, model.n_actions()).unwrap();
        for (b, v) in best.iter_mut().zip(evaluate(model, mu, &pi)) {
            *b = b.max(v);
        }
    }
    best
}

/// Stationary distribution of a fixed, irreducible chain from the linear
/// system `mu (P - I) = 0`, `sum mu = 1`.
pub fn stationary_of(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n - 1 {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    b[n - 1] = 1.0;
    gauss_jordan(a, b)
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
