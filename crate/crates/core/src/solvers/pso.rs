//! Mean-field particle swarm optimization: black-box minimization of the
//! exploitability over policy logits.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::{sample_logits, AlgorithmId, Recorder, SolverConfig, SolverTrace};
use crate::dynamics::{exploitability, softmax_policy};
use crate::error::SolverError;
use crate::model::MfgModel;

/// Particle positions, velocities and best-so-far bookkeeping.
///
/// Personal-best fitness is cached, never re-evaluated. The global best is
/// updated as soon as a particle improves on it, so later particles in the
/// same sweep are already attracted to it.
#[derive(Debug, Clone)]
pub struct Swarm {
    positions: Vec<Array2<f64>>,
    velocities: Vec<Array2<f64>>,
    personal_best: Vec<Array2<f64>>,
    personal_fitness: Vec<f64>,
    global_best: Array2<f64>,
    global_fitness: f64,
    inertia: f64,
    cognitive: f64,
    social: f64,
    rng: Xoshiro256StarStar,
}

impl Swarm {
    /// Evaluates every starting position; velocities start at zero.
    pub fn new<F, E>(
        positions: Vec<Array2<f64>>,
        (inertia, cognitive, social): (f64, f64, f64),
        seed: u64,
        mut fitness: F,
    ) -> Result<Self, E>
    where
        F: FnMut(&Array2<f64>) -> Result<f64, E>,
    {
        assert!(!positions.is_empty(), "a swarm needs at least one particle");
        let personal_fitness = positions.iter().map(&mut fitness).collect::<Result<Vec<_>, E>>()?;
        let mut best = 0;
        for (i, &f) in personal_fitness.iter().enumerate() {
            if f < personal_fitness[best] {
                best = i;
            }
        }
        let velocities = positions.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
        Ok(Self {
            global_best: positions[best].clone(),
            global_fitness: personal_fitness[best],
            personal_best: positions.clone(),
            personal_fitness,
            positions,
            velocities,
            inertia,
            cognitive,
            social,
            rng: Xoshiro256StarStar::seed_from_u64(seed),
        })
    }

    /// One sweep over all particles.
    pub fn step<F, E>(&mut self, mut fitness: F) -> Result<(), E>
    where
        F: FnMut(&Array2<f64>) -> Result<f64, E>,
    {
        for i in 0..self.positions.len() {
            let shape = self.positions[i].raw_dim();
            let r1 = Array2::from_shape_simple_fn(shape.clone(), || self.rng.random::<f64>());
            let r2 = Array2::from_shape_simple_fn(shape, || self.rng.random::<f64>());
            let theta = &self.positions[i];
            let velocity = &self.velocities[i] * self.inertia
                + &(r1 * (&self.personal_best[i] - theta)) * self.cognitive
                + &(r2 * (&self.global_best - theta)) * self.social;
            let moved = theta + &velocity;
            self.velocities[i] = velocity;
            self.positions[i] = moved;

            let value = fitness(&self.positions[i])?;
            if value < self.personal_fitness[i] {
                self.personal_best[i] = self.positions[i].clone();
                self.personal_fitness[i] = value;
            }
            if value < self.global_fitness {
                self.global_best = self.positions[i].clone();
                self.global_fitness = value;
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> &[Array2<f64>] {
        &self.positions
    }

    pub fn personal_fitness(&self) -> &[f64] {
        &self.personal_fitness
    }

    pub fn global_best(&self) -> &Array2<f64> {
        &self.global_best
    }

    pub fn global_fitness(&self) -> f64 {
        self.global_fitness
    }

    /// Largest Frobenius distance from a particle to the global best.
    pub fn spread(&self) -> f64 {
        self.positions
            .iter()
            .map(|p| (p - &self.global_best).mapv(|v| v * v).sum().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Particles start at standard-normal logits drawn from the `init_seed`
/// generator advanced by one jump; the velocity noise uses two jumps.
pub fn solve_mf_pso(model: &MfgModel, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let mut rec = Recorder::new(model, cfg, AlgorithmId::MfPso)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.init_seed);
    rng.jump();
    let positions = (0..cfg.particles).map(|_| sample_logits(model.n_states(), model.n_actions(), &mut rng)).collect();
    rng.jump();
    let noise_seed = rng.random::<u64>();

    let fitness = |logits: &Array2<f64>| -> Result<f64, SolverError> {
        let pi = softmax_policy(logits, cfg.temperature)?;
        Ok(exploitability(model, &pi, &cfg.mean_field, &cfg.best_response)?.value)
    };
    let mut swarm = Swarm::new(positions, (cfg.inertia, cfg.cognitive, cfg.social), noise_seed, fitness)?;
    log_best(&mut rec, &swarm, 0, cfg)?;
    for k in 1..=cfg.iterations {
        swarm.step(fitness)?;
        log_best(&mut rec, &swarm, k, cfg)?;
    }
    let pi = softmax_policy(swarm.global_best(), cfg.temperature)?;
    let mu = rec.stationary(&pi)?;
    Ok(rec.finish(pi, mu))
}

fn log_best(rec: &mut Recorder<'_>, swarm: &Swarm, k: usize, cfg: &SolverConfig) -> Result<(), SolverError> {
    if rec.should_log(k) {
        let pi = softmax_policy(swarm.global_best(), cfg.temperature)?;
        let mu = rec.stationary(&pi)?;
        rec.push(k, swarm.global_fitness(), &pi, &mu);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(target: f64) -> impl FnMut(&Array2<f64>) -> Result<f64, ()> {
        move |p: &Array2<f64>| Ok(p.iter().map(|v| (v - target).powi(2)).sum())
    }

    #[test]
    fn coincident_particles_never_move() {
        let start = Array2::from_elem((2, 3), 0.7);
        let mut swarm = Swarm::new(vec![start.clone(); 4], (0.9, 2.0, 2.0), 1, quadratic(0.0)).unwrap();
        for _ in 0..5 {
            swarm.step(quadratic(0.0)).unwrap();
        }
        assert!(swarm.positions().iter().all(|p| *p == start));
    }

    #[test]
    fn global_best_never_worsens() {
        let positions = (0..5).map(|i| Array2::from_elem((2, 2), i as f64)).collect();
        let mut swarm = Swarm::new(positions, (0.7, 1.5, 1.5), 3, quadratic(2.5)).unwrap();
        let mut last = swarm.global_fitness();
        for _ in 0..30 {
            swarm.step(quadratic(2.5)).unwrap();
            assert!(swarm.global_fitness() <= last);
            last = swarm.global_fitness();
        }
        assert!(last < 1e-2);
    }
}
