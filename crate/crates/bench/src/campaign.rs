//! Garnet campaigns: every algorithm on every instance seed, aggregated per shape.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mfg_core::{AlgorithmId, GarnetSpec, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GarnetShape};
use crate::error::HarnessError;
use crate::run::{execute_run, format_real, write_atomic, EnvSpec, RunSpec};
use crate::sweep::worker_pool;

pub const TABLE_FILE: &str = "garnet_table.csv";
pub const TABLE_HEADER: &str = "algorithm,shape,dynamics_structure,reward_structure,mean,std,n";

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    /// Instance template; shape and seed are overwritten per run.
    pub template: GarnetSpec,
    pub shapes: Vec<GarnetShape>,
    pub garnet_seeds: Vec<u64>,
    pub algorithms: Vec<(AlgorithmId, SolverConfig)>,
    /// Solver seed shared by every run.
    pub seed: u64,
    pub out_root: PathBuf,
    pub timing: bool,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub algorithm: AlgorithmId,
    pub shape: String,
    pub dynamics_structure: mfg_core::Structure,
    pub reward_structure: mfg_core::Structure,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub final_exploitabilities: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub rows: Vec<CampaignRow>,
    pub failures: Vec<(AlgorithmId, GarnetSpec, String)>,
    pub table_path: PathBuf,
}

impl CampaignSpec {
    pub fn from_config(cfg: &ExperimentConfig, jobs: usize) -> Result<Self, HarnessError> {
        let c = &cfg.campaign;
        if c.algorithms.is_empty() || c.garnet_seeds.is_empty() {
            return Err(HarnessError::Config("campaign needs algorithms and garnet_seeds".into()));
        }
        let mut algorithms = Vec::new();
        for name in &c.algorithms {
            let id: AlgorithmId = name.parse()?;
            let solver = match c.overrides.get(name) {
                Some(table) => merge_solver(&cfg.solver, table)?,
                None => cfg.solver.clone(),
            };
            algorithms.push((id, solver));
        }
        for name in c.overrides.keys() {
            if !c.algorithms.contains(name) {
                return Err(HarnessError::Config(format!("overrides for `{name}`, which is not in the campaign")));
            }
        }
        let t = &cfg.garnet;
        let shapes = if c.shapes.is_empty() {
            vec![GarnetShape {
                n_states: t.n_states,
                n_actions: t.n_actions,
                branching: t.branching,
                dynamics_structure: t.dynamics_structure,
                reward_structure: t.reward_structure,
            }]
        } else {
            c.shapes.clone()
        };
        Ok(Self {
            template: cfg.garnet.clone(),
            shapes,
            garnet_seeds: c.garnet_seeds.clone(),
            algorithms,
            seed: cfg.seed,
            out_root: cfg.out_root(),
            timing: cfg.timing,
            jobs,
        })
    }

    fn instance(&self, shape: &GarnetShape, seed: u64) -> GarnetSpec {
        GarnetSpec {
            n_states: shape.n_states,
            n_actions: shape.n_actions,
            branching: shape.branching,
            dynamics_structure: shape.dynamics_structure,
            reward_structure: shape.reward_structure,
            seed,
            ..self.template.clone()
        }
    }
}

fn merge_solver(base: &SolverConfig, table: &toml::Table) -> Result<SolverConfig, HarnessError> {
    let mut merged = toml::Table::try_from(base).map_err(|e| HarnessError::Config(e.to_string()))?;
    for (k, v) in table {
        merged.insert(k.clone(), v.clone());
    }
    toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
}

pub fn shape_label(shape: &GarnetShape) -> String {
    format!("{}x{}x{}", shape.n_states, shape.n_actions, shape.branching)
}

/// Sample mean and `n - 1` standard deviation; a single value has std 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn garnet_campaign(spec: &CampaignSpec) -> Result<CampaignOutcome, HarnessError> {
    let mut queue = Vec::new();
    for shape in &spec.shapes {
        for (algorithm, solver) in &spec.algorithms {
            for &g in &spec.garnet_seeds {
                queue.push(RunSpec {
                    env: EnvSpec::Garnet { spec: spec.instance(shape, g) },
                    algorithm: *algorithm,
                    solver: solver.clone(),
                    seed: spec.seed,
                    out_root: spec.out_root.clone(),
                    timing: spec.timing,
                    grid: None,
                });
            }
        }
    }
    let pool = worker_pool(spec.jobs)?;
    let results: Vec<_> = pool.install(|| queue.par_iter().map(execute_run).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let per_row = spec.garnet_seeds.len();
    for (block, (runs, outcomes)) in queue.chunks(per_row).zip(results.chunks(per_row)).enumerate() {
        let shape = &spec.shapes[block / spec.algorithms.len()];
        let algorithm = runs[0].algorithm;
        let mut finals = Vec::new();
        for (run, outcome) in runs.iter().zip(outcomes) {
            match outcome {
                Ok(o) => finals.push(o.summary.final_exploitability),
                Err(e) => {
                    let EnvSpec::Garnet { spec: g } = &run.env else { unreachable!("campaign runs are garnets") };
                    failures.push((algorithm, g.clone(), e.to_string()));
                }
            }
        }
        let (mean, std) = mean_std(&finals);
        rows.push(CampaignRow {
            algorithm,
            shape: shape_label(shape),
            dynamics_structure: shape.dynamics_structure,
            reward_structure: shape.reward_structure,
            mean,
            std,
            n: finals.len(),
            final_exploitabilities: finals,
        });
    }
    let table_path = spec.out_root.join(TABLE_FILE);
    write_table(&table_path, &rows)?;
    Ok(CampaignOutcome { rows, failures, table_path })
}

pub fn table_csv(rows: &[CampaignRow]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.shape,
            r.dynamics_structure.as_str(),
            r.reward_structure.as_str(),
            format_real(r.mean),
            format_real(r.std),
            r.n
        );
    }
    out
}

fn write_table(path: &Path, rows: &[CampaignRow]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    write_atomic(path, table_csv(rows).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn overrides_merge_onto_solver() {
        let base = SolverConfig::default();
        let table: toml::Table = "temperature = 0.05\nparticles = 20".parse().unwrap();
        let merged = merge_solver(&base, &table).unwrap();
        assert_eq!((merged.temperature, merged.particles), (0.05, 20));
        assert_eq!(merged.iterations, base.iterations);
        let bad: toml::Table = "temperatur = 0.05".parse().unwrap();
        assert!(merge_solver(&base, &bad).is_err());
    }
}
