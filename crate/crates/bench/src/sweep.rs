//! Hyperparameter grids over seeds, with best-configuration selection.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use toml::Value;

use crate::config::ConfigDoc;
use crate::error::HarnessError;
use crate::run::{execute_run, read_summary, write_atomic, RunOutcome, RunSpec, RunSummary, SUMMARY_FILE};

/// Two seed-means closer than this are a tie, settled by grid order.
pub const TIE_TOL: f64 = 1e-12;
pub const SWEEP_REPORT_FILE: &str = "sweep.json";

/// One point of a grid: dotted key -> value.
pub type GridPoint = BTreeMap<String, Json>;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Base document every grid point is layered onto.
    pub base: ConfigDoc,
    pub grid: BTreeMap<String, Vec<Value>>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub grid: GridPoint,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub grid: GridPoint,
    pub config_hash: Option<String>,
    pub seeds: Vec<u64>,
    pub final_exploitabilities: Vec<f64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConfig {
    pub grid: GridPoint,
    pub config_hash: String,
    pub mean: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub configs: Vec<ConfigResult>,
    pub best: Option<BestConfig>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub summaries: Vec<RunSummary>,
    pub report_path: Option<PathBuf>,
}

/// Cartesian product of the grid in key order, values in listed order.
pub fn grid_points(grid: &BTreeMap<String, Vec<Value>>) -> Result<Vec<Vec<(String, Value)>>, HarnessError> {
    let mut points = vec![vec![]];
    for (key, values) in grid {
        if values.is_empty() {
            return Err(HarnessError::Config(format!("grid `{key}` has no values")));
        }
        points = points
            .into_iter()
            .flat_map(|p: Vec<(String, Value)>| {
                values.iter().map(move |v| {
                    let mut next = p.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    Ok(points)
}

fn to_json(v: &Value) -> Json {
    serde_json::to_value(v).unwrap_or(Json::Null)
}

fn json_cmp(a: &Json, b: &Json) -> Ordering {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => match (a.as_str(), b.as_str()) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => a.to_string().cmp(&b.to_string()),
        },
    }
}

/// Lexicographic order of grid points: key by key, numbers numerically.
pub fn grid_cmp(a: &GridPoint, b: &GridPoint) -> Ordering {
    for ((ka, va), (kb, vb)) in a.iter().zip(b.iter()) {
        let ord = ka.cmp(kb).then_with(|| json_cmp(va, vb));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Best configuration from run summaries alone: lowest seed-mean final
/// exploitability, ties within [`TIE_TOL`] resolved by [`grid_cmp`].
pub fn select_best(summaries: &[RunSummary]) -> Option<BestConfig> {
    let mut groups: BTreeMap<&str, (GridPoint, Vec<f64>)> = BTreeMap::new();
    for s in summaries {
        let entry = groups
            .entry(s.config_hash.as_str())
            .or_insert_with(|| (s.grid.clone().unwrap_or_default(), Vec::new()));
        entry.1.push(s.final_exploitability);
    }
    let candidates: Vec<BestConfig> = groups
        .into_iter()
        .map(|(hash, (grid, finals))| BestConfig {
            grid,
            config_hash: hash.to_string(),
            mean: finals.iter().sum::<f64>() / finals.len() as f64,
            n_seeds: finals.len(),
        })
        .collect();
    let lowest = candidates.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
    candidates
        .into_iter()
        .filter(|c| c.mean <= lowest + TIE_TOL)
        .min_by(|a, b| grid_cmp(&a.grid, &b.grid).then_with(|| a.config_hash.cmp(&b.config_hash)))
}

/// Every `summary.json` below `root`, in path order.
pub fn load_summaries(root: &Path) -> Result<Vec<RunSummary>, HarnessError> {
    let mut paths = Vec::new();
    collect_summaries(root, &mut paths)?;
    paths.sort();
    paths.iter().map(|p| read_summary(p)).collect()
}

fn collect_summaries(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.is_dir() {
            collect_summaries(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == SUMMARY_FILE) {
            out.push(path);
        }
    }
    Ok(())
}

pub(crate) fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs every grid point on every seed. Failed runs are reported and left out
/// of the selection; the sweep itself only fails on an invalid grid.
pub fn execute_sweep(spec: &SweepSpec) -> Result<SweepOutcome, HarnessError> {
    if spec.seeds.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one seed".into()));
    }
    let points = grid_points(&spec.grid)?;

    let mut configs = Vec::with_capacity(points.len());
    let mut queue = Vec::new();
    let mut failures = Vec::new();
    for point in &points {
        let label: GridPoint = point.iter().map(|(k, v)| (k.clone(), to_json(v))).collect();
        let template = point_spec(&spec.base, point).map(|mut run| {
            run.grid = Some(label.clone());
            run
        });
        match template {
            Ok(run) => {
                for &seed in &spec.seeds {
                    queue.push((configs.len(), RunSpec { seed, ..run.clone() }));
                }
            }
            Err(e) => failures.extend(spec.seeds.iter().map(|&seed| RunFailure {
                grid: label.clone(),
                seed,
                error: e.to_string(),
            })),
        }
        configs.push(ConfigResult { grid: label, config_hash: None, seeds: vec![], final_exploitabilities: vec![], mean: None });
    }

    let pool = worker_pool(spec.jobs)?;
    let results: Vec<Result<RunOutcome, HarnessError>> =
        pool.install(|| queue.par_iter().map(|(_, run)| execute_run(run)).collect());

    let mut summaries = Vec::new();
    let mut out_root = None;
    for ((index, run), result) in queue.iter().zip(results) {
        out_root.get_or_insert_with(|| run.out_root.join(run.env.label()).join(run.algorithm.as_str()));
        let config = &mut configs[*index];
        match result {
            Ok(outcome) => {
                config.config_hash = Some(outcome.summary.config_hash.clone());
                config.seeds.push(run.seed);
                config.final_exploitabilities.push(outcome.summary.final_exploitability);
                summaries.push(outcome.summary);
            }
            Err(e) => failures.push(RunFailure { grid: config.grid.clone(), seed: run.seed, error: e.to_string() }),
        }
    }
    for c in &mut configs {
        if !c.final_exploitabilities.is_empty() {
            c.mean = Some(c.final_exploitabilities.iter().sum::<f64>() / c.final_exploitabilities.len() as f64);
        }
    }

    let report = SweepReport { configs, best: select_best(&summaries), failures };
    let report_path = match out_root {
        Some(dir) => {
            let path = dir.join(SWEEP_REPORT_FILE);
            let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
            bytes.push(b'\n');
            std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            write_atomic(&path, &bytes)?;
            Some(path)
        }
        None => None,
    };
    Ok(SweepOutcome { report, summaries, report_path })
}

fn point_spec(base: &ConfigDoc, point: &[(String, Value)]) -> Result<RunSpec, HarnessError> {
    let mut doc = base.clone();
    for (key, value) in point {
        doc.set_value(key, value.clone())?;
    }
    RunSpec::from_config(&doc.build()?)
}
