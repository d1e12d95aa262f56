//! One solver run: build the game, solve, persist the trace and equilibrium.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use mfg_core::envs::make_env;
use mfg_core::garnet::GARNET_RNG;
use mfg_core::{generate, run_solver, AlgorithmId, GarnetSpec, GridLayout, MfgModel, SolverConfig, SolverTrace};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, GARNET_ENV};
use crate::error::HarnessError;

pub const METRICS_FILE: &str = "metrics.csv";
pub const MEAN_FIELD_FILE: &str = "mean_field.csv";
pub const POLICY_FILE: &str = "policy.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const METRICS_HEADER: &str = "iteration,exploitability,wall_time_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    Named { name: String, params: BTreeMap<String, f64> },
    Garnet { spec: GarnetSpec },
}

impl EnvSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        if cfg.is_garnet() {
            if !cfg.params.is_empty() {
                return Err(HarnessError::Config("garnet instances take `garnet.*` keys, not env params".into()));
            }
            Ok(EnvSpec::Garnet { spec: cfg.garnet.clone() })
        } else if cfg.env.is_empty() {
            Err(HarnessError::Config("no environment given (`env`)".into()))
        } else {
            Ok(EnvSpec::Named { name: cfg.env.clone(), params: cfg.params.clone() })
        }
    }

    pub fn label(&self) -> &str {
        match self {
            EnvSpec::Named { name, .. } => name,
            EnvSpec::Garnet { .. } => GARNET_ENV,
        }
    }

    pub fn build(&self) -> Result<MfgModel, HarnessError> {
        match self {
            EnvSpec::Named { name, params } => Ok(make_env(name, params)?),
            EnvSpec::Garnet { spec } => Ok(generate(spec)?.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub env: EnvSpec,
    pub algorithm: AlgorithmId,
    /// `init_seed` is replaced by `seed` at run time.
    pub solver: SolverConfig,
    pub seed: u64,
    pub out_root: PathBuf,
    pub timing: bool,
    /// Grid coordinates when the run belongs to a sweep.
    pub grid: Option<BTreeMap<String, Json>>,
}

impl RunSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        Ok(Self {
            env: EnvSpec::from_config(cfg)?,
            algorithm: cfg.algorithm()?,
            solver: cfg.solver.clone(),
            seed: cfg.seed,
            out_root: cfg.out_root(),
            timing: cfg.timing,
            grid: None,
        })
    }

    fn seeded_solver(&self) -> SolverConfig {
        SolverConfig { init_seed: self.seed, ..self.solver.clone() }
    }

    pub fn run_dir(&self, config_hash: &str) -> PathBuf {
        self.out_root
            .join(self.env.label())
            .join(self.algorithm.as_str())
            .join(config_hash)
            .join(self.seed.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub env: String,
    /// Every environment parameter after defaults (sampled scalars for Garnets).
    pub params: BTreeMap<String, f64>,
    pub algo: AlgorithmId,
    pub config: SolverConfig,
    pub seed: u64,
    pub final_exploitability: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub config_hash: String,
    pub rng_algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garnet: Option<GarnetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<GridLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BTreeMap<String, Json>>,
}

#[derive(Serialize)]
struct HashInput<'a> {
    env: &'a str,
    params: &'a BTreeMap<String, f64>,
    garnet: Option<&'a GarnetSpec>,
    algo: AlgorithmId,
    solver: &'a SolverConfig,
}

/// Hex SHA-256 prefix of the canonical JSON of everything that defines a run
/// except its seed and output location.
pub fn config_hash(model: &MfgModel, env: &EnvSpec, algorithm: AlgorithmId, solver: &SolverConfig) -> String {
    let garnet = match env {
        EnvSpec::Garnet { spec } => Some(spec),
        EnvSpec::Named { .. } => None,
    };
    let solver = SolverConfig { init_seed: 0, ..solver.clone() };
    let input = HashInput { env: env.label(), params: model.params(), garnet, algo: algorithm, solver: &solver };
    let bytes = serde_json::to_vec(&input).expect("hash input serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub dir: PathBuf,
    pub trace: SolverTrace,
}

pub fn execute_run(spec: &RunSpec) -> Result<RunOutcome, HarnessError> {
    let model = spec.env.build()?;
    let solver = spec.seeded_solver();
    let mut trace = run_solver(&model, spec.algorithm, &solver)?;
    if !spec.timing {
        trace = trace.without_timing();
    }
    let final_exploitability = trace.final_exploitability();
    if !final_exploitability.is_finite() {
        return Err(HarnessError::NonFinite(final_exploitability));
    }
    let hash = config_hash(&model, &spec.env, spec.algorithm, &spec.solver);
    let summary = RunSummary {
        env: spec.env.label().to_string(),
        params: model.params().clone(),
        algo: spec.algorithm,
        config: solver,
        seed: spec.seed,
        final_exploitability,
        iterations: trace.iterations(),
        wall_time_ms: trace.total_wall_time_ms(),
        config_hash: hash.clone(),
        rng_algorithm: GARNET_RNG.to_string(),
        garnet: match &spec.env {
            EnvSpec::Garnet { spec } => Some(spec.clone()),
            EnvSpec::Named { .. } => None,
        },
        layout: model.layout().cloned(),
        grid: spec.grid.clone(),
    };
    let dir = spec.run_dir(&hash);
    write_outputs(&dir, &trace, &summary)?;
    Ok(RunOutcome { summary, dir, trace })
}

fn write_outputs(dir: &Path, trace: &SolverTrace, summary: &RunSummary) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_atomic(&dir.join(METRICS_FILE), metrics_csv(trace).as_bytes())?;
    write_atomic(&dir.join(MEAN_FIELD_FILE), csv_row(trace.final_mean_field.as_slice()).as_bytes())?;
    let policy: String =
        trace.final_policy.as_array().rows().into_iter().map(|r| csv_row(&r.to_vec())).collect();
    write_atomic(&dir.join(POLICY_FILE), policy.as_bytes())?;
    let mut json = serde_json::to_vec_pretty(summary).expect("summary serializes");
    json.push(b'\n');
    write_atomic(&dir.join(SUMMARY_FILE), &json)
}

/// Writes into a temporary file in the target directory, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(values: &[f64]) -> String {
    let mut line = values.iter().map(|v| format_real(*v)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub fn metrics_csv(trace: &SolverTrace) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(out, "{},{},{}", r.iteration, format_real(r.exploitability), format_real(r.wall_time_ms));
    }
    out
}

pub fn read_summary(path: &Path) -> Result<RunSummary, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, 0.0] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn hash_ignores_seed_only() {
        let env = EnvSpec::Named { name: "coordination".into(), params: BTreeMap::new() };
        let model = env.build().unwrap();
        let base = SolverConfig::default();
        let a = config_hash(&model, &env, AlgorithmId::PureFp, &base);
        let b = config_hash(&model, &env, AlgorithmId::PureFp, &SolverConfig { init_seed: 9, ..base.clone() });
        let c = config_hash(&model, &env, AlgorithmId::PureFp, &SolverConfig { damping: 0.1, ..base.clone() });
        let d = config_hash(&model, &env, AlgorithmId::DampedFp, &base);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn explicit_defaults_hash_like_implicit_ones() {
        let implicit = EnvSpec::Named { name: "sis".into(), params: BTreeMap::new() };
        let explicit = EnvSpec::Named { name: "sis".into(), params: BTreeMap::from([("beta".to_string(), 0.5)]) };
        let cfg = SolverConfig::default();
        let h1 = config_hash(&implicit.build().unwrap(), &implicit, AlgorithmId::Omd, &cfg);
        let h2 = config_hash(&explicit.build().unwrap(), &explicit, AlgorithmId::Omd, &cfg);
        assert_eq!(h1, h2);
    }
}
