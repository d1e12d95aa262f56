//! Layered experiment configuration: a TOML file, then `key=value` overrides.
//!
//! Overrides use dotted paths into the document (`solver.damping=0.3`,
//! `garnet.n_states=25`). A bare key that is not a top-level field is an
//! environment parameter, so `--set C=80` is shorthand for `--set params.C=80`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mfg_core::{AlgorithmId, GarnetSpec, SolverConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::HarnessError;

pub const OUT_ENV_VAR: &str = "BENCH_MFG_OUT";
pub const DEFAULT_OUT: &str = "results";
pub const GARNET_ENV: &str = "garnet";

const TOP_LEVEL: [&str; 10] = ["env", "algo", "seed", "out", "timing", "params", "garnet", "solver", "sweep", "campaign"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: String,
    pub algo: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record wall-clock times; disable for byte-reproducible output files.
    pub timing: bool,
    pub params: BTreeMap<String, f64>,
    pub garnet: GarnetSpec,
    pub solver: SolverConfig,
    pub sweep: SweepSection,
    pub campaign: CampaignSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: String::new(),
            algo: String::new(),
            seed: 0,
            out: None,
            timing: true,
            params: BTreeMap::new(),
            garnet: GarnetSpec::default(),
            solver: SolverConfig::default(),
            sweep: SweepSection::default(),
            campaign: CampaignSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub seeds: Vec<u64>,
    /// Dotted config key -> candidate values.
    pub grid: BTreeMap<String, Vec<Value>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { seeds: vec![0, 1, 2, 3], grid: BTreeMap::new() }
    }
}

/// Instance shape of a campaign row block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarnetShape {
    pub n_states: usize,
    pub n_actions: usize,
    pub branching: usize,
    pub dynamics_structure: mfg_core::Structure,
    pub reward_structure: mfg_core::Structure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub garnet_seeds: Vec<u64>,
    pub algorithms: Vec<String>,
    /// Empty means the single shape of the `[garnet]` table.
    pub shapes: Vec<GarnetShape>,
    /// Per-algorithm solver overrides, as dotted-key tables relative to `solver`.
    pub overrides: BTreeMap<String, Table>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self { garnet_seeds: (0..10).collect(), algorithms: Vec::new(), shapes: Vec::new(), overrides: BTreeMap::new() }
    }
}

/// A configuration document before it is frozen into typed form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc(Table);

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        text.parse::<Table>().map(ConfigDoc).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies one `key=value` override; the value is read as a TOML literal,
    /// falling back to a plain string.
    pub fn set(&mut self, assignment: &str) -> Result<(), HarnessError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(HarnessError::Config(format!("override `{assignment}` has an empty key")));
        }
        self.set_value(key, parse_literal(raw.trim()))
    }

    /// Sets `key` (bare keys are environment parameters) to `value`.
    pub fn set_value(&mut self, key: &str, value: Value) -> Result<(), HarnessError> {
        self.insert(&qualify(key), value)
    }

    pub fn insert(&mut self, dotted: &str, value: Value) -> Result<(), HarnessError> {
        let parts: Vec<&str> = dotted.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields at least one part");
        let mut table = &mut self.0;
        for part in parents {
            let entry = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| HarnessError::Config(format!("`{part}` in `{dotted}` is not a table")))?;
        }
        table.insert(last.to_string(), value);
        Ok(())
    }

    pub fn build(&self) -> Result<ExperimentConfig, HarnessError> {
        Value::Table(self.0.clone()).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
    }
}

/// Routes bare keys that are not config fields to the environment parameters.
fn qualify(key: &str) -> String {
    if key.contains('.') || TOP_LEVEL.contains(&key) {
        key.to_string()
    } else {
        format!("params.{key}")
    }
}

pub fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl ExperimentConfig {
    pub fn algorithm(&self) -> Result<AlgorithmId, HarnessError> {
        if self.algo.is_empty() {
            return Err(HarnessError::Config("no algorithm given (`algo`)".into()));
        }
        Ok(self.algo.parse()?)
    }

    /// Output root: explicit setting, then `BENCH_MFG_OUT`, then `results`.
    pub fn out_root(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn is_garnet(&self) -> bool {
        self.env == GARNET_ENV
    }
}
