//! Command-line front end of `bench-mfg`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mfg_core::envs::ENV_NAMES;
use toml::Value;

use crate::campaign::{garnet_campaign, CampaignSpec};
use crate::check::check_env;
use crate::config::ConfigDoc;
use crate::error::HarnessError;
use crate::run::{execute_run, format_real, EnvSpec, RunSpec};
use crate::sweep::{execute_sweep, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "bench-mfg", version, about = "Benchmark solvers on stationary discrete mean field games")]
pub struct Cli {
    /// Output root (overrides the config and BENCH_MFG_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and campaigns.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Solver seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver on one game.
    Run(ConfigArgs),
    /// Run the `[sweep]` grid over its seeds and select the best configuration.
    Sweep(ConfigArgs),
    /// Run the `[campaign]` over Garnet instances and write garnet_table.csv.
    Garnet(ConfigArgs),
    /// Print the registered environment names.
    ListEnvs,
    /// Report structural properties of an environment.
    Check {
        #[arg(long)]
        env: String,
        /// Environment parameter `key=value` (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long)]
    pub algo: Option<String>,
    /// Dotted `key=value` override (repeatable); bare keys are env parameters.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Write zero wall times so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

impl Cli {
    fn document(&self, args: &ConfigArgs) -> Result<ConfigDoc, HarnessError> {
        let mut doc = match &args.config {
            Some(path) => ConfigDoc::load(path)?,
            None => ConfigDoc::default(),
        };
        if let Some(env) = &args.env {
            doc.insert("env", Value::String(env.clone()))?;
        }
        if let Some(algo) = &args.algo {
            doc.insert("algo", Value::String(algo.clone()))?;
        }
        for s in &args.sets {
            doc.set(s)?;
        }
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).map_err(|_| HarnessError::Config(format!("seed {seed} is too large")))?;
            doc.insert("seed", Value::Integer(seed))?;
        }
        if let Some(out) = &self.out {
            doc.insert("out", Value::String(out.to_string_lossy().into_owned()))?;
        }
        if args.no_timing {
            doc.insert("timing", Value::Boolean(false))?;
        }
        Ok(doc)
    }
}

/// Executes the parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.command {
        Command::Run(args) => {
            let spec = RunSpec::from_config(&cli.document(args)?.build()?)?;
            let outcome = execute_run(&spec)?;
            let s = &outcome.summary;
            println!("env: {}  algo: {}  seed: {}  hash: {}", s.env, s.algo, s.seed, s.config_hash);
            println!("iterations: {}  final exploitability: {}", s.iterations, format_real(s.final_exploitability));
            println!("output: {}", outcome.dir.display());
            Ok(0)
        }
        Command::Sweep(args) => {
            let base = cli.document(args)?;
            let cfg = base.build()?;
            let spec = SweepSpec { base, grid: cfg.sweep.grid, seeds: cfg.sweep.seeds, jobs: cli.jobs };
            let outcome = execute_sweep(&spec)?;
            for c in &outcome.report.configs {
                let mean = c.mean.map_or("-".to_string(), format_real);
                println!("{}  mean {}  seeds {}", serde_json::to_string(&c.grid).unwrap_or_default(), mean, c.seeds.len());
            }
            for f in &outcome.report.failures {
                eprintln!("failed: {} seed {}: {}", serde_json::to_string(&f.grid).unwrap_or_default(), f.seed, f.error);
            }
            match &outcome.report.best {
                Some(best) => println!(
                    "best: {} (hash {}, mean {})",
                    serde_json::to_string(&best.grid).unwrap_or_default(),
                    best.config_hash,
                    format_real(best.mean)
                ),
                None => println!("best: none"),
            }
            if let Some(path) = &outcome.report_path {
                println!("report: {}", path.display());
            }
            Ok(if outcome.report.failures.is_empty() { 0 } else { 1 })
        }
        Command::Garnet(args) => {
            let cfg = cli.document(args)?.build()?;
            let outcome = garnet_campaign(&CampaignSpec::from_config(&cfg, cli.jobs)?)?;
            for r in &outcome.rows {
                println!(
                    "{:<16} {} {}/{}  mean {}  std {}  n {}",
                    r.algorithm.as_str(),
                    r.shape,
                    r.dynamics_structure.letter(),
                    r.reward_structure.letter(),
                    format_real(r.mean),
                    format_real(r.std),
                    r.n
                );
            }
            for (algo, spec, error) in &outcome.failures {
                eprintln!("failed: {algo} garnet seed {}: {error}", spec.seed);
            }
            println!("table: {}", outcome.table_path.display());
            Ok(if outcome.failures.is_empty() { 0 } else { 1 })
        }
        Command::ListEnvs => {
            for name in ENV_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Check { env, sets } => {
            let mut doc = ConfigDoc::default();
            doc.insert("env", Value::String(env.clone()))?;
            for s in sets {
                doc.set(s)?;
            }
            print!("{}", check_env(&EnvSpec::from_config(&doc.build()?)?)?);
            Ok(0)
        }
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main_exit_code() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
