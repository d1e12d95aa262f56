//! Experiment harness: configured runs, seed sweeps and Garnet campaigns over
//! the `mfg-core` solvers, with CSV and JSON outputs.

pub mod campaign;
pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod run;
pub mod sweep;

pub use campaign::{garnet_campaign, CampaignOutcome, CampaignRow, CampaignSpec};
pub use config::{ConfigDoc, ExperimentConfig};
pub use error::HarnessError;
pub use run::{execute_run, EnvSpec, RunOutcome, RunSpec, RunSummary};
pub use sweep::{execute_sweep, load_summaries, select_best, SweepOutcome, SweepReport, SweepSpec};
