//! Tabular stationary mean field games: domain types, exact dynamic
//! programming, benchmark environments, random game generation and solvers.

pub mod checks;
pub mod dynamics;
pub mod envs;
pub mod error;
pub mod garnet;
pub mod model;
pub mod solvers;
pub mod types;

pub use dynamics::{
    average_policies, backward_induction_br, exploitability, exploitability_at, induced_transition_matrix, policy_evaluation_iterative,
    mean_field_step, policy_evaluation, softmax_policy, stationary_mean_field, BestResponse, BrConfig,
    Exploitability, MeanFieldConfig, PolicyValue, StationaryMeanField, TransitionMatrix,
};
pub use error::{CoreError, EnvError, GarnetError, SolverError};
pub use model::{GameClass, GameDynamics, GridLayout, MfgModel};
pub use types::{Distribution, Logits, Policy, QTable, ValueTable};
pub use garnet::{generate, GarnetInstance, GarnetSpec, Structure};
pub use solvers::{run_solver, AlgorithmId, SolverConfig, SolverTrace};
