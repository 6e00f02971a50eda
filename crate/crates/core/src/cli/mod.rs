//! Configuration-driven experiments behind the `sp-ground` binary.

mod config;
mod run;

pub use config::{
    bubble_grid, log_range, parse_config, parse_config_for, BubbleConfig, CertificateConfig, ContinuationConfig,
    Experiment, GridConfig, PotentialConfig, ProbeConfig, ProblemConfig, RunConfig,
};
pub use run::{
    exit_code_for, run, RunOutcome, EXIT_CHECK_FAILED, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK,
};
