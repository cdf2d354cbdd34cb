//! Configuration-driven front end for `warpband-core`.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Command, RunConfig, Tolerances};
pub use error::ConfigError;
pub use run::{exit_code, run_config, RunOutcome, EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATED};
