//! Command-line runner: configuration, input construction, report bundles.

pub mod bundle;
pub mod cli;
pub mod commands;
pub mod config;
pub mod input;

pub use bundle::{Bundle, Report, Verdict};
pub use cli::{run, run_config, EXIT_PASS, EXIT_VERDICT};
pub use commands::{execute, Command, Outcome, ScanKind};
pub use config::{ItoSettings, Method, RunConfig, Thresholds};
pub use input::InputSpec;
