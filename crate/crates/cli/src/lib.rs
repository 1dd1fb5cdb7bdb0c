//! Configuration, parameter sweeps and table output for the `epsense`
//! command-line tool.

pub mod check;
pub mod config;
pub mod output;
pub mod sweep;

pub use config::{validate_config, ConfigError, SweepConfig};
pub use output::{emit, Format};
pub use sweep::{run_sweep, SweepResult};
