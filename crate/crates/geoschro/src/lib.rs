//! Command-line front end for `geoschro-core`: scenario configuration,
//! JSON/JSON Lines output formats, the verification suites and plotting
//! helpers.

pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod verify;

pub use config::{parse_config, Scenario};
pub use error::CliError;
pub use run::{emit_plot_script, run_reduce, run_simulate, Summary};
pub use verify::{run_verify, VerifyOptions, VerifyReport};
