//! Command-line front end: TOML run configurations in, JSON, text and CSV
//! reports out, with stable exit codes.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, serialize_config, RunConfig};
pub use error::CliError;
pub use report::Report;
pub use run::{run, selftest};
