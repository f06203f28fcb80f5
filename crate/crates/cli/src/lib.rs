//! Reproducible, config-driven runs over the krick library.

pub mod config;
pub mod numbers;
pub mod output;
pub mod run;

pub use config::{Budget, Command, RunConfig};
pub use run::{run, RunReport};
