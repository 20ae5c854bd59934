//! Command-line orchestration for `langevin-core`: configs, runs, CSV output
//! and manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod plot;

pub use commands::{execute, Command, Invocation, Outcome};
pub use config::Config;
pub use error::{HarnessError, Result};
pub use manifest::RunManifest;
