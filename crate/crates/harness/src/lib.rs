//! Experiment harness for `mfrate-core`: configuration, Sanov and
//! mean-field decay checks, identity cross-checks, LLN trends and CSV/SVG
//! reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use commands::{execute, Command, Outcome};
pub use config::RunConfig;
pub use error::{HarnessError, Result};
