//! Command-line front end for `rpf-core`: JSON problem files, CSV curves and
//! the bundled acceptance runs.

pub mod cli;
pub mod error;
pub mod grid;
pub mod output;
pub mod paper_check;
pub mod parallel;
pub mod reports;
pub mod schema;

pub use error::CliError;
