//! Command-line front end: CSV ingestion, JSON plot documents and SVG output.

pub mod commands;
pub mod document;
pub mod error;
pub mod ingest;
pub mod plots;
pub mod render;

pub use commands::run;
pub use error::{CliError, CliResult};
