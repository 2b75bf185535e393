//! Batch front-end for the pvcomb pipeline: CSV ingestion, run orchestration,
//! report tables and SVG charts.

pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
pub mod plot;
pub mod run;
pub mod synth;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use run::{ingest, report, run};
