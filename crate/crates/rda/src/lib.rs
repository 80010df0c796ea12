//! File formats, run reports and the `rda` command-line runner built on
//! `rda-core`.
//!
//! Inputs are CSV (one sample per row, one label column) or IDX image and
//! label files. A run writes `report.json`, `report.csv` and one
//! `trace_<repeat>.csv` per solver run; `report.json` carries enough to
//! replay the run and compare the results.

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod idx;
pub mod report;
pub mod run;
pub mod svg;

pub use error::{Error, Result};
pub use report::{DataSource, Report, RunConfig};
