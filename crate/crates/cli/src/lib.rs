//! Manifest ingestion, command dispatch and JSON/CSV report emission for the
//! `crhull` binary.

pub mod manifest;
pub mod report;
pub mod run;

pub use manifest::{parse_manifest, Manifest, ManifestError, RunParams};
pub use report::{Report, Verdict};
pub use run::{invalid_manifest_report, parse_grid, run, Command, CsvTable, Flags, Outcome};
