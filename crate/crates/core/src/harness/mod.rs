//! Run configuration, table building, observed networks, experiments and
//! timing.

pub mod config;
pub mod experiment;
pub mod observed;
pub mod table;
pub mod timing;

pub use config::{ModelKind, RunConfig, SeedSource};
pub use experiment::{run_experiment, ExperimentReport, ReportRow};
pub use observed::{ingest_observed, seed_graph, simulate_observed, ObservedNetwork, Provenance};
pub use table::{build_entry, build_reference_table, read_table_csv, EntryRow, FailedEntry, TableBuild};
pub use timing::{timing_report, TimingRow};
