//! IO and command-line companion of `smaflow-core`: run configuration,
//! state snapshots, diagnostics time series and the `smaflow` commands.

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod snapshot;
pub mod timeseries;

pub use config::{load_config, RunConfig};
pub use error::{Error, Result, SnapshotError};
pub use snapshot::{load_snapshot, save_snapshot};
pub use timeseries::write_timeseries;

/// Version of the snapshot layout.
pub const SNAPSHOT_FORMAT: &str = snapshot::MAGIC;
/// Version of the time-series column set.
pub const TIMESERIES_FORMAT: u32 = 1;
