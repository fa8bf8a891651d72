//! Run configuration, CSV tables, run directories and manifests.

mod config;
mod run;
mod tables;

pub use config::{estimate_memory_bytes, CriticalField, RunConfig, KEYS, OUTPUT_ROOT_VAR};
pub use run::{verify_manifest, FileEntry, HostInfo, RunDir, RunManifest, TQ_CONVENTION};
pub use tables::{
    fmt_float, read_table, write_table, CorrelationRow, EnergyRow, EntropyRow, LocalEnergyRow, NumericTable,
    SeriesTables, Table, TruncationRow, SCHEMA_VERSION,
};
