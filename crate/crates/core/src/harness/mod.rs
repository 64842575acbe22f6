//! Reproducible runs: command specs, manifests, replay verification and
//! benchmark sweeps.

mod bench;
mod commands;
mod dump;
mod manifest;
mod seed;

pub use bench::{
    bench_cells, bench_sweep, run_cell, side_for, BenchCell, BenchRow, SweepFamily, SweepGrid, SweepReport,
};
pub use commands::{run, run_streaming, split_instance_text, CommandSpec, RunOptions, RunOutput, PAIRS_MARKER, STDIN};
pub use dump::{verify_session_dump, DumpReport, SessionDump};
pub use manifest::{sha256_hex, verify_all, CheckStatus, ManifestCheck, RunManifest, VerifyReport};
pub use seed::SeedSplitter;
