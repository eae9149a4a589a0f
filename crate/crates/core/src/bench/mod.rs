//! Benchmark harness: instance parsing, bounds catalog, seeded run
//! orchestration, and report emission.

pub mod bounds;
pub mod parse;
pub mod run;

pub use bounds::{BoundsCatalog, BoundsEntry, BoundsError, BOUNDS_PATH_ENV};
pub use parse::{parse, parse_standard, parse_taillard, Format, ParseError};
pub use run::{
    compute_re, default_time_limit, format_re, instance_group, mre_groups, parse_manifest,
    run_benchmark, write_report, write_runs_log, BenchConfig, BenchError, ManifestError,
    ManifestRow, RunRecord, RunReport, Timing,
};
