//! Job-shop scheduling solver and benchmark harness.
//!
//! The solver couples tabu search over critical-block reinsertion moves with
//! path relinking across a population of elite solutions. The harness runs
//! seeded, time-limited experiments over the classic benchmark corpora and
//! emits CSV reports with relative-error summaries.

pub mod bench;
pub mod evolve;
pub mod graph;
pub mod model;
pub mod relink;
pub mod tabu;

pub use evolve::{evolve_run, EvolveError, EvolveParams, RunStats};
pub use graph::{critical_blocks, evaluate, repair, CriticalBlock, ScheduleEval};
pub use model::{solutions_equal, Instance, ModelError, OpId, Solution};
