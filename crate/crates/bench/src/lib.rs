//! Micro-benchmarks only; see `benches/hot_paths.rs`.
