//! Criterion benchmarks for `gracetree`; see `benches/labelers.rs`.
