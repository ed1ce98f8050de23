//! Criterion benchmarks for pneq; see `benches/`.
