//! Criterion benchmarks for the sampling library; see `benches/`.
