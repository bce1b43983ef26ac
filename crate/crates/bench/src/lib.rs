//! Criterion benchmarks for orthoint; see `benches/`.
