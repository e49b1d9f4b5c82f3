//! Criterion benchmarks for the taskrisk pipeline. See `benches/`.
