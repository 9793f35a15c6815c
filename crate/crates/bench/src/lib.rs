//! Criterion benchmarks for ggbm-core live in `benches/`.
