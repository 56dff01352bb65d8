//! Criterion benchmarks for the pplab solvers live in `benches/`.
