//! Benchmarks for banditlab live in `benches/`.
