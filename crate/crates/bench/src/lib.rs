//! Criterion benchmarks for `kdt-core` live in `benches/`.
