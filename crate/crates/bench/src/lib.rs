//! Benchmarks for the crhull kernels live in `benches/`.
