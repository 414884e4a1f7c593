//! Criterion benchmarks for the pseudocurve kernels live in `benches/`.
