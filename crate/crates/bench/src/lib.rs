//! Criterion benchmarks for the numerical kernels live in `benches/kernels.rs`;
//! run them with `cargo bench -p coarselab-bench`.
