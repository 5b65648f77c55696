//! Criterion benchmarks for the `ginibre-core` kernels live in
//! `benches/kernels.rs`. This library is intentionally empty.
