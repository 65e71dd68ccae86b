//! Criterion benchmarks for the dilation constructions; see `benches/`.
