//! Criterion benchmarks for the simulator, model and codec; see `benches/`.
