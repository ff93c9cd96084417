//! Criterion benchmarks for the matcher and the trace checker; see `benches/`.
