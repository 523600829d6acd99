//! Benchmark-only crate; see `benches/fits.rs`.
