//! Fixtures shared by the benchmarks.

use qet_core::{ModelParams, ProtocolConfig};

/// Table configuration with the given shot count and a fixed seed.
pub fn config(n: usize, h: f64, k: f64, shots: u64) -> ProtocolConfig {
    ProtocolConfig::new(ModelParams::new(n, h, k).expect("valid parameters"))
        .with_shots(shots)
        .with_seed(1)
}
