//! Shared inputs for the criterion benchmarks.

use lmpot_core::distributions::{gpd_sample, GpdParams};
use lmpot_core::{ObservationSample, RandomStream};

/// Seeded GPd sample used by every benchmark.
pub fn gpd_data(n: usize, xi: f64) -> ObservationSample {
    gpd_sample(&GpdParams::new(1.0, xi).expect("valid GPd"), n, RandomStream::new(2024, 0))
}
