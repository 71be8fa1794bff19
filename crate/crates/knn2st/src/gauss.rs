//! Standard normal CDF and quantile, shared by the test and theory code.

use statrs::distribution::{ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Φ⁻¹(p) for p in (0,1).
pub fn std_normal_quantile(p: f64) -> f64 {
    standard().inverse_cdf(p)
}
