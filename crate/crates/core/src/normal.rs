//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::SQRT_2;

/// Φ(x), evaluated through `erfc` so the lower tail keeps full relative accuracy.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// 1 − Φ(x) without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// CDF of N(0, sd²) at x.
pub fn cdf_scaled(x: f64, sd: f64) -> f64 {
    cdf(x / sd)
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
