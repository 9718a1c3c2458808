//! Standard normal CDF, survival function and their logarithms.
//!
//! The log versions stay finite far into the tails: below `z = -20` the
//! complementary error function is replaced by the asymptotic expansion of
//! Mills' ratio, so `ln Φ(z)` is usable down to several thousand standard
//! deviations.

use statrs::distribution::{ContinuousCDF, Normal};
use libm::{erf, erfc};
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
const ASYMPTOTIC_BELOW: f64 = -20.0;

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `Φ(b) − Φ(a)` for `a ≤ 0 ≤ b`, written as a sum of two positive terms.
pub(crate) fn central_mass(neg_a: f64, b: f64) -> f64 {
    let half_erf = |v: f64| if v == f64::INFINITY { 0.5 } else { 0.5 * erf(v * FRAC_1_SQRT_2) };
    half_erf(neg_a) + half_erf(b)
}

/// `ln Φ(z)`.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z > 0.0 {
        (-norm_sf(z)).ln_1p()
    } else if z >= ASYMPTOTIC_BELOW {
        norm_cdf(z).ln()
    } else {
        // Φ(z) = φ(z)/|z| · (1 − 1/z² + 3/z⁴ − 15/z⁶ + ...)
        let t = 1.0 / (z * z);
        let mut term = 1.0;
        let mut series = 1.0;
        for n in 1..=8 {
            term *= -((2 * n - 1) as f64) * t;
            series += term;
        }
        -0.5 * z * z - (-z).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// `ln(1 − Φ(z))`.
pub fn ln_norm_sf(z: f64) -> f64 {
    ln_norm_cdf(-z)
}

/// `ln(1 − e^d)` for `d ≤ 0`.
pub(crate) fn ln_one_minus_exp(d: f64) -> f64 {
    if d > -LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// `Φ⁻¹(p)` for `0 < p < 1`.
pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
