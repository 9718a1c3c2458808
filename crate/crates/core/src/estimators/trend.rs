use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `η = e₁`, the contrast picking out the post coefficient.
pub fn eta_beta(k: usize) -> DVector<f64> {
    let mut eta = DVector::zeros(k + 1);
    eta[0] = 1.0;
    eta
}

/// Contrast `η` of length `k + 1` with `η′β = γ_m`: the post coefficient at
/// period `m` minus the degree-`p` polynomial fitted by least squares through
/// `(0, 0), (−1, β_-1), ..., (−k, β_-k)` and extrapolated to `m`.
///
/// Ordered `(post, pre_-1, ..., pre_-k)`; the post weight is 1.
pub fn eta_gamma(k: usize, p: usize, m: i64) -> Result<DVector<f64>> {
    if p < 1 || p > k {
        return Err(Error::InvalidArgument(format!("trend order must satisfy 1 <= p <= k, got p={p}, k={k}")));
    }
    if m < 1 {
        return Err(Error::InvalidArgument(format!("post period must be at least 1, got {m}")));
    }
    // rows t = 0, -1, ..., -k; columns t^0 .. t^p
    let x = DMatrix::from_fn(k + 1, p + 1, |i, j| (-(i as f64)).powi(j as i32));
    let qr = x.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::RankDeficientX);
    }
    let mp = DVector::from_fn(p + 1, |j, _| (m as f64).powi(j as i32));
    // m′(X′X)⁻¹X′ = (R⁻ᵀm)′Q′
    let v = r.transpose().solve_lower_triangular(&mp).ok_or(Error::RankDeficientX)?;
    let weights = qr.q() * v;
    let mut eta = DVector::zeros(k + 1);
    eta[0] = 1.0;
    for j in 0..k {
        eta[j + 1] = -weights[j + 1];
    }
    Ok(eta)
}
