//! Fixtures shared by the benchmarks.

use pretrends_core::event_study::EstimateBundle;
use pretrends_core::gaussian::EquicorrelatedSpec;
use pretrends_core::nalgebra::DVector;

/// A passing bundle with `k` pre-periods and the default simulation scale.
pub fn passing_bundle(k: usize) -> EstimateBundle {
    let v = 0.008;
    let sigma = EquicorrelatedSpec::new(k + 1, 2.0 * v, v).unwrap().covariance().unwrap();
    let beta = DVector::from_fn(k + 1, |i, _| if i == 0 { 0.12 } else { 0.03 * (-1.0f64).powi(i as i32) });
    EstimateBundle::from_coefficients(&beta, sigma).unwrap()
}
