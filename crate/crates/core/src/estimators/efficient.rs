use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event_study::EstimateBundle;
use crate::gaussian::normal::norm_quantile;

/// `β̃_post = β̂_post − w′β̂_pre` with `w = Σ₂₂⁻¹Σ₂₁`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficientEstimate {
    pub estimate: f64,
    pub variance: f64,
    #[serde(skip)]
    pub weights: DVector<f64>,
}

impl EfficientEstimate {
    pub fn se(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn efficient_estimator(bundle: &EstimateBundle) -> Result<EfficientEstimate> {
    let sigma = &bundle.sigma;
    let chol = sigma.sigma22().cholesky().ok_or(Error::SingularSigma22)?;
    let s21 = sigma.sigma12();
    let weights = chol.solve(&s21);
    let estimate = bundle.beta_post - weights.dot(&bundle.beta_pre);
    let variance = sigma.sigma11() - s21.dot(&weights);
    if !(variance > 0.0) {
        return Err(Error::SingularSigma22);
    }
    Ok(EfficientEstimate { estimate, variance, weights })
}

/// Two-sided `1 − alpha` Wald interval.
pub fn wald_interval(estimate: f64, se: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    let half = norm_quantile(1.0 - alpha / 2.0) * se;
    Ok((estimate - half, estimate + half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{CovarianceMatrix, EquicorrelatedSpec};
    use proptest::prelude::*;

    fn bundle(beta: &[f64], sigma: CovarianceMatrix) -> EstimateBundle {
        EstimateBundle::from_coefficients(&DVector::from_column_slice(beta), sigma).unwrap()
    }

    #[test]
    fn uncorrelated_case_is_unchanged() {
        let sigma = CovarianceMatrix::from_row_slice(3, &[2.0, 0.0, 0.0, 0.0, 1.0, 0.3, 0.0, 0.3, 1.0]).unwrap();
        let e = efficient_estimator(&bundle(&[0.7, 1.0, -2.0], sigma)).unwrap();
        assert_eq!(e.estimate, 0.7);
        assert_eq!(e.variance, 2.0);
    }

    #[test]
    fn k1_half_weight() {
        let v = 0.127f64.powi(2) / 2.0;
        let sigma = EquicorrelatedSpec::new(2, 2.0 * v, v).unwrap().covariance().unwrap();
        let e = efficient_estimator(&bundle(&[0.3, 0.1], sigma)).unwrap();
        assert!((e.weights[0] - 0.5).abs() < 1e-12);
        assert!((e.variance - 1.5 * v).abs() < 1e-15);
        assert!((e.se() - 0.110).abs() < 5e-4);
    }

    #[test]
    fn k8_weights_are_one_ninth() {
        let v = 0.127f64.powi(2) / 2.0;
        let sigma = EquicorrelatedSpec::new(9, 2.0 * v, v).unwrap().covariance().unwrap();
        let pre = vec![0.0; 8];
        let mut beta = vec![0.1];
        beta.extend(pre);
        let e = efficient_estimator(&bundle(&beta, sigma)).unwrap();
        for w in e.weights.iter() {
            assert!((w - 1.0 / 9.0).abs() < 1e-12);
        }
        assert!((e.variance - v * 10.0 / 9.0).abs() < 1e-15);
        assert!((e.se() - 0.094).abs() < 1e-3);
    }

    #[test]
    fn wald_reduces_to_textbook() {
        let (lo, hi) = wald_interval(1.0, 0.5, 0.05).unwrap();
        assert!((hi - 1.0 - 1.959_963_984_540_054 * 0.5).abs() < 1e-12);
        assert!((1.0 - lo - 1.959_963_984_540_054 * 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn decomposition_identity(
            k in 1usize..7,
            diag in 0.5f64..3.0,
            frac in 0.05f64..0.95,
            seed in proptest::collection::vec(-2.0f64..2.0, 8),
        ) {
            let sigma = EquicorrelatedSpec::new(k + 1, diag, frac * diag).unwrap().covariance().unwrap();
            let b = bundle(&seed[..k + 1], sigma);
            let e = efficient_estimator(&b).unwrap();
            let back = e.estimate + e.weights.dot(&b.beta_pre);
            prop_assert!((back - b.beta_post).abs() <= 1e-12 * (1.0 + b.beta_post.abs()));
        }
    }
}
