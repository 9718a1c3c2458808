use nalgebra::DMatrix;

use super::CovarianceMatrix;
use crate::error::{Error, Result};

/// Covariance with a common variance on the diagonal and a common
/// covariance off it: `(σ² − ρ) I + ρ ιι'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrelatedSpec {
    pub dim: usize,
    pub diag: f64,
    pub offdiag: f64,
}

impl EquicorrelatedSpec {
    pub fn new(dim: usize, diag: f64, offdiag: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(diag > 0.0) || !offdiag.is_finite() || !diag.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need finite diag > 0 and finite offdiag, got {diag}, {offdiag}"
            )));
        }
        Ok(Self { dim, diag, offdiag })
    }

    /// Positive common covariance strictly below the common variance.
    pub fn is_repeated_cross_section(&self) -> bool {
        self.offdiag > 0.0 && self.diag > self.offdiag
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| if i == j { self.diag } else { self.offdiag })
    }

    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::new(self.matrix())
    }
}

/// Closed-form inverse via Sherman–Morrison:
/// `(σ²−ρ)⁻¹ I − [ρ(σ²−ρ)⁻² / (1 + dim·ρ(σ²−ρ)⁻¹)] ιι'`.
pub fn equicorrelated_inverse(spec: &EquicorrelatedSpec) -> Result<CovarianceMatrix> {
    if spec.dim == 1 {
        return CovarianceMatrix::new(DMatrix::from_element(1, 1, 1.0 / spec.diag));
    }
    let gap = spec.diag - spec.offdiag;
    if gap == 0.0 {
        return Err(Error::SingularMatrix("diagonal equals off-diagonal".into()));
    }
    if gap < 0.0 {
        return Err(Error::CholeskyFailure(format!(
            "off-diagonal {} exceeds diagonal {}",
            spec.offdiag, spec.diag
        )));
    }
    let n = spec.dim as f64;
    let denom = 1.0 + n * spec.offdiag / gap;
    if denom == 0.0 {
        return Err(Error::SingularMatrix("1 + dim·ρ/(σ²−ρ) vanishes".into()));
    }
    if denom < 0.0 {
        return Err(Error::CholeskyFailure("1 + dim·ρ/(σ²−ρ) is negative".into()));
    }
    let rank_one = spec.offdiag / (gap * gap) / denom;
    let inv = DMatrix::from_fn(spec.dim, spec.dim, |i, j| {
        if i == j {
            1.0 / gap - rank_one
        } else {
            -rank_one
        }
    });
    CovarianceMatrix::new(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_inverse() {
        let inv = equicorrelated_inverse(&EquicorrelatedSpec::new(1, 2.0, 7.0).unwrap()).unwrap();
        assert_eq!(inv.get(0, 0), 0.5);
    }

    #[test]
    fn two_by_two_matches_direct_inversion() {
        // [[2,1],[1,2]]^-1 = (1/3) [[2,-1],[-1,2]]
        let inv = equicorrelated_inverse(&EquicorrelatedSpec::new(2, 2.0, 1.0).unwrap()).unwrap();
        let expected = [[2.0 / 3.0, -1.0 / 3.0], [-1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.get(i, j) - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn row_sums_are_constant() {
        let spec = EquicorrelatedSpec::new(3, 2.0, 1.0).unwrap();
        let brute = spec.matrix().try_inverse().unwrap();
        for j in 0..3 {
            assert!((brute.column(j).sum() - 0.25).abs() < 1e-14);
        }
        let inv = equicorrelated_inverse(&spec).unwrap();
        for j in 0..3 {
            assert!((inv.entries().column(j).sum() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_when_diag_equals_offdiag() {
        let err = equicorrelated_inverse(&EquicorrelatedSpec::new(3, 1.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix(_)));
    }

    #[test]
    fn singular_when_rank_one_denominator_vanishes() {
        // 1 + 4ρ/(σ²−ρ) = 0 with σ² = 1 → ρ = −1/3
        let err = equicorrelated_inverse(&EquicorrelatedSpec::new(4, 1.0, -1.0 / 3.0).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::SingularMatrix(_) | Error::CholeskyFailure(_)));
    }

    #[test]
    fn assumption_predicate() {
        assert!(EquicorrelatedSpec::new(3, 2.0, 1.0).unwrap().is_repeated_cross_section());
        assert!(!EquicorrelatedSpec::new(3, 2.0, 0.0).unwrap().is_repeated_cross_section());
        assert!(!EquicorrelatedSpec::new(3, 1.0, 1.5).unwrap().is_repeated_cross_section());
    }

    proptest! {
        #[test]
        fn inverse_times_matrix_is_identity(dim in 1usize..=12, diag in 0.1f64..10.0, frac in -0.05f64..0.95) {
            let spec = EquicorrelatedSpec::new(dim, diag, frac * diag).unwrap();
            let inv = equicorrelated_inverse(&spec).unwrap();
            let prod = inv.entries() * spec.matrix();
            let err = (prod - DMatrix::<f64>::identity(dim, dim)).abs().max();
            prop_assert!(err < 1e-10, "max deviation {err}");
            let lu = spec.matrix().lu().try_inverse().unwrap();
            let rel = (inv.entries() - &lu).abs().max() / lu.abs().max();
            prop_assert!(rel < 1e-10);
        }

        #[test]
        fn cross_block_weights_equal_and_positive(k in 1usize..=10, diag in 0.1f64..10.0, frac in 0.01f64..0.99) {
            let spec = EquicorrelatedSpec::new(k + 1, diag, frac * diag).unwrap();
            let sigma = spec.covariance().unwrap();
            let w = sigma.sigma22().cholesky().unwrap().solve(&sigma.sigma12());
            for v in w.iter() {
                prop_assert!(*v > 0.0);
                prop_assert!((v - w[0]).abs() < 1e-12 * w[0].abs().max(1.0));
            }
        }
    }
}
