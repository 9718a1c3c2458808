//! The pre-trends test and its acceptance region written as a polyhedron.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event_study::EstimateBundle;
use crate::gaussian::normal::norm_quantile;
use crate::gaussian::CovarianceMatrix;

/// The event `{β : A β ≤ b}` over the stacked coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralConstraint {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl PolyhedralConstraint {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "constraint matrix has {} rows but bound vector has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("constraint has non-finite entries".into()));
        }
        Ok(Self { a, b })
    }

    /// Box constraint `lower_j ≤ β_pre,j ≤ upper_j` on the pre coefficients;
    /// the post coordinate is unconstrained.
    pub fn pre_rectangle(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument("rectangle bounds must have equal, positive length".into()));
        }
        let k = lower.len();
        let mut a = DMatrix::zeros(2 * k, k + 1);
        let mut b = DVector::zeros(2 * k);
        for j in 0..k {
            a[(j, j + 1)] = 1.0;
            b[j] = upper[j];
            a[(k + j, j + 1)] = -1.0;
            b[k + j] = -lower[j];
        }
        Self::new(a, b)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// First violated row, if any.
    pub fn first_violation(&self, beta: &DVector<f64>) -> Option<usize> {
        let ab = &self.a * beta;
        (0..self.rows()).find(|&j| !(ab[j] <= self.b[j]))
    }

    pub fn contains(&self, beta: &DVector<f64>) -> bool {
        self.first_violation(beta).is_none()
    }
}

/// `c_α = Φ⁻¹(1 − α/2)`.
pub fn critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    Ok(norm_quantile(1.0 - alpha / 2.0))
}

/// Acceptance region "no pre coefficient individually significant":
/// rows `+β_pre,j ≤ c_α √Σ_jj` for every j, followed by rows `−β_pre,j ≤ c_α √Σ_jj`.
pub fn build_ns_polyhedron(sigma: &CovarianceMatrix, alpha: f64) -> Result<PolyhedralConstraint> {
    let c = critical_value(alpha)?;
    let k = sigma.k();
    if k == 0 {
        return Err(Error::InvalidArgument("covariance has no pre-period block".into()));
    }
    let mut a = DMatrix::zeros(2 * k, k + 1);
    let mut b = DVector::zeros(2 * k);
    for j in 0..k {
        let bound = c * sigma.get(j + 1, j + 1).sqrt();
        a[(j, j + 1)] = 1.0;
        a[(k + j, j + 1)] = -1.0;
        b[j] = bound;
        b[k + j] = bound;
    }
    PolyhedralConstraint::new(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PretestVerdict {
    pub alpha: f64,
    pub critical_value: f64,
    pub passed: bool,
    /// Largest |t| over the pre coefficients.
    pub max_abs_t: f64,
}

pub fn pretest(bundle: &EstimateBundle, alpha: f64) -> Result<PretestVerdict> {
    let c = critical_value(alpha)?;
    let mut passed = true;
    let mut max_abs_t: f64 = 0.0;
    for j in 0..bundle.k {
        let se = bundle.sigma.get(j + 1, j + 1).sqrt();
        let beta = bundle.beta_pre[j];
        // boundary counts as acceptance
        passed &= beta.abs() <= c * se;
        max_abs_t = max_abs_t.max(beta.abs() / se);
    }
    Ok(PretestVerdict { alpha, critical_value: c, passed, max_abs_t })
}

/// Whether every pre coefficient satisfies `|β̂_pre,j| ≤ c_α √Σ_jj`.
pub fn passes_pretest(bundle: &EstimateBundle, alpha: f64) -> Result<bool> {
    Ok(pretest(bundle, alpha)?.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{EquicorrelatedSpec, MvnSampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bundle(post: f64, pre: &[f64], sigma: CovarianceMatrix) -> EstimateBundle {
        EstimateBundle::new(post, DVector::from_column_slice(pre), sigma).unwrap()
    }

    #[test]
    fn k1_polyhedron_by_hand() {
        let sigma = CovarianceMatrix::from_row_slice(2, &[0.016, 0.008, 0.008, 0.016]).unwrap();
        let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
        assert_eq!(p.a(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -1.0]));
        let expected = 1.959_963_984_540_054 * 0.016f64.sqrt();
        assert!((expected - 0.24792).abs() < 5e-5);
        for j in 0..2 {
            assert!((p.b()[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_structure() {
        let sigma = EquicorrelatedSpec::new(3, 2.0, 1.0).unwrap().covariance().unwrap();
        let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
        assert_eq!(p.rows(), 4);
        assert!(p.a().column(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn critical_value_at_032() {
        // Φ⁻¹(0.84)
        assert!((critical_value(0.32).unwrap() - 0.994_457_883_209_753_2).abs() < 1e-9);
        assert!(critical_value(0.0).is_err());
        assert!(critical_value(1.0).is_err());
    }

    #[test]
    fn acceptance_cases() {
        let sigma = EquicorrelatedSpec::new(3, 0.016, 0.008).unwrap().covariance().unwrap();
        let se = 0.016f64.sqrt();
        let c = critical_value(0.05).unwrap();
        assert!(passes_pretest(&bundle(0.3, &[0.0, 0.0], sigma.clone()), 0.05).unwrap());
        assert!(passes_pretest(&bundle(0.3, &[c * se, 0.0], sigma.clone()), 0.05).unwrap());
        assert!(!passes_pretest(&bundle(0.3, &[0.0, 2.5 * se], sigma), 0.05).unwrap());
    }

    #[test]
    fn direct_test_agrees_with_polyhedron() {
        let sigma = EquicorrelatedSpec::new(4, 0.016, 0.008).unwrap().covariance().unwrap();
        let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
        let sampler = MvnSampler::new(DVector::from_vec(vec![0.0, -0.1, -0.2, -0.3]), &sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut accepted = 0;
        for _ in 0..10_000 {
            let beta = sampler.sample(&mut rng);
            let b = EstimateBundle::from_coefficients(&beta, sigma.clone()).unwrap();
            let direct = passes_pretest(&b, 0.05).unwrap();
            assert_eq!(direct, p.contains(&beta));
            accepted += direct as usize;
        }
        assert!(accepted > 100 && accepted < 9_900);
    }

    #[test]
    fn rectangle_rows() {
        let p = PolyhedralConstraint::pre_rectangle(&[-1.0, -2.0], &[0.5, 3.0]).unwrap();
        assert!(p.contains(&DVector::from_vec(vec![100.0, 0.0, 0.0])));
        assert!(!p.contains(&DVector::from_vec(vec![0.0, 0.6, 0.0])));
        assert!(!p.contains(&DVector::from_vec(vec![0.0, 0.0, -2.5])));
    }
}
