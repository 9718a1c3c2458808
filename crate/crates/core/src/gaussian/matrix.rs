use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;

/// Symmetric positive-definite covariance of the coefficient vector
/// `(post, pre_1, ..., pre_K)`.
///
/// Index 0 is the post-period coefficient; the remaining `K` rows and
/// columns are the pre-period coefficients in `(-1, -2, ..., -K)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "covariance must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("covariance has non-finite entries".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > SYMMETRY_RTOL * a.abs().max(b.abs()) {
                    return Err(Error::InvalidArgument(format!(
                        "covariance is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        if entries.clone().cholesky().is_none() {
            return Err(Error::CholeskyFailure(format!("{n}x{n} covariance")));
        }
        Ok(Self { entries })
    }

    pub fn from_row_slice(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {dim}x{dim} matrix, got {}",
                dim * dim,
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of pre-period coefficients.
    pub fn k(&self) -> usize {
        self.dim() - 1
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.entries.diagonal()
    }

    pub fn sigma11(&self) -> f64 {
        self.entries[(0, 0)]
    }

    /// Covariances between the post coefficient and each pre coefficient.
    pub fn sigma12(&self) -> DVector<f64> {
        DVector::from_iterator(self.k(), (1..self.dim()).map(|j| self.entries[(0, j)]))
    }

    pub fn sigma22(&self) -> DMatrix<f64> {
        let k = self.k();
        self.entries.view((1, 1), (k, k)).into_owned()
    }

    pub fn cholesky(&self) -> Cholesky<f64, Dyn> {
        // Positive definiteness was checked at construction.
        self.entries
            .clone()
            .cholesky()
            .expect("covariance validated as positive definite")
    }

    /// `v' Σ v`
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.entries * v))
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self
            .entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        rows.serialize(serializer)
    }
}
