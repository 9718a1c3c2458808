use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, MvnSampler};
use crate::pretest::PolyhedralConstraint;

pub const MIN_ORACLE_REPS: usize = 10_000;
pub const MIN_ACCEPTED_DRAWS: usize = 100;

/// Rejection-sampled moments of `β̂ ~ N(β, Σ)` given `Aβ̂ ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOracle {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub accept_prob: f64,
    pub n_accepted: usize,
}

impl MomentOracle {
    /// Monte Carlo standard error of `mean[i]`.
    pub fn mean_se(&self, i: usize) -> f64 {
        (self.covariance[(i, i)] / self.n_accepted as f64).sqrt()
    }
}

pub fn conditional_moment_oracle<R: Rng + ?Sized>(
    true_beta: &DVector<f64>,
    sigma: &CovarianceMatrix,
    constraint: &PolyhedralConstraint,
    reps: usize,
    rng: &mut R,
) -> Result<MomentOracle> {
    if reps < MIN_ORACLE_REPS {
        return Err(Error::InvalidArgument(format!("oracle needs at least {MIN_ORACLE_REPS} draws, got {reps}")));
    }
    if constraint.dim() != sigma.dim() {
        return Err(Error::InvalidArgument("constraint and covariance dimensions differ".into()));
    }
    let sampler = MvnSampler::new(true_beta.clone(), sigma)?;
    let dim = sigma.dim();
    let mut n = 0usize;
    let mut mean = DVector::zeros(dim);
    let mut m2 = DMatrix::zeros(dim, dim);
    for _ in 0..reps {
        let draw = sampler.sample(rng);
        if !constraint.contains(&draw) {
            continue;
        }
        // Welford update
        n += 1;
        let delta = &draw - &mean;
        mean += &delta / n as f64;
        let delta2 = &draw - &mean;
        m2 += &delta * delta2.transpose();
    }
    if n < MIN_ACCEPTED_DRAWS {
        return Err(Error::DegenerateAcceptance { accepted: n, required: MIN_ACCEPTED_DRAWS });
    }
    Ok(MomentOracle {
        mean,
        covariance: m2 / (n - 1) as f64,
        accept_prob: n as f64 / reps as f64,
        n_accepted: n,
    })
}
