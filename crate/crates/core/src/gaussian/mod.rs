//! Gaussian building blocks: covariance matrices, equicorrelated inverses,
//! tail-stable normal and truncated-normal CDFs, the monotone root finder
//! behind quantile-unbiased estimation, and multivariate normal sampling.

mod equicorrelated;
mod matrix;
mod mvn;
pub mod normal;
mod truncated;

pub use equicorrelated::{equicorrelated_inverse, EquicorrelatedSpec};
pub use matrix::CovarianceMatrix;
pub use mvn::{mvn_sample, MvnSampler};
pub use truncated::{
    serialize_ext_f64, serialize_opt_ext_f64, solve_tn_mean, tn_cdf, ExtReal, TruncatedNormalSpec,
    BRACKET_LIMIT_SD, ROOT_TOLERANCE,
};
