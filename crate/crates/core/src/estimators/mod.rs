//! Point estimates and confidence intervals: the efficient estimator, the
//! truncated-normal law of a contrast given the pre-test, quantile-unbiased
//! estimation, and trend-adjusted contrasts.

mod conditional;
mod efficient;
mod oracle;
mod report;
mod trend;

pub use conditional::{
    condition_contrast, conditional_ci, quantile_unbiased_estimate, ConditionalLaw, ROW_ZERO_TOLERANCE,
};
pub use efficient::{efficient_estimator, wald_interval, EfficientEstimate};
pub use oracle::{conditional_moment_oracle, MomentOracle, MIN_ACCEPTED_DRAWS, MIN_ORACLE_REPS};
pub use report::{analyze, analyze_with_constraint, ConditionalBlock, InferenceReport, WaldBlock};
pub use trend::{eta_beta, eta_gamma};
