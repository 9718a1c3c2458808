use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slope of the linear pre-trend in the trend design.
pub const TREND_SLOPE: f64 = 0.065;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub k_max: usize,
    pub n_per_cell: usize,
    pub sigma_noise: f64,
    /// `δ` in `y = δ·t·treated + ε`; 0 gives the null design.
    pub trend_slope: f64,
    pub reps: usize,
    pub seed: u64,
    pub alpha_pretest: f64,
    pub alpha_ci: f64,
    /// Order of the polynomial removed by the trend-adjusted contrast.
    pub trend_order: usize,
    /// Draw cell means and variances directly instead of individual outcomes.
    pub fast_path: bool,
    /// Use the true cell variances instead of sample variances.
    pub known_sigma: bool,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k_max: 8,
            n_per_cell: 250,
            sigma_noise: 1.0,
            trend_slope: 0.0,
            reps: 100_000,
            seed: 42,
            alpha_pretest: 0.05,
            alpha_ci: 0.05,
            trend_order: 1,
            fast_path: true,
            known_sigma: false,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.reps < 1 {
            return fail("reps must be at least 1".into());
        }
        if self.n_per_cell < 2 {
            return fail(format!("n_per_cell must be at least 2, got {}", self.n_per_cell));
        }
        if self.k_max < 1 {
            return fail("k_max must be at least 1".into());
        }
        if !(self.sigma_noise > 0.0 && self.sigma_noise.is_finite()) {
            return fail(format!("sigma_noise must be positive, got {}", self.sigma_noise));
        }
        if !self.trend_slope.is_finite() {
            return fail("trend_slope must be finite".into());
        }
        for (name, a) in [("alpha_pretest", self.alpha_pretest), ("alpha_ci", self.alpha_ci)] {
            if !(a > 0.0 && a < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {a}"));
            }
        }
        if self.trend_order < 1 {
            return fail("trend_order must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }
}
