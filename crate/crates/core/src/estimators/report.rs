use nalgebra::DVector;
use serde::Serialize;

use super::conditional::{condition_contrast, conditional_ci, quantile_unbiased_estimate, ConditionalLaw};
use super::efficient::{efficient_estimator, wald_interval};
use super::trend::{eta_beta, eta_gamma};
use crate::error::{Error, Result};
use crate::event_study::EstimateBundle;
use crate::gaussian::{serialize_ext_f64, ExtReal};
use crate::pretest::{build_ns_polyhedron, pretest, PolyhedralConstraint, PretestVerdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaldBlock {
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl WaldBlock {
    fn new(estimate: f64, se: f64, alpha: f64) -> Result<Self> {
        let (ci_lower, ci_upper) = wald_interval(estimate, se, alpha)?;
        Ok(Self { estimate, se, ci_lower, ci_upper })
    }
}

/// Median-unbiased estimate and equal-tailed interval for one contrast,
/// with the truncation window they were computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalBlock {
    #[serde(serialize_with = "serialize_ext_f64")]
    pub estimate: f64,
    #[serde(serialize_with = "serialize_ext_f64")]
    pub ci_lower: f64,
    #[serde(serialize_with = "serialize_ext_f64")]
    pub ci_upper: f64,
    pub observed: f64,
    pub variance: f64,
    pub window_lower: ExtReal,
    pub window_upper: ExtReal,
    #[serde(serialize_with = "serialize_slice")]
    pub eta: DVector<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trend_order: Option<usize>,
}

fn serialize_slice<S: serde::Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

impl ConditionalBlock {
    pub fn from_law(law: &ConditionalLaw, alpha: f64, trend_order: Option<usize>) -> Result<Self> {
        let estimate = match quantile_unbiased_estimate(law, 0.5) {
            Err(Error::UnboundedEstimate { positive }) => {
                if positive {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            other => other?,
        };
        let (ci_lower, ci_upper) = conditional_ci(law, alpha)?;
        Ok(Self {
            estimate,
            ci_lower,
            ci_upper,
            observed: law.observed,
            variance: law.variance,
            window_lower: law.lower,
            window_upper: law.upper,
            eta: law.eta.clone(),
            trend_order,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceReport {
    pub k: usize,
    pub alpha_ci: f64,
    pub pretest: PretestVerdict,
    pub traditional: WaldBlock,
    pub efficient: WaldBlock,
    /// Present only when the pre-test passed.
    pub median_unbiased_beta: Option<ConditionalBlock>,
    pub median_unbiased_gamma: Option<ConditionalBlock>,
}

/// Runs the pre-test and, when it passes, conditional inference on `β_post`
/// and on the trend-adjusted `γ_post` of order `trend_order`.
pub fn analyze(
    bundle: &EstimateBundle,
    alpha_pretest: f64,
    alpha_ci: f64,
    trend_order: usize,
) -> Result<InferenceReport> {
    let constraint = build_ns_polyhedron(&bundle.sigma, alpha_pretest)?;
    analyze_with_constraint(bundle, &constraint, alpha_pretest, alpha_ci, trend_order)
}

/// As [`analyze`], conditioning on a caller-supplied event `Aβ̂ ≤ b` rather
/// than the individual-significance region. The reported pre-test verdict
/// is still the individual test at `alpha_pretest`; conditional blocks are
/// filled whenever the observed coefficients satisfy the constraint.
pub fn analyze_with_constraint(
    bundle: &EstimateBundle,
    constraint: &PolyhedralConstraint,
    alpha_pretest: f64,
    alpha_ci: f64,
    trend_order: usize,
) -> Result<InferenceReport> {
    if !(alpha_ci > 0.0 && alpha_ci < 1.0) {
        return Err(Error::InvalidArgument(format!("CI level must lie in (0, 1), got {alpha_ci}")));
    }
    let eta_g = eta_gamma(bundle.k, trend_order, 1)?;
    let verdict = pretest(bundle, alpha_pretest)?;
    let traditional = WaldBlock::new(bundle.beta_post, bundle.sigma.sigma11().sqrt(), alpha_ci)?;
    let eff = efficient_estimator(bundle)?;
    let efficient = WaldBlock::new(eff.estimate, eff.se(), alpha_ci)?;

    let (beta_block, gamma_block) = if constraint.contains(&bundle.coefficients()) {
        let law_b = condition_contrast(bundle, &eta_beta(bundle.k), constraint)?;
        let law_g = condition_contrast(bundle, &eta_g, constraint)?;
        (
            Some(ConditionalBlock::from_law(&law_b, alpha_ci, None)?),
            Some(ConditionalBlock::from_law(&law_g, alpha_ci, Some(trend_order))?),
        )
    } else {
        (None, None)
    };

    Ok(InferenceReport {
        k: bundle.k,
        alpha_ci,
        pretest: verdict,
        traditional,
        efficient,
        median_unbiased_beta: beta_block,
        median_unbiased_gamma: gamma_block,
    })
}
