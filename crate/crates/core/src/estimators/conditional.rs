use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event_study::EstimateBundle;
use crate::gaussian::{solve_tn_mean, ExtReal, TruncatedNormalSpec};
use crate::pretest::PolyhedralConstraint;

/// Rows with `|(Ac)_j| ≤ ROW_ZERO_TOLERANCE · ‖A‖∞ · ‖c‖∞` do not bound the
/// contrast from either side.
pub const ROW_ZERO_TOLERANCE: f64 = 1e-10;

/// Relative slack allowed when checking that the observed coefficients lie
/// in the conditioning event.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Law of `η′β̂` given `Aβ̂ ≤ b` and the residual `Z = β̂ − c·η′β̂`: a normal
/// with unknown mean `η′β` and variance `η′Ση`, truncated to `[V⁻, V⁺]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalLaw {
    pub observed: f64,
    pub variance: f64,
    pub lower: ExtReal,
    pub upper: ExtReal,
    #[serde(skip)]
    pub eta: DVector<f64>,
    #[serde(skip)]
    pub c_vector: DVector<f64>,
    #[serde(skip)]
    pub z_vector: DVector<f64>,
}

impl ConditionalLaw {
    /// The truncated law under a hypothesized mean `mu`.
    pub fn spec(&self, mu: f64) -> Result<TruncatedNormalSpec> {
        TruncatedNormalSpec::new(mu, self.variance, self.lower, self.upper)
    }

    pub fn is_truncated(&self) -> bool {
        self.lower.is_finite() || self.upper.is_finite()
    }
}

pub fn condition_contrast(
    bundle: &EstimateBundle,
    eta: &DVector<f64>,
    constraint: &PolyhedralConstraint,
) -> Result<ConditionalLaw> {
    let dim = bundle.k + 1;
    if eta.len() != dim || constraint.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "contrast has length {} and constraint has {} columns, expected {dim}",
            eta.len(),
            constraint.dim()
        )));
    }
    if eta.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroContrast);
    }
    let beta = bundle.coefficients();
    let (a, b) = (constraint.a(), constraint.b());

    let ab = a * &beta;
    for j in 0..constraint.rows() {
        let scale = b[j].abs().max(ab[j].abs()).max(1.0);
        if !(ab[j] <= b[j] + MEMBERSHIP_SLACK * scale) {
            return Err(Error::ConstraintViolated { row: j });
        }
    }

    let s_eta = bundle.sigma.entries() * eta;
    let variance = eta.dot(&s_eta);
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::ZeroContrast);
    }
    let observed = eta.dot(&beta);
    let c = s_eta / variance;
    let z = &beta - &c * observed;

    let ac = a * &c;
    let az = a * &z;
    let a_norm = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let c_norm = c.amax();
    let zero = ROW_ZERO_TOLERANCE * a_norm * c_norm;

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for j in 0..constraint.rows() {
        let bound = (b[j] - az[j]) / ac[j];
        if ac[j] < -zero {
            lo = lo.max(bound);
        } else if ac[j] > zero {
            hi = hi.min(bound);
        }
    }
    // membership slack can leave the observed value a rounding error outside
    lo = lo.min(observed);
    hi = hi.max(observed);
    if !(lo < hi) {
        return Err(Error::DegenerateWindow);
    }

    Ok(ConditionalLaw {
        observed,
        variance,
        lower: lo.into(),
        upper: hi.into(),
        eta: eta.clone(),
        c_vector: c,
        z_vector: z,
    })
}

/// `b̂_q`: the mean at which the observed contrast is the `q` quantile of its
/// truncated law. `q = 0.5` gives the median-unbiased estimate.
pub fn quantile_unbiased_estimate(law: &ConditionalLaw, target: f64) -> Result<f64> {
    match solve_tn_mean(law.observed, law.variance, law.lower, law.upper, target) {
        Err(Error::NoBracket { above, .. }) => Err(Error::UnboundedEstimate { positive: above }),
        other => other,
    }
}

fn endpoint(law: &ConditionalLaw, target: f64) -> Result<f64> {
    match quantile_unbiased_estimate(law, target) {
        Err(Error::UnboundedEstimate { positive }) => {
            Ok(if positive { f64::INFINITY } else { f64::NEG_INFINITY })
        }
        other => other,
    }
}

/// Equal-tailed `1 − alpha` interval `[b̂_{1−α/2}, b̂_{α/2}]`.
///
/// The truncated CDF at the observed value decreases in the mean, so the
/// upper quantile target gives the lower endpoint. Endpoints the root finder
/// cannot bracket are returned as infinities.
pub fn conditional_ci(law: &ConditionalLaw, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    let lower = endpoint(law, 1.0 - alpha / 2.0)?;
    let upper = endpoint(law, alpha / 2.0)?;
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::efficient_estimator;
    use crate::gaussian::{CovarianceMatrix, EquicorrelatedSpec, MvnSampler};
    use crate::pretest::{build_ns_polyhedron, critical_value};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1(dim: usize) -> DVector<f64> {
        let mut e = DVector::zeros(dim);
        e[0] = 1.0;
        e
    }

    #[test]
    fn reconstruction() {
        let sigma = EquicorrelatedSpec::new(3, 2.0, 1.0).unwrap().covariance().unwrap();
        let b = EstimateBundle::from_coefficients(&DVector::from_vec(vec![0.4, 0.2, -0.3]), sigma.clone()).unwrap();
        let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
        let eta = DVector::from_vec(vec![1.0, -0.3, 0.7]);
        let law = condition_contrast(&b, &eta, &p).unwrap();
        let back = &law.z_vector + &law.c_vector * law.observed;
        assert!((back - b.coefficients()).amax() < 1e-14);
        assert!(law.lower <= ExtReal::Finite(law.observed) && ExtReal::Finite(law.observed) <= law.upper);
    }

    #[test]
    fn efficient_contrast_is_not_truncated() {
        let sigma = EquicorrelatedSpec::new(4, 0.016, 0.008).unwrap().covariance().unwrap();
        let b = EstimateBundle::from_coefficients(&DVector::from_vec(vec![0.1, 0.05, -0.02, 0.0]), sigma.clone())
            .unwrap();
        let w = efficient_estimator(&b).unwrap().weights;
        let mut eta = e1(4);
        for j in 0..3 {
            eta[j + 1] = -w[j];
        }
        let law = condition_contrast(&b, &eta, &build_ns_polyhedron(&sigma, 0.05).unwrap()).unwrap();
        assert_eq!(law.lower, ExtReal::NegInfinity);
        assert_eq!(law.upper, ExtReal::PosInfinity);
    }

    #[test]
    fn k1_window_by_hand() {
        // Σ = v·[[2,1],[1,2]], η = e₁; c = (1, 1/2), so the pre coordinate
        // moves at half the rate of the contrast.
        let v = 0.008;
        let sigma = CovarianceMatrix::from_row_slice(2, &[2.0 * v, v, v, 2.0 * v]).unwrap();
        let (post, pre) = (0.31, 0.05);
        let b = EstimateBundle::from_coefficients(&DVector::from_vec(vec![post, pre]), sigma.clone()).unwrap();
        let law = condition_contrast(&b, &e1(2), &build_ns_polyhedron(&sigma, 0.05).unwrap()).unwrap();
        let bound = critical_value(0.05).unwrap() * (2.0 * v).sqrt();
        // pre(x) = pre + (x − post)/2 must lie within ±bound
        let lo = post + 2.0 * (-bound - pre);
        let hi = post + 2.0 * (bound - pre);
        assert!((law.lower.to_f64() - lo).abs() < 1e-12);
        assert!((law.upper.to_f64() - hi).abs() < 1e-12);
    }

    #[test]
    fn violated_constraint_is_rejected() {
        let sigma = CovarianceMatrix::from_row_slice(2, &[0.016, 0.008, 0.008, 0.016]).unwrap();
        let b = EstimateBundle::from_coefficients(&DVector::from_vec(vec![0.0, 1.0]), sigma.clone()).unwrap();
        let err = condition_contrast(&b, &e1(2), &build_ns_polyhedron(&sigma, 0.05).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolated { row: 0 }));
    }

    #[test]
    fn zero_contrast() {
        let sigma = CovarianceMatrix::from_row_slice(2, &[0.016, 0.008, 0.008, 0.016]).unwrap();
        let b = EstimateBundle::from_coefficients(&DVector::from_vec(vec![0.0, 0.0]), sigma.clone()).unwrap();
        let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
        assert!(matches!(condition_contrast(&b, &DVector::zeros(2), &p), Err(Error::ZeroContrast)));
    }

    #[test]
    fn untruncated_reduces_to_wald() {
        let law = ConditionalLaw {
            observed: 0.3,
            variance: 0.04,
            lower: ExtReal::NegInfinity,
            upper: ExtReal::PosInfinity,
            eta: e1(2),
            c_vector: e1(2),
            z_vector: DVector::zeros(2),
        };
        assert!((quantile_unbiased_estimate(&law, 0.5).unwrap() - 0.3).abs() < 1e-7);
        let (lo, hi) = conditional_ci(&law, 0.05).unwrap();
        let half = 1.959_963_984_540_054 * 0.2;
        assert!((lo - (0.3 - half)).abs() < 1e-6, "{lo}");
        assert!((hi - (0.3 + half)).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn unbounded_endpoint_is_infinite() {
        // observed sits just above the lower truncation point of a one-sided window:
        // no finite mean puts it at the 0.975 quantile
        let law = ConditionalLaw {
            observed: 0.0,
            variance: 1.0,
            lower: ExtReal::Finite(-0.05),
            upper: ExtReal::PosInfinity,
            eta: e1(2),
            c_vector: e1(2),
            z_vector: DVector::zeros(2),
        };
        assert!(matches!(quantile_unbiased_estimate(&law, 0.975), Err(Error::UnboundedEstimate { positive: false })));
        let (lo, hi) = conditional_ci(&law, 0.05).unwrap();
        assert_eq!(lo, f64::NEG_INFINITY);
        assert!(hi.is_finite());
    }

    /// Scans `x ↦ A(Z + c·x) ≤ b` on a fine grid.
    fn grid_window(law: &ConditionalLaw, p: &PolyhedralConstraint, half_width: f64, steps: usize) -> (f64, f64) {
        let step = 2.0 * half_width / steps as f64;
        let mut inside = Vec::new();
        for i in 0..=steps {
            let x = law.observed - half_width + i as f64 * step;
            if p.contains(&(&law.z_vector + &law.c_vector * x)) {
                inside.push(x);
            }
        }
        (*inside.first().unwrap(), *inside.last().unwrap())
    }

    #[test]
    fn window_matches_grid_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 100 {
            let k = rng.random_range(1..=3);
            let diag: f64 = rng.random_range(0.5..2.0);
            let sigma = EquicorrelatedSpec::new(k + 1, diag, rng.random_range(0.1..0.9) * diag)
                .unwrap()
                .covariance()
                .unwrap();
            let p = build_ns_polyhedron(&sigma, 0.05).unwrap();
            let beta = MvnSampler::new(DVector::zeros(k + 1), &sigma).unwrap().sample(&mut rng);
            if !p.contains(&beta) {
                continue;
            }
            let b = EstimateBundle::from_coefficients(&beta, sigma.clone()).unwrap();
            let eta = DVector::from_fn(k + 1, |_, _| rng.random_range(-1.0..1.0));
            let law = condition_contrast(&b, &eta, &p).unwrap();
            // reach past any finite endpoint so a misplaced one cannot hide
            let half = 2.0
                * [law.lower, law.upper]
                    .iter()
                    .filter(|v| v.is_finite())
                    .map(|v| (v.to_f64() - law.observed).abs())
                    .fold(50.0, f64::max);
            let steps = 200_000;
            let res = 2.0 * half / steps as f64;
            let (glo, ghi) = grid_window(&law, &p, half, steps);
            let expect = |v: ExtReal, g: f64, edge: f64| match v {
                ExtReal::Finite(x) => assert!((x - g).abs() <= res, "{x} vs {g}"),
                _ => assert!((g - edge).abs() <= res, "unbounded side stopped at {g}"),
            };
            expect(law.lower, glo, law.observed - half);
            expect(law.upper, ghi, law.observed + half);
            checked += 1;
        }
    }
}
