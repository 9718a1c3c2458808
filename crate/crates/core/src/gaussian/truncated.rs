use serde::{Serialize, Serializer};

use super::normal::{central_mass, ln_norm_cdf, ln_norm_sf, ln_one_minus_exp};
use crate::error::{Error, Result};

/// A real number or one of the two infinities.
///
/// Truncation points are infinite whenever no constraint bounds a contrast
/// from that side, so they are carried as explicit sentinels rather than as
/// large floats. Variant order gives the usual ordering of the extended reals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    /// Maps `±f64::INFINITY` to the sentinels. NaN is kept as `Finite(NaN)`
    /// and rejected by every constructor that validates bounds.
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInfinity
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInfinity
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInfinity => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    fn is_valid(self) -> bool {
        match self {
            ExtReal::Finite(v) => v.is_finite(),
            _ => true,
        }
    }

    fn standardize(self, mu: f64, sd: f64) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite((v - mu) / sd),
            other => other,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

/// Serializes finite values as numbers and the infinities as the strings
/// `"inf"` / `"-inf"`.
pub fn serialize_ext_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v == f64::INFINITY {
        s.serialize_str("inf")
    } else if *v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_none()
    }
}

pub fn serialize_opt_ext_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => serialize_ext_f64(x, s),
        None => s.serialize_none(),
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_ext_f64(&self.to_f64(), s)
    }
}

/// Normal law with mean `mu` and variance `var`, truncated to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormalSpec {
    mu: f64,
    var: f64,
    lower: ExtReal,
    upper: ExtReal,
}

impl TruncatedNormalSpec {
    pub fn new(mu: f64, var: f64, lower: ExtReal, upper: ExtReal) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mean must be finite, got {mu}")));
        }
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {var}")));
        }
        if !lower.is_valid() || !upper.is_valid() {
            return Err(Error::InvalidArgument("truncation bound is NaN or a raw infinity".into()));
        }
        if !(lower < upper) {
            return Err(Error::InvalidArgument(format!(
                "empty truncation window [{}, {}]",
                lower.to_f64(),
                upper.to_f64()
            )));
        }
        Ok(Self { mu, var, lower, upper })
    }

    pub fn untruncated(mu: f64, var: f64) -> Result<Self> {
        Self::new(mu, var, ExtReal::NegInfinity, ExtReal::PosInfinity)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn var(&self) -> f64 {
        self.var
    }

    pub fn lower(&self) -> ExtReal {
        self.lower
    }

    pub fn upper(&self) -> ExtReal {
        self.upper
    }

    fn with_mean(self, mu: f64) -> Self {
        Self { mu, ..self }
    }
}

/// `ln(Φ(b) − Φ(a))` for standardized `a < b`.
///
/// Windows lying entirely on one side of zero are evaluated as differences
/// of log tail probabilities, so they keep full relative precision however
/// far out they sit.
fn ln_window_mass(a: ExtReal, b: ExtReal) -> f64 {
    use ExtReal::*;
    match (a, b) {
        (Finite(x), _) if x >= 0.0 => {
            let la = ln_norm_sf(x);
            let lb = match b {
                Finite(y) => ln_norm_sf(y),
                _ => return la,
            };
            la + ln_one_minus_exp(lb - la)
        }
        (_, Finite(y)) if y <= 0.0 => {
            let lb = ln_norm_cdf(y);
            let la = match a {
                Finite(x) => ln_norm_cdf(x),
                _ => return lb,
            };
            lb + ln_one_minus_exp(la - lb)
        }
        _ => {
            let neg_a = match a {
                Finite(x) => -x,
                _ => f64::INFINITY,
            };
            let b = match b {
                Finite(y) => y,
                _ => f64::INFINITY,
            };
            central_mass(neg_a, b).ln()
        }
    }
}

/// CDF of the truncated normal at `x`; 0 below the window and 1 above it.
pub fn tn_cdf(spec: &TruncatedNormalSpec, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("CDF evaluated at NaN".into()));
    }
    let at = ExtReal::from_f64(x);
    if at <= spec.lower {
        return Ok(0.0);
    }
    if at >= spec.upper {
        return Ok(1.0);
    }
    let sd = spec.var.sqrt();
    let lo = spec.lower.standardize(spec.mu, sd);
    let hi = spec.upper.standardize(spec.mu, sd);
    let den = ln_window_mass(lo, hi);
    if !den.is_finite() {
        return Err(Error::DegenerateWindow);
    }
    let num = ln_window_mass(lo, at.standardize(spec.mu, sd));
    Ok((num - den).exp().clamp(0.0, 1.0))
}

/// Largest bracket half-width, in standard deviations, tried by
/// [`solve_tn_mean`] before giving up.
pub const BRACKET_LIMIT_SD: f64 = 40.0;
pub const ROOT_TOLERANCE: f64 = 1e-8;
const MAX_BISECTIONS: usize = 200;

/// Finds the untruncated mean `μ*` at which `observed` sits at quantile
/// `target` of the truncated law, i.e. `F_{μ*}(observed) = target`.
///
/// The CDF at a fixed point is strictly decreasing in the mean, so the root
/// is bracketed by widening `observed ± s·√var` (s = 1, 2, 4, ... up to 40)
/// and then bisected.
pub fn solve_tn_mean(
    observed: f64,
    var: f64,
    lower: ExtReal,
    upper: ExtReal,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!("target must lie in (0, 1), got {target}")));
    }
    let base = TruncatedNormalSpec::new(observed, var, lower, upper)?;
    let at = ExtReal::Finite(observed);
    if at < lower || at > upper {
        return Err(Error::InvalidArgument(format!(
            "observed value {observed} lies outside [{}, {}]",
            lower.to_f64(),
            upper.to_f64()
        )));
    }
    let sd = var.sqrt();
    let cdf = |mu: f64| tn_cdf(&base.with_mean(mu), observed);

    let mut width = 1.0;
    let (mut lo, mut hi) = loop {
        let lo = observed - width * sd;
        let hi = observed + width * sd;
        let f_lo = cdf(lo)?;
        let f_hi = cdf(hi)?;
        if f_lo >= target && f_hi <= target {
            break (lo, hi);
        }
        if width >= BRACKET_LIMIT_SD {
            return Err(Error::NoBracket { above: f_hi > target, limit: BRACKET_LIMIT_SD });
        }
        width = (2.0 * width).min(BRACKET_LIMIT_SD);
    };

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let f = cdf(mid)?;
        if (f - target).abs() <= ROOT_TOLERANCE {
            return Ok(mid);
        }
        if f > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(sd) {
            break;
        }
    }
    Ok(mid)
}
