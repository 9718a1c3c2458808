//! Event-study coefficients and their covariance from long-format panel or
//! repeated cross-section data.
//!
//! With a single treated group, period effects and a main treatment effect,
//! the dummy regression is saturated, so its OLS coefficients reduce to
//! differences of cell means: `β̂_t = Δȳ_t − Δȳ_0`, where `Δȳ_t` is the
//! treated-minus-control mean in period `t`.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub unit: String,
    pub period: i64,
    pub treated: bool,
    pub outcome: f64,
}

/// Validated long-format data covering periods `-K..=1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    rows: Vec<Observation>,
    k: usize,
}

impl PanelData {
    pub fn new(rows: Vec<Observation>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InsufficientData("no observations".into()));
        }
        if let Some(bad) = rows.iter().find(|r| !r.outcome.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite outcome for unit {} in period {}",
                bad.unit, bad.period
            )));
        }
        let mut seen = HashSet::with_capacity(rows.len());
        for r in &rows {
            if !seen.insert((r.unit.as_str(), r.period)) {
                return Err(Error::Validation(format!(
                    "duplicate row for unit {} in period {}",
                    r.unit, r.period
                )));
            }
        }

        let mut counts: BTreeMap<i64, [usize; 2]> = BTreeMap::new();
        for r in &rows {
            counts.entry(r.period).or_default()[r.treated as usize] += 1;
        }
        let first = *counts.keys().next().expect("non-empty");
        let last = *counts.keys().next_back().expect("non-empty");
        if last != 1 || first > -1 {
            return Err(Error::NonContiguousPeriods(format!(
                "observed periods {first}..={last}, need -K..=1 with K >= 1"
            )));
        }
        if let Some(gap) = (first..=1).find(|t| !counts.contains_key(t)) {
            return Err(Error::NonContiguousPeriods(format!("period {gap} is missing")));
        }
        for (t, [control, treated]) in &counts {
            for (label, n) in [("treated", treated), ("control", control)] {
                if *n < 2 {
                    return Err(Error::InsufficientData(format!(
                        "{label} group has {n} observation(s) in period {t}; need at least 2"
                    )));
                }
            }
        }
        Ok(Self { rows, k: (-first) as usize })
    }

    /// Number of pre-periods before the reference period 0.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

const HEADER: [&str; 4] = ["unit", "period", "treatment", "outcome"];

pub fn load_panel(path: impl AsRef<Path>) -> Result<PanelData> {
    let file = std::fs::File::open(path.as_ref())?;
    read_panel(file)
}

/// Writes `unit,period,treatment,outcome` CSV that [`read_panel`] reads back
/// exactly.
pub fn write_panel<W: std::io::Write>(data: &PanelData, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(HEADER).map_err(io)?;
    for r in data.rows() {
        w.write_record([
            r.unit.clone(),
            r.period.to_string(),
            (r.treated as u8).to_string(),
            r.outcome.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `unit,period,treatment,outcome` CSV. Line numbers in errors are
/// 1-based and count the header.
pub fn read_panel<R: Read>(reader: R) -> Result<PanelData> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|e| csv_error(e, 1))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_err = |what: &str, value: &str| Error::Parse {
            line,
            message: format!("invalid {what} `{value}`"),
        };
        let period = field(1).parse::<i64>().map_err(|_| parse_err("period", field(1)))?;
        let treated = match field(2) {
            "0" => false,
            "1" => true,
            other => return Err(parse_err("treatment (expected 0 or 1)", other)),
        };
        let outcome = field(3)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err("outcome", field(3)))?;
        rows.push(Observation { unit: field(0).to_string(), period, treated, outcome });
    }
    PanelData::new(rows)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse { line, message: e.to_string() }
}

/// Size, mean and sample variance (n − 1 denominator) of one group-period cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellStats {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
}

impl CellStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        let var = if n > 1 { ss / (n - 1) as f64 } else { f64::NAN };
        Self { n, mean, var }
    }

    fn var_of_mean(&self) -> f64 {
        self.var / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodCells {
    pub treated: CellStats,
    pub control: CellStats,
}

impl PeriodCells {
    /// Treated-minus-control difference of means.
    pub fn diff(&self) -> f64 {
        self.treated.mean - self.control.mean
    }

    pub fn diff_var(&self) -> f64 {
        self.treated.var_of_mean() + self.control.var_of_mean()
    }
}

/// Sufficient statistics for periods `-K..=1`, indexed by `period + K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    k: usize,
    periods: Vec<PeriodCells>,
}

impl CellTable {
    pub fn new(k: usize, periods: Vec<PeriodCells>) -> Result<Self> {
        if k == 0 || periods.len() != k + 2 {
            return Err(Error::InvalidArgument(format!(
                "need K >= 1 and K + 2 periods, got K = {k} with {} periods",
                periods.len()
            )));
        }
        for (i, p) in periods.iter().enumerate() {
            for c in [p.treated, p.control] {
                if c.n < 2 || !c.mean.is_finite() || !c.var.is_finite() || c.var < 0.0 {
                    return Err(Error::InsufficientData(format!(
                        "cell in period {} has n = {}, var = {}",
                        i as i64 - k as i64,
                        c.n,
                        c.var
                    )));
                }
            }
        }
        Ok(Self { k, periods })
    }

    pub fn from_panel(data: &PanelData) -> Self {
        let k = data.k();
        let mut values: Vec<[Vec<f64>; 2]> = vec![[Vec::new(), Vec::new()]; k + 2];
        for r in data.rows() {
            values[(r.period + k as i64) as usize][r.treated as usize].push(r.outcome);
        }
        let periods = values
            .iter()
            .map(|[control, treated]| PeriodCells {
                treated: CellStats::from_values(treated),
                control: CellStats::from_values(control),
            })
            .collect();
        Self { k, periods }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn period(&self, t: i64) -> &PeriodCells {
        &self.periods[(t + self.k as i64) as usize]
    }

    /// Coefficients and covariance using only pre-periods `-1..=-k`.
    pub fn bundle(&self, k: usize) -> Result<EstimateBundle> {
        if k == 0 || k > self.k {
            return Err(Error::InvalidArgument(format!("K = {k} outside 1..={}", self.k)));
        }
        let reference = self.period(0);
        let base = reference.diff();
        let beta_post = self.period(1).diff() - base;
        let beta_pre = DVector::from_iterator(k, (1..=k).map(|j| self.period(-(j as i64)).diff() - base));

        let shared = reference.diff_var();
        let own: Vec<f64> = std::iter::once(1)
            .chain((1..=k as i64).map(|j| -j))
            .map(|t| self.period(t).diff_var())
            .collect();
        let sigma = DMatrix::from_fn(k + 1, k + 1, |i, j| if i == j { shared + own[i] } else { shared });
        let sigma = CovarianceMatrix::new(sigma).map_err(|_| {
            Error::InsufficientData("a cell has zero sample variance; covariance is singular".into())
        })?;
        EstimateBundle::new(beta_post, beta_pre, sigma)
    }
}

/// Post and pre coefficients with their joint covariance.
///
/// Coefficient order everywhere is `(β̂_1, β̂_-1, β̂_-2, ..., β̂_-K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateBundle {
    pub beta_post: f64,
    #[serde(serialize_with = "serialize_dvector")]
    pub beta_pre: DVector<f64>,
    pub sigma: CovarianceMatrix,
    pub k: usize,
}

fn serialize_dvector<S: serde::Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

impl EstimateBundle {
    pub fn new(beta_post: f64, beta_pre: DVector<f64>, sigma: CovarianceMatrix) -> Result<Self> {
        let k = beta_pre.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one pre-period coefficient".into()));
        }
        if sigma.dim() != k + 1 {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}x{} but there are {} coefficients",
                sigma.dim(),
                sigma.dim(),
                k + 1
            )));
        }
        if !beta_post.is_finite() || beta_pre.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self { beta_post, beta_pre, sigma, k })
    }

    /// The stacked vector `(β̂_post, β̂_pre)`.
    pub fn coefficients(&self) -> DVector<f64> {
        DVector::from_iterator(self.k + 1, std::iter::once(self.beta_post).chain(self.beta_pre.iter().copied()))
    }

    /// Builds a bundle from a stacked `(post, pre...)` vector.
    pub fn from_coefficients(beta: &DVector<f64>, sigma: CovarianceMatrix) -> Result<Self> {
        if beta.len() < 2 {
            return Err(Error::InvalidArgument("need at least two coefficients".into()));
        }
        Self::new(beta[0], beta.rows(1, beta.len() - 1).into_owned(), sigma)
    }
}

pub fn estimate_event_study(data: &PanelData) -> Result<EstimateBundle> {
    CellTable::from_panel(data).bundle(data.k())
}

pub fn estimate_covariance(data: &PanelData) -> Result<CovarianceMatrix> {
    Ok(estimate_event_study(data)?.sigma)
}
