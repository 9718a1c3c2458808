use serde::Serialize;

use super::runner::{RepRecord, TnDraw};
use crate::gaussian::serialize_opt_ext_f64;

/// Rows with fewer passing replications than this are flagged degenerate.
pub const MIN_ACCEPTED_REPS: usize = 500;

/// True values of the two targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truth {
    pub beta_post: f64,
    pub gamma_post: f64,
}

/// One table row. Statistics are over the replications that passed the
/// pre-test; `mcse_*` columns are Monte Carlo standard errors of the column
/// they name. Missing values are empty in CSV and null in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTableRow {
    pub k: usize,
    pub reps: usize,
    pub n_accepted: usize,
    pub degenerate: bool,
    pub accept_prob: f64,
    pub mcse_accept_prob: f64,

    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mean_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub bias_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_bias_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mean_se_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub actual_sd_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub size_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_size_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub reject_zero_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_traditional: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_width_traditional: Option<f64>,

    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mean_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub bias_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_bias_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mean_se_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub actual_sd_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub size_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_size_efficient: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub reject_zero_efficient: Option<f64>,

    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_tn_beta: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub tn_reject_beta_post: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_tn_reject_beta_post: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_width_tn_beta: Option<f64>,

    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_tn_gamma: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub tn_reject_zero_gamma: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub mcse_tn_reject_zero_gamma: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    pub median_width_tn_gamma: Option<f64>,
}

impl SimTableRow {
    /// Clears every statistic, keeping counts and acceptance rate.
    pub fn suppress(&mut self) {
        *self = Self {
            degenerate: true,
            ..Self::empty(self.k, self.reps, self.n_accepted, self.accept_prob, self.mcse_accept_prob)
        };
    }

    fn empty(k: usize, reps: usize, n_accepted: usize, accept_prob: f64, mcse_accept_prob: f64) -> Self {
        Self {
            k,
            reps,
            n_accepted,
            degenerate: false,
            accept_prob,
            mcse_accept_prob,
            mean_traditional: None,
            bias_traditional: None,
            mcse_bias_traditional: None,
            mean_se_traditional: None,
            actual_sd_traditional: None,
            size_traditional: None,
            mcse_size_traditional: None,
            reject_zero_traditional: None,
            median_traditional: None,
            median_width_traditional: None,
            mean_efficient: None,
            bias_efficient: None,
            mcse_bias_efficient: None,
            mean_se_efficient: None,
            actual_sd_efficient: None,
            size_efficient: None,
            mcse_size_efficient: None,
            reject_zero_efficient: None,
            median_tn_beta: None,
            tn_reject_beta_post: None,
            mcse_tn_reject_beta_post: None,
            median_width_tn_beta: None,
            median_tn_gamma: None,
            tn_reject_zero_gamma: None,
            mcse_tn_reject_zero_gamma: None,
            median_width_tn_gamma: None,
        }
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation; undefined below two values.
fn sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Median with infinities ordered as usual; `None` when empty.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else if v[n / 2 - 1] == v[n / 2] {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn proportion(hits: impl Iterator<Item = bool>, n: usize) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let p = hits.filter(|h| *h).count() as f64 / n as f64;
    Some((p, (p * (1.0 - p) / n as f64).sqrt()))
}

struct WaldStats {
    mean: Option<f64>,
    bias: Option<f64>,
    mcse_bias: Option<f64>,
    mean_se: Option<f64>,
    sd: Option<f64>,
    size: Option<(f64, f64)>,
    reject_zero: Option<f64>,
}

fn wald_stats(pairs: &[(f64, f64)], truth: f64, z: f64) -> WaldStats {
    let est: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let se: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let m = mean(&est);
    let s = sd(&est);
    WaldStats {
        mean: m,
        bias: mean(&est.iter().map(|e| e - truth).collect::<Vec<_>>()),
        mcse_bias: s.map(|s| s / (est.len() as f64).sqrt()),
        mean_se: mean(&se),
        sd: s,
        size: proportion(pairs.iter().map(|(e, s)| (e - truth).abs() > z * s), pairs.len()),
        reject_zero: proportion(pairs.iter().map(|(e, s)| e.abs() > z * s), pairs.len()).map(|p| p.0),
    }
}

struct TnStats {
    median: Option<f64>,
    reject: Option<(f64, f64)>,
    median_width: Option<f64>,
}

fn tn_stats(draws: &[TnDraw], truth: f64) -> TnStats {
    let est: Vec<f64> = draws.iter().map(|d| d.estimate).collect();
    let widths: Vec<f64> = draws.iter().map(|d| d.upper - d.lower).collect();
    TnStats {
        median: median(&est),
        reject: proportion(draws.iter().map(|d| truth < d.lower || truth > d.upper), draws.len()),
        median_width: median(&widths),
    }
}

/// Aggregates the passing replications of one row. `reps` is the total
/// number of replications; `z` the two-sided Wald critical value.
pub fn summarize_row(k: usize, accepted: &[RepRecord], reps: usize, truth: Truth, z: f64) -> SimTableRow {
    let n = accepted.len();
    let accept_prob = n as f64 / reps as f64;
    let mut row = SimTableRow::empty(k, reps, n, accept_prob, (accept_prob * (1.0 - accept_prob) / reps as f64).sqrt());

    let trad: Vec<(f64, f64)> = accepted.iter().map(|r| (r.traditional, r.traditional_se)).collect();
    let t = wald_stats(&trad, truth.beta_post, z);
    row.mean_traditional = t.mean;
    row.bias_traditional = t.bias;
    row.mcse_bias_traditional = t.mcse_bias;
    row.mean_se_traditional = t.mean_se;
    row.actual_sd_traditional = t.sd;
    row.size_traditional = t.size.map(|p| p.0);
    row.mcse_size_traditional = t.size.map(|p| p.1);
    row.reject_zero_traditional = t.reject_zero;
    row.median_traditional = median(&trad.iter().map(|p| p.0).collect::<Vec<_>>());
    row.median_width_traditional = median(&trad.iter().map(|p| 2.0 * z * p.1).collect::<Vec<_>>());

    let eff: Vec<(f64, f64)> = accepted.iter().filter_map(|r| r.efficient).collect();
    if !eff.is_empty() {
        let e = wald_stats(&eff, truth.beta_post, z);
        row.mean_efficient = e.mean;
        row.bias_efficient = e.bias;
        row.mcse_bias_efficient = e.mcse_bias;
        row.mean_se_efficient = e.mean_se;
        row.actual_sd_efficient = e.sd;
        row.size_efficient = e.size.map(|p| p.0);
        row.mcse_size_efficient = e.size.map(|p| p.1);
        row.reject_zero_efficient = e.reject_zero;
    }

    let beta: Vec<TnDraw> = accepted.iter().filter_map(|r| r.tn_beta).collect();
    if !beta.is_empty() {
        let s = tn_stats(&beta, truth.beta_post);
        row.median_tn_beta = s.median;
        row.tn_reject_beta_post = s.reject.map(|p| p.0);
        row.mcse_tn_reject_beta_post = s.reject.map(|p| p.1);
        row.median_width_tn_beta = s.median_width;
    }
    let gamma: Vec<TnDraw> = accepted.iter().filter_map(|r| r.tn_gamma).collect();
    if !gamma.is_empty() {
        let s = tn_stats(&gamma, truth.gamma_post);
        row.median_tn_gamma = s.median;
        row.tn_reject_zero_gamma = s.reject.map(|p| p.0);
        row.mcse_tn_reject_zero_gamma = s.reject.map(|p| p.1);
        row.median_width_tn_gamma = s.median_width;
    }
    row
}
