use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate_dgp, population_beta};
use super::summary::{summarize_row, SimTableRow, Truth, MIN_ACCEPTED_REPS};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::estimators::{condition_contrast, efficient_estimator, eta_beta, eta_gamma, ConditionalBlock};
use crate::event_study::CellTable;
use crate::gaussian::normal::norm_quantile;
use crate::pretest::{build_ns_polyhedron, critical_value};

/// Which published table a run reproduces. Tables 1 and 2 include the
/// unconditional `K = 0` row; tables 3 and 4 add the conditional estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    One,
    Two,
    Three,
    Four,
}

impl TableId {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            4 => Ok(Self::Four),
            _ => Err(Error::InvalidArgument(format!("table must be 1, 2, 3 or 4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Three => 3,
            Self::Four => 4,
        }
    }

    fn unconditional_row(self) -> bool {
        matches!(self, Self::One | Self::Two)
    }

    fn conditional_estimators(self) -> bool {
        matches!(self, Self::Three | Self::Four)
    }
}

/// Rows of a table: `0..=k_max` or `1..=k_max`.
pub fn table_k_range(table: TableId, k_max: usize) -> std::ops::RangeInclusive<usize> {
    if table.unconditional_row() {
        0..=k_max
    } else {
        1..=k_max
    }
}

/// Median-unbiased estimate and interval from one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnDraw {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// What one replication contributes to one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepRecord {
    pub passed: bool,
    pub traditional: f64,
    pub traditional_se: f64,
    /// Absent in the unconditional row.
    pub efficient: Option<(f64, f64)>,
    pub tn_beta: Option<TnDraw>,
    pub tn_gamma: Option<TnDraw>,
}

fn tn_draw(block: ConditionalBlock) -> TnDraw {
    TnDraw { estimate: block.estimate, lower: block.ci_lower, upper: block.ci_upper }
}

fn record(config: &SimConfig, cells: &CellTable, k: usize, conditional: bool) -> Result<RepRecord> {
    if k == 0 {
        let (post, reference) = (cells.period(1), cells.period(0));
        return Ok(RepRecord {
            passed: true,
            traditional: post.diff() - reference.diff(),
            traditional_se: (post.diff_var() + reference.diff_var()).sqrt(),
            efficient: None,
            tn_beta: None,
            tn_gamma: None,
        });
    }
    let bundle = cells.bundle(k)?;
    let c = critical_value(config.alpha_pretest)?;
    let passed = (0..k).all(|j| bundle.beta_pre[j].abs() <= c * bundle.sigma.get(j + 1, j + 1).sqrt());
    let eff = efficient_estimator(&bundle)?;
    let (mut tn_beta, mut tn_gamma) = (None, None);
    if passed && conditional {
        let constraint = build_ns_polyhedron(&bundle.sigma, config.alpha_pretest)?;
        let law = condition_contrast(&bundle, &eta_beta(k), &constraint)?;
        tn_beta = Some(tn_draw(ConditionalBlock::from_law(&law, config.alpha_ci, None)?));
        if config.trend_order <= k {
            let law = condition_contrast(&bundle, &eta_gamma(k, config.trend_order, 1)?, &constraint)?;
            tn_gamma = Some(tn_draw(ConditionalBlock::from_law(&law, config.alpha_ci, None)?));
        }
    }
    Ok(RepRecord {
        passed,
        traditional: bundle.beta_post,
        traditional_se: bundle.sigma.sigma11().sqrt(),
        efficient: Some((eff.estimate, eff.se())),
        tn_beta,
        tn_gamma,
    })
}

/// Replication `index`: one dataset with `k_max` pre-periods, analyzed once
/// per row using its first `K` pre-periods. Each replication has its own
/// ChaCha stream, so results do not depend on scheduling.
pub fn replicate(config: &SimConfig, table: TableId, index: u64) -> Result<Vec<RepRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let cells = generate_dgp(config, config.k_max, &mut rng)?;
    table_k_range(table, config.k_max)
        .map(|k| record(config, &cells, k, table.conditional_estimators()))
        .collect()
}

fn replicate_all(config: &SimConfig, table: TableId) -> Result<Vec<Vec<RepRecord>>> {
    let run = || (0..config.reps as u64).into_par_iter().map(|i| replicate(config, table, i)).collect();
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Simulates `config.reps` datasets and summarizes each row over the
/// replications that passed the pre-test (all of them for `K = 0`). Rows
/// with fewer than [`MIN_ACCEPTED_REPS`] passing replications are flagged
/// degenerate and carry no statistics.
pub fn run_table(config: &SimConfig, table: TableId) -> Result<Vec<SimTableRow>> {
    config.validate()?;
    let reps = replicate_all(config, table)?;
    let truth = Truth { beta_post: population_beta(config, 1), gamma_post: 0.0 };
    let z = norm_quantile(1.0 - config.alpha_ci / 2.0);
    Ok(table_k_range(table, config.k_max)
        .enumerate()
        .map(|(row, k)| {
            let accepted: Vec<RepRecord> = reps.iter().map(|r| r[row]).filter(|r| r.passed).collect();
            let mut out = summarize_row(k, &accepted, config.reps, truth, z);
            if accepted.len() < MIN_ACCEPTED_REPS {
                out.suppress();
            }
            out
        })
        .collect())
}
