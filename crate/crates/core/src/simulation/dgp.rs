use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::SimConfig;
use crate::error::Result;
use crate::event_study::{CellStats, CellTable, Observation, PanelData, PeriodCells};

/// Population event-study coefficient `β_t = δ·t`.
pub fn population_beta(config: &SimConfig, t: i64) -> f64 {
    config.trend_slope * t as f64
}

fn cell_mean(config: &SimConfig, t: i64, treated: bool) -> f64 {
    if treated {
        population_beta(config, t)
    } else {
        0.0
    }
}

/// Individual outcomes `y = δ·t·treated + σ·ε` for `n_per_cell` fresh units in
/// every group-period cell of periods `-k..=1`.
pub fn generate_panel<R: Rng + ?Sized>(config: &SimConfig, k: usize, rng: &mut R) -> Result<PanelData> {
    let n = config.n_per_cell;
    let mut rows = Vec::with_capacity(2 * n * (k + 2));
    for t in -(k as i64)..=1 {
        for treated in [false, true] {
            let mu = cell_mean(config, t, treated);
            for i in 0..n {
                let eps: f64 = rng.sample(StandardNormal);
                rows.push(Observation {
                    unit: format!("{}{}_{}", if treated { 'T' } else { 'C' }, t, i),
                    period: t,
                    treated,
                    outcome: mu + config.sigma_noise * eps,
                });
            }
        }
    }
    PanelData::new(rows)
}

/// Cell means and sample variances drawn from their exact sampling laws:
/// `ȳ ~ N(μ, σ²/n)` and, independently, `s² ~ σ²·χ²(n−1)/(n−1)`.
pub fn generate_cells<R: Rng + ?Sized>(config: &SimConfig, k: usize, rng: &mut R) -> Result<CellTable> {
    let n = config.n_per_cell;
    let sigma = config.sigma_noise;
    let chi = ChiSquared::new((n - 1) as f64).expect("n_per_cell >= 2");
    let mut draw = |mu: f64| {
        let z: f64 = rng.sample(StandardNormal);
        let mean = mu + sigma * z / (n as f64).sqrt();
        let var = if config.known_sigma { sigma * sigma } else { sigma * sigma * chi.sample(rng) / (n - 1) as f64 };
        CellStats { n, mean, var }
    };
    let periods = (-(k as i64)..=1)
        .map(|t| {
            let control = draw(cell_mean(config, t, false));
            let treated = draw(cell_mean(config, t, true));
            PeriodCells { treated, control }
        })
        .collect();
    CellTable::new(k, periods)
}

/// Sufficient statistics for one simulated dataset, by the path the config
/// selects.
pub fn generate_dgp<R: Rng + ?Sized>(config: &SimConfig, k: usize, rng: &mut R) -> Result<CellTable> {
    if config.fast_path {
        generate_cells(config, k, rng)
    } else {
        let panel = generate_panel(config, k, rng)?;
        let mut table = CellTable::from_panel(&panel);
        if config.known_sigma {
            table = CellTable::new(
                k,
                (-(k as i64)..=1)
                    .map(|t| {
                        let mut p = *table.period(t);
                        p.treated.var = config.sigma_noise.powi(2);
                        p.control.var = config.sigma_noise.powi(2);
                        p
                    })
                    .collect(),
            )?;
        }
        Ok(table)
    }
}
