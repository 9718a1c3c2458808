//! The event-study estimator against a brute-force dummy-variable regression.

use nalgebra::{DMatrix, DVector};
use pretrends_core::event_study::{estimate_event_study, Observation, PanelData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_panel(rng: &mut ChaCha8Rng, k: usize) -> PanelData {
    let mut rows = Vec::new();
    for t in -(k as i64)..=1 {
        for treated in [false, true] {
            let n = rng.random_range(2..7);
            let shift: f64 = rng.random_range(-3.0..3.0);
            for i in 0..n {
                rows.push(Observation {
                    unit: format!("{treated}-{t}-{i}"),
                    period: t,
                    treated,
                    outcome: shift + rng.random_range(-1.0..1.0),
                });
            }
        }
    }
    PanelData::new(rows).unwrap()
}

/// OLS of y on an intercept, a treated dummy, period dummies and
/// treated-by-period dummies (period 0 omitted), solved from the normal
/// equations. Returns the interaction coefficients in the order
/// `(1, -1, ..., -K)`.
fn dummy_ols(data: &PanelData) -> Vec<f64> {
    let k = data.k() as i64;
    let periods: Vec<i64> = std::iter::once(1).chain((1..=k).map(|j| -j)).collect();
    let cols = 2 + 2 * periods.len();
    let n = data.len();
    let mut x = DMatrix::zeros(n, cols);
    let mut y = DVector::zeros(n);
    for (i, r) in data.rows().iter().enumerate() {
        let d = r.treated as u8 as f64;
        x[(i, 0)] = 1.0;
        x[(i, 1)] = d;
        for (j, &t) in periods.iter().enumerate() {
            if r.period == t {
                x[(i, 2 + j)] = 1.0;
                x[(i, 2 + periods.len() + j)] = d;
            }
        }
        y[i] = r.outcome;
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let coef = xtx.lu().solve(&xty).expect("saturated design is full rank");
    coef.rows(2 + periods.len(), periods.len()).iter().copied().collect()
}

#[test]
fn matches_dummy_regression() {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for _ in 0..200 {
        let k = rng.random_range(1..=4);
        let data = random_panel(&mut rng, k);
        let bundle = estimate_event_study(&data).unwrap();
        let ols = dummy_ols(&data);
        assert!((bundle.beta_post - ols[0]).abs() < 1e-8);
        for j in 0..k {
            assert!((bundle.beta_pre[j] - ols[j + 1]).abs() < 1e-8);
        }
    }
}

#[test]
fn invariant_to_level_and_period_shocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let data = random_panel(&mut rng, 3);
    let base = estimate_event_study(&data).unwrap();
    let shocked: Vec<Observation> = data
        .rows()
        .iter()
        .map(|r| Observation { outcome: r.outcome + 10.0 + 0.7 * r.period as f64 * r.period as f64, ..r.clone() })
        .collect();
    let b = estimate_event_study(&PanelData::new(shocked).unwrap()).unwrap();
    assert!((b.beta_post - base.beta_post).abs() < 1e-10);
    assert!((&b.beta_pre - &base.beta_pre).amax() < 1e-10);
    assert!((b.sigma.entries() - base.sigma.entries()).amax() < 1e-12);
}

#[test]
fn invariant_to_row_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let data = random_panel(&mut rng, 2);
    let mut rows = data.rows().to_vec();
    rows.reverse();
    let b = estimate_event_study(&PanelData::new(rows).unwrap()).unwrap();
    let base = estimate_event_study(&data).unwrap();
    assert!((b.beta_post - base.beta_post).abs() < 1e-12);
    assert!((b.sigma.entries() - base.sigma.entries()).amax() < 1e-14);
}
