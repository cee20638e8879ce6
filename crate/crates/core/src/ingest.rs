//! Tick-data replay: CSV ingestion, realized and compound returns,
//! sliding-window dominance ratios, empirical plug-in models, and gap-curve
//! tables.
//!
//! The pipeline mirrors a two-asset high-frequency study: cash at a constant
//! per-tick rate `r` (default 0) against one risky asset whose per-tick
//! returns come from a traded price path. Realized returns feed a plug-in
//! model with uniform mass on the observations, which the `elg` and `bounds`
//! machinery then treats like any other finite-support model. All reported
//! growth values are per tick; nothing is annualized.

use serde::{Deserialize, Serialize};

use crate::elg::{self, optimize_elg, EvalMethod};
use crate::model::{ReturnModel, WeightVector};
use crate::{bounds, exec, Error, Result, DEFAULT_BUDGET, DEFAULT_MAX_ITERS, DEFAULT_TOL};

/// A timestamped traded price path. Prices are strictly positive and
/// timestamps non-decreasing; repeated prices (zero returns) are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    pub timestamps: Vec<f64>,
    pub prices: Vec<f64>,
}

impl TickSeries {
    pub fn new(timestamps: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        let series = TickSeries { timestamps, prices };
        series.validate()?;
        Ok(series)
    }

    fn validate(&self) -> Result<()> {
        if self.timestamps.len() != self.prices.len() {
            return Err(Error::TickParse {
                line: 0,
                message: format!(
                    "{} timestamps vs {} prices",
                    self.timestamps.len(),
                    self.prices.len()
                ),
            });
        }
        for (i, &p) in self.prices.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::NonpositivePrice {
                    line: i + 1,
                    value: p,
                });
            }
        }
        for i in 1..self.timestamps.len() {
            if self.timestamps[i] < self.timestamps[i - 1] {
                return Err(Error::DecreasingTimestamp { line: i + 1 });
            }
        }
        Ok(())
    }

    pub fn tick_count(&self) -> usize {
        self.prices.len()
    }
}

/// Parses a `timestamp,price` CSV tick file, keeping row order.
///
/// A single leading header line is tolerated: if the first row does not
/// parse as two numbers it is skipped. Reported line numbers are 1-based
/// positions in the file.
pub fn load_ticks(path: impl AsRef<std::path::Path>) -> Result<TickSeries> {
    parse_ticks(&std::fs::read_to_string(path)?)
}

/// [`load_ticks`] on in-memory text.
pub fn parse_ticks(text: &str) -> Result<TickSeries> {
    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let parsed = parse_tick_row(row);
        match parsed {
            Some((t, p)) => {
                if !p.is_finite() || p <= 0.0 {
                    return Err(Error::NonpositivePrice { line, value: p });
                }
                if let Some(&prev) = timestamps.last() {
                    if t < prev {
                        return Err(Error::DecreasingTimestamp { line });
                    }
                }
                timestamps.push(t);
                prices.push(p);
            }
            None if line == 1 => continue, // header row
            None => {
                return Err(Error::TickParse {
                    line,
                    message: format!("expected `timestamp,price`, got {row:?}"),
                })
            }
        }
    }
    TickSeries::new(timestamps, prices)
}

fn parse_tick_row(row: &str) -> Option<(f64, f64)> {
    let (ts, px) = row.split_once(',')?;
    let t: f64 = ts.trim().parse().ok()?;
    let p: f64 = px.trim().parse().ok()?;
    t.is_finite().then_some((t, p))
}

/// Per-tick net returns `x(k) = (s(k+1) - s(k)) / s(k)`; positivity of
/// prices keeps every entry above -1.
pub fn realized_returns(ticks: &TickSeries) -> Result<Vec<f64>> {
    if ticks.tick_count() < 2 {
        return Err(Error::TooFewTicks {
            need: 2,
            got: ticks.tick_count(),
        });
    }
    Ok(ticks
        .prices
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .collect())
}

/// Non-overlapping n-step compound returns: block `b` covers returns
/// `[b*n, (b+1)*n)` and compounds to `prod(1 + x) - 1`; a trailing partial
/// block is dropped.
pub fn realized_compound(x: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::HorizonZero);
    }
    if n == 1 {
        // Identity case, kept free of (1 + x) - 1 rounding.
        return Ok(x.to_vec());
    }
    Ok(x.chunks_exact(n)
        .map(|block| block.iter().map(|r| 1.0 + r).product::<f64>() - 1.0)
        .collect())
}

/// Trailing-window dominance ratios for the two-asset cash/risky pair.
///
/// At return index `k >= window - 1`,
///
/// ```text
/// asset_ratio(k) = (1/M) sum_{l=0}^{M-1} (1 + r) / (1 + x(k - l))
/// cash_ratio(k)  = (1/M) sum_{l=0}^{M-1} (1 + x(k - l)) / (1 + r)
/// ```
///
/// The risky asset is deemed dominant at `k` when `asset_ratio(k) <= 1`,
/// cash when `cash_ratio(k) <= 1`; on real data a few steps may satisfy
/// neither, so dominance is reported per tick rather than asserted globally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceSeries {
    pub window: usize,
    pub riskless_rate: f64,
    /// `asset_ratio[i]` is the ratio at return index `start_index + i`.
    pub asset_ratio: Vec<f64>,
    pub cash_ratio: Vec<f64>,
    pub start_index: usize,
}

impl DominanceSeries {
    pub fn asset_ratio_at(&self, k: usize) -> f64 {
        self.asset_ratio[k - self.start_index]
    }

    pub fn cash_ratio_at(&self, k: usize) -> f64 {
        self.cash_ratio[k - self.start_index]
    }

    /// Fractions of windowed ticks at which the risky asset, cash, or
    /// neither is dominant.
    pub fn dominance_fractions(&self) -> DominanceFractions {
        let len = self.asset_ratio.len() as f64;
        let asset = self.asset_ratio.iter().filter(|&&v| v <= 1.0).count() as f64;
        let cash = self.cash_ratio.iter().filter(|&&v| v <= 1.0).count() as f64;
        let neither = self
            .asset_ratio
            .iter()
            .zip(&self.cash_ratio)
            .filter(|(&a, &c)| a > 1.0 && c > 1.0)
            .count() as f64;
        DominanceFractions {
            asset: asset / len,
            cash: cash / len,
            neither: neither / len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceFractions {
    pub asset: f64,
    pub cash: f64,
    pub neither: f64,
}

/// Sliding-window dominance test over a realized return series.
///
/// Each output element is the direct mean over its own window, summed in
/// fixed lag order, so chunked parallel evaluation reproduces the sequential
/// series exactly.
pub fn sliding_dominance(x: &[f64], r: f64, window: usize) -> Result<DominanceSeries> {
    if window < 1 {
        return Err(Error::WindowZero);
    }
    if x.len() < window {
        return Err(Error::SeriesShorterThanWindow {
            window,
            len: x.len(),
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::NegativeRisklessRate { rate: r });
    }
    for (i, &xi) in x.iter().enumerate() {
        if !xi.is_finite() || xi <= -1.0 {
            return Err(Error::ReturnNotAboveMinusOne {
                atom: i,
                asset: 1,
                value: xi,
            });
        }
    }
    let start_index = window - 1;
    let count = x.len() - start_index;
    let scale = 1.0 / window as f64;
    let gross_r = 1.0 + r;
    let asset_ratio = exec::map_indexed(count, |i| {
        let k = start_index + i;
        let mut sum = 0.0;
        for l in 0..window {
            sum += gross_r / (1.0 + x[k - l]);
        }
        sum * scale
    });
    let cash_ratio = exec::map_indexed(count, |i| {
        let k = start_index + i;
        let mut sum = 0.0;
        for l in 0..window {
            sum += (1.0 + x[k - l]) / gross_r;
        }
        sum * scale
    });
    Ok(DominanceSeries {
        window,
        riskless_rate: r,
        asset_ratio,
        cash_ratio,
        start_index,
    })
}

/// Plug-in two-asset model: cash at rate `r` against a risky asset whose
/// atoms are the observed returns with uniform probability.
pub fn empirical_model(x: &[f64], r: f64) -> Result<ReturnModel> {
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let p = 1.0 / x.len() as f64;
    let atoms: Vec<Vec<f64>> = x.iter().map(|&xi| vec![r, xi]).collect();
    ReturnModel::new(
        vec!["cash".into(), "risky".into()],
        atoms,
        vec![p; x.len()],
        Some(0),
    )
}

/// One row of the gap-curve table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurveRow {
    pub n: usize,
    /// Optimal high-frequency benchmark of the empirical model (nats/tick).
    pub g1_star: f64,
    /// Buy-and-hold value `g_n(K)` (nats/tick).
    pub g_n: f64,
    pub gap: f64,
    pub method: EvalMethod,
    /// Standard error of `g_n` when Monte Carlo was used, else 0.
    pub std_error: f64,
    /// Baseline upper bound `(1/n) log(1/K_2)`; present only when the risky
    /// asset tests dominant at tolerance 0.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline_upper: Option<f64>,
    /// Improved upper bound; same presence rule.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub improved_upper: Option<f64>,
}

/// Gap-curve table `g_1* - g_n(K)` over `n_grid` for a two-asset weight `K`.
///
/// `g_n(K)` is exact while `len(x)^n` fits the default enumeration budget
/// and falls back to Monte Carlo with `samples` paths under `seed` beyond
/// it. Bound columns appear when the risky asset tests dominant.
pub fn empirical_gap_curve(
    x: &[f64],
    r: f64,
    k: &WeightVector,
    n_grid: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Vec<GapCurveRow>> {
    if k.len() != 2 {
        return Err(Error::WeightLength {
            got: k.len(),
            expected: 2,
        });
    }
    let k2 = k.get(1);
    if !(k2 > 0.0 && k2 <= 1.0) {
        return Err(Error::WeightOutOfRange {
            value: k2,
            range: "(0, 1]",
        });
    }
    let model = empirical_model(x, r)?;
    let g1_star = optimize_elg(&model, 1, DEFAULT_TOL, DEFAULT_MAX_ITERS, DEFAULT_BUDGET)?.value;
    let dominant_risky = elg::find_dominant(&model, 0.0)?.qualifies(1);

    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        if n < 1 {
            return Err(Error::HorizonZero);
        }
        let estimate = match elg::elg_exact(&model, k, n, DEFAULT_BUDGET) {
            Ok(e) => e,
            Err(Error::BudgetExceeded { .. }) => elg::elg_mc(&model, k, n, samples, seed)?,
            Err(other) => return Err(other),
        };
        let (baseline_upper, improved_upper) = if dominant_risky {
            let baseline = bounds::buyhold_gap_bounds(k2, n)?;
            let improved = match bounds::improved_gap_bounds(&model, k, 1, n, DEFAULT_BUDGET) {
                Ok(b) => b,
                Err(Error::BudgetExceeded { .. }) => {
                    bounds::improved_gap_bounds_mc(&model, k, 1, n, samples, seed)?
                }
                Err(other) => return Err(other),
            };
            (Some(baseline.upper), Some(improved.upper))
        } else {
            (None, None)
        };
        rows.push(GapCurveRow {
            n,
            g1_star,
            g_n: estimate.value,
            gap: g1_star - estimate.value,
            method: estimate.method,
            std_error: estimate.std_error,
            baseline_upper,
            improved_upper,
        });
    }
    Ok(rows)
}

/// The compound-outcome-set budget gate used by the gap curve, exposed for
/// callers that want to know ahead of time which rows will be exact.
pub fn enumeration_fits(atom_count: usize, n: usize, budget: u64) -> bool {
    (atom_count as u128)
        .checked_pow(n as u32)
        .is_some_and(|req| req <= budget as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_tick_file_parses() {
        let ticks = parse_ticks("0,100\n1,101\n").unwrap();
        assert_eq!(ticks.tick_count(), 2);
        assert_eq!(ticks.prices, vec![100.0, 101.0]);
        assert_eq!(ticks.timestamps, vec![0.0, 1.0]);
    }

    #[test]
    fn header_line_is_skipped() {
        let ticks = parse_ticks("timestamp,price\n0,100\n1,101\n").unwrap();
        assert_eq!(ticks.tick_count(), 2);
    }

    #[test]
    fn zero_price_reports_line() {
        let err = parse_ticks("0,100\n1,0\n").unwrap_err();
        assert!(matches!(err, Error::NonpositivePrice { line: 2, .. }));
    }

    #[test]
    fn decreasing_timestamp_reports_line() {
        let err = parse_ticks("0,100\n5,101\n4,102\n").unwrap_err();
        assert!(matches!(err, Error::DecreasingTimestamp { line: 3 }));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_ticks("0,100\nnot-a-row\n").unwrap_err();
        assert!(matches!(err, Error::TickParse { line: 2, .. }));
    }

    #[test]
    fn returns_example() {
        let ticks = parse_ticks("0,100\n1,101\n").unwrap();
        let x = realized_returns(&ticks).unwrap();
        assert_eq!(x.len(), 1);
        assert!((x[0] - 0.01).abs() <= 1e-15);
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let ticks = TickSeries::new(vec![0.0, 1.0, 2.0], vec![5.0, 5.0, 5.0]).unwrap();
        assert_eq!(realized_returns(&ticks).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn too_few_ticks_rejected() {
        let ticks = TickSeries::new(vec![0.0], vec![5.0]).unwrap();
        assert!(matches!(
            realized_returns(&ticks),
            Err(Error::TooFewTicks { need: 2, got: 1 })
        ));
    }

    #[test]
    fn compound_identity_and_blocks() {
        let x = vec![0.1, 0.1];
        assert_eq!(realized_compound(&x, 1).unwrap(), x);
        let two = realized_compound(&x, 2).unwrap();
        assert_eq!(two.len(), 1);
        assert!((two[0] - 0.21).abs() <= 1e-15);
        // Trailing partial block dropped.
        assert_eq!(realized_compound(&[0.1, 0.2, 0.3], 2).unwrap().len(), 1);
        assert!(realized_compound(&x, 0).is_err());
    }

    #[test]
    fn compound_matches_per_block_product() {
        let x: Vec<f64> = (0..20).map(|i| 0.01 * ((i * 7 % 11) as f64 - 5.0)).collect();
        let n = 3;
        let blocks = realized_compound(&x, n).unwrap();
        for (b, got) in blocks.iter().enumerate() {
            let mut expect = 1.0f64;
            for &xv in &x[b * n..(b + 1) * n] {
                expect *= 1.0 + xv;
            }
            assert_eq!(got.to_bits(), (expect - 1.0).to_bits());
        }
    }

    #[test]
    fn zero_returns_give_unit_ratios() {
        let x = vec![0.0; 10];
        let series = sliding_dominance(&x, 0.0, 4).unwrap();
        assert_eq!(series.start_index, 3);
        assert_eq!(series.asset_ratio.len(), 7);
        assert!(series.asset_ratio.iter().all(|&v| v == 1.0));
        assert!(series.cash_ratio.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn constant_positive_return_makes_asset_dominant() {
        let x = vec![0.05; 8];
        let series = sliding_dominance(&x, 0.0, 3).unwrap();
        for k in series.start_index..x.len() {
            assert!((series.asset_ratio_at(k) - 1.0 / 1.05).abs() <= 1e-14);
            assert!((series.cash_ratio_at(k) - 1.05).abs() <= 1e-14);
        }
        let fractions = series.dominance_fractions();
        assert_eq!(fractions.asset, 1.0);
        assert_eq!(fractions.cash, 0.0);
        assert_eq!(fractions.neither, 0.0);
    }

    #[test]
    fn window_longer_than_series_rejected() {
        assert!(matches!(
            sliding_dominance(&[0.0, 0.0], 0.0, 3),
            Err(Error::SeriesShorterThanWindow { window: 3, len: 2 })
        ));
    }

    #[test]
    fn single_window_product_is_near_one() {
        // With M = 1 the two ratios are exact reciprocals in the reals;
        // in floats the product can be off by an ulp.
        let x = vec![0.013, -0.007, 0.002, 0.031];
        let series = sliding_dominance(&x, 0.0, 1).unwrap();
        for i in 0..x.len() {
            let product = series.asset_ratio[i] * series.cash_ratio[i];
            assert!((product - 1.0).abs() <= 4.0 * f64::EPSILON, "{product}");
        }
    }

    #[test]
    fn empirical_model_examples() {
        let single = empirical_model(&[0.01], 0.0).unwrap();
        assert_eq!(single.atom_count(), 1);
        assert_eq!(single.atom_row(0), &[0.0, 0.01]);
        assert_eq!(single.probabilities(), &[1.0]);

        let pair = empirical_model(&[0.2, -0.1], 0.0).unwrap();
        assert_eq!(pair.atom_count(), 2);
        assert_eq!(pair.atom(0, 1), 0.2);
        assert_eq!(pair.atom(1, 1), -0.1);
        assert_eq!(pair.riskless_index(), Some(0));

        assert!(matches!(empirical_model(&[], 0.0), Err(Error::EmptySeries)));
    }

    #[test]
    fn empirical_model_preserves_sample_mean_exactly() {
        let x: Vec<f64> = (0..37).map(|i| ((i * 13 % 17) as f64 - 8.0) * 1e-3).collect();
        let model = empirical_model(&x, 0.0).unwrap();
        let series_mean = x.iter().sum::<f64>() / x.len() as f64;
        let model_mean = (0..model.atom_count())
            .map(|a| model.atom(a, 1))
            .sum::<f64>()
            / model.atom_count() as f64;
        assert_eq!(series_mean.to_bits(), model_mean.to_bits());
    }

    #[test]
    fn gap_curve_full_weight_rows_are_zero() {
        // Upward drift makes the risky asset dominant, so the optimizer
        // lands exactly on it and the K2 = 1 gap vanishes.
        let x = vec![0.002, 0.001, 0.003, 0.001, 0.002, 0.004, 0.001];
        let k = WeightVector::new(vec![0.0, 1.0]).unwrap();
        let rows = empirical_gap_curve(&x, 0.0, &k, &[1, 2], 1000, 0).unwrap();
        for row in &rows {
            assert_eq!(row.method, EvalMethod::Exact);
            assert!(row.gap.abs() <= 1e-12, "n={}: gap {}", row.n, row.gap);
            assert!(row.baseline_upper.is_some());
        }
    }

    #[test]
    fn gap_curve_exact_rows_respect_bounds() {
        let x = vec![0.002, -0.001, 0.003, 0.001, -0.002, 0.004, 0.001, 0.002];
        for &k2 in &[0.25, 0.5, 0.75, 0.9] {
            let k = WeightVector::new(vec![1.0 - k2, k2]).unwrap();
            let rows = empirical_gap_curve(&x, 0.0, &k, &[1, 2], 1000, 0).unwrap();
            for row in &rows {
                if row.method == EvalMethod::Exact {
                    if let (Some(b), Some(im)) = (row.baseline_upper, row.improved_upper) {
                        assert!(row.gap <= b + 1e-12);
                        assert!(im <= b + 1e-12);
                        assert!(row.gap >= -1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn gap_curve_falls_back_to_monte_carlo() {
        // 12 atoms at n = 8 is past a budget of 10^6, so the row is MC.
        let x: Vec<f64> = (0..12).map(|i| ((i % 5) as f64 - 2.0) * 1e-3).collect();
        let k = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let rows = empirical_gap_curve(&x, 0.0, &k, &[1, 8], 500, 3).unwrap();
        assert_eq!(rows[0].method, EvalMethod::Exact);
        assert_eq!(rows[1].method, EvalMethod::MonteCarlo);
        assert!(rows[1].std_error > 0.0);
    }
}
