//! Expected log-growth evaluation: exact enumeration, Monte Carlo,
//! simplex-constrained maximization, and dominance tests.
//!
//! For a return model with compound outcome set `R_n` and weights `K` on the
//! unit simplex, the per-step expected log growth over rebalancing period `n`
//! is `g_n(K) = (1/n) E[log(K' R_n)]`. The log is taken on the total-return
//! dot product directly: total returns are products of `(1 + X)` factors and
//! stay well-scaled, and `K' R_n = 1 + K' X_n` exactly in the reals.

mod frank_wolfe;

pub use frank_wolfe::{optimize_elg, optimize_on, OptimizationResult};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{CompoundOutcomeSet, ReturnModel, WeightVector};
use crate::{exec, rng, Error, Result};

/// How an ELG value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    Exact,
    MonteCarlo,
}

/// A value of `g_n(K)` in nats/step together with how it was obtained.
///
/// Exact estimates carry zero standard error and no sample count or seed;
/// Monte Carlo estimates record all three so a run can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElgEstimate {
    pub value: f64,
    pub method: EvalMethod,
    pub horizon: usize,
    pub std_error: f64,
    pub sample_count: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl ElgEstimate {
    fn exact(value: f64, horizon: usize) -> Self {
        ElgEstimate {
            value,
            method: EvalMethod::Exact,
            horizon,
            std_error: 0.0,
            sample_count: 0,
            seed: None,
        }
    }

    fn monte_carlo(value: f64, horizon: usize, std_error: f64, samples: u64, seed: u64) -> Self {
        debug_assert!(samples >= 1 && std_error >= 0.0);
        ElgEstimate {
            value,
            method: EvalMethod::MonteCarlo,
            horizon,
            std_error,
            sample_count: samples,
            seed: Some(seed),
        }
    }
}

fn check_weights(model: &ReturnModel, k: &WeightVector) -> Result<()> {
    if k.len() != model.asset_count() {
        return Err(Error::WeightLength {
            got: k.len(),
            expected: model.asset_count(),
        });
    }
    Ok(())
}

/// `g_n(K)` evaluated on an already enumerated outcome set.
pub fn elg_exact_on(outcomes: &CompoundOutcomeSet, k: &WeightVector) -> f64 {
    let weights = k.as_slice();
    let n = outcomes.horizon() as f64;
    exec::indexed_sum(outcomes.outcome_count(), |o| {
        let r = outcomes.total_returns(o);
        let dot: f64 = weights.iter().zip(r).map(|(w, x)| w * x).sum();
        outcomes.probability(o) * dot.ln()
    }) / n
}

/// Analytic gradient of `g_n` at `K` over an enumerated outcome set:
/// component `i` is `(1/n) E[R_ni / (K' R_n)]`.
pub fn elg_gradient(outcomes: &CompoundOutcomeSet, k: &WeightVector) -> Vec<f64> {
    let dots = exec::map_indexed(outcomes.outcome_count(), |o| {
        let r = outcomes.total_returns(o);
        k.as_slice().iter().zip(r).map(|(w, x)| w * x).sum::<f64>()
    });
    gradient_with_dots(outcomes, &dots)
}

pub(crate) fn gradient_with_dots(outcomes: &CompoundOutcomeSet, dots: &[f64]) -> Vec<f64> {
    let m = outcomes.asset_count();
    let n = outcomes.horizon() as f64;
    let mut grad = exec::indexed_sum_vec(outcomes.outcome_count(), m, |o, acc| {
        let w = outcomes.probability(o) / dots[o];
        for (g, x) in acc.iter_mut().zip(outcomes.total_returns(o)) {
            *g += w * x;
        }
    });
    for g in &mut grad {
        *g /= n;
    }
    grad
}

/// Exact `g_n(K)` by full enumeration of the `s^n` outcome tree.
///
/// Fails with [`Error::BudgetExceeded`] when `s^n > budget`; the caller
/// should switch to [`elg_mc`].
pub fn elg_exact(
    model: &ReturnModel,
    k: &WeightVector,
    n: usize,
    budget: u64,
) -> Result<ElgEstimate> {
    check_weights(model, k)?;
    let outcomes = CompoundOutcomeSet::enumerate(model, n, budget)?;
    Ok(ElgEstimate::exact(elg_exact_on(&outcomes, k), n))
}

/// Monte Carlo estimate of `g_n(K)` from `samples` simulated n-step paths.
///
/// Sample `i` draws from its own counter-based ChaCha8 stream (stream index
/// `i` under `seed`), so the estimate is reproducible bit-for-bit for a given
/// `(seed, samples, model, K, n)` and independent of evaluation order; shards
/// may run in parallel without changing the result.
pub fn elg_mc(
    model: &ReturnModel,
    k: &WeightVector,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ElgEstimate> {
    model.validate()?;
    check_weights(model, k)?;
    if n < 1 {
        return Err(Error::HorizonZero);
    }
    if samples < 2 {
        return Err(Error::TooFewSamples { samples });
    }
    let cum = model.cumulative_probabilities();
    let m = model.asset_count();
    let weights = k.as_slice();
    let count = samples as usize;

    let values = exec::map_indexed(count, |i| {
        let mut stream = rng::stream_rng(seed, i as u64);
        let mut totals = vec![1.0f64; m];
        for _ in 0..n {
            let u: f64 = stream.random();
            let atom = cum.partition_point(|&c| c <= u);
            for (t, x) in totals.iter_mut().zip(model.atom_row(atom)) {
                *t *= 1.0 + x;
            }
        }
        let dot: f64 = weights.iter().zip(&totals).map(|(w, r)| w * r).sum();
        dot.ln() / n as f64
    });

    let mean = exec::indexed_sum(count, |i| values[i]) / samples as f64;
    let ss = exec::indexed_sum(count, |i| {
        let d = values[i] - mean;
        d * d
    });
    let std_error = (ss / (samples - 1) as f64 / samples as f64).sqrt();
    Ok(ElgEstimate::monte_carlo(mean, n, std_error, samples, seed))
}

/// Pairwise attractiveness ratios and the dominant asset, if any.
///
/// Entry `(i, j)` is `E[(1 + X_i) / (1 + X_j)]`; asset `j` dominates when
/// every off-diagonal entry of column `j` is at most `1 + tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    m: usize,
    /// Row-major `m x m`; diagonal entries are exactly 1.
    ratio_matrix: Vec<f64>,
    pub dominant_index: Option<usize>,
    pub tolerance: f64,
}

impl DominanceReport {
    /// `E[(1 + X_i) / (1 + X_j)]`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.ratio_matrix[i * self.m + j]
    }

    pub fn asset_count(&self) -> usize {
        self.m
    }

    /// True when asset `j` is relatively more attractive than every other
    /// asset at the report's tolerance.
    pub fn qualifies(&self, j: usize) -> bool {
        (0..self.m).all(|i| i == j || self.ratio(i, j) <= 1.0 + self.tolerance)
    }
}

/// `E[(1 + X_i) / (1 + X_j)]` over the model atoms. Exactly 1 when `i == j`.
pub fn relative_attractiveness(model: &ReturnModel, i: usize, j: usize) -> Result<f64> {
    model.validate()?;
    let m = model.asset_count();
    if i >= m {
        return Err(Error::AssetIndexOutOfRange { index: i, m });
    }
    if j >= m {
        return Err(Error::AssetIndexOutOfRange { index: j, m });
    }
    if i == j {
        return Ok(1.0);
    }
    Ok(exec::indexed_sum_seq(model.atom_count(), |a| {
        model.probabilities()[a] * (1.0 + model.atom(a, i)) / (1.0 + model.atom(a, j))
    }))
}

/// Computes the full ratio matrix and finds the lowest-index asset that is
/// relatively more attractive than every other at slack `tolerance`.
pub fn find_dominant(model: &ReturnModel, tolerance: f64) -> Result<DominanceReport> {
    model.validate()?;
    let m = model.asset_count();
    let mut ratio_matrix = vec![1.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                ratio_matrix[i * m + j] = relative_attractiveness(model, i, j)?;
            }
        }
    }
    let mut report = DominanceReport {
        m,
        ratio_matrix,
        dominant_index: None,
        tolerance,
    };
    report.dominant_index = (0..m).find(|&j| report.qualifies(j));
    Ok(report)
}

/// Buy-and-hold account trajectory: `trajectory[t] = V0 * (K' R_t)` with
/// `R_t` the componentwise product of `(1 + x(k))` over the first `t` steps.
///
/// Equivalent to holding `N_i = K_i V0 / S_i(0)` shares of each asset and
/// marking to market.
pub fn account_value(v0: f64, k: &WeightVector, realized: &[Vec<f64>]) -> Result<Vec<f64>> {
    if !v0.is_finite() || v0 <= 0.0 {
        return Err(Error::NonpositiveInitialValue { value: v0 });
    }
    let m = k.len();
    for (step, row) in realized.iter().enumerate() {
        if row.len() != m {
            return Err(Error::WeightLength {
                got: row.len(),
                expected: m,
            });
        }
        for (asset, &x) in row.iter().enumerate() {
            if !x.is_finite() || x <= -1.0 {
                return Err(Error::ReturnNotAboveMinusOne {
                    atom: step,
                    asset,
                    value: x,
                });
            }
        }
    }
    let mut totals = vec![1.0f64; m];
    let mut trajectory = Vec::with_capacity(realized.len() + 1);
    trajectory.push(v0);
    for row in realized {
        for (t, &x) in totals.iter_mut().zip(row) {
            *t *= 1.0 + x;
        }
        let dot: f64 = k.as_slice().iter().zip(&totals).map(|(w, r)| w * r).sum();
        trajectory.push(v0 * dot);
    }
    Ok(trajectory)
}
