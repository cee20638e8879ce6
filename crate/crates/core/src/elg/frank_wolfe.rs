//! Conditional-gradient maximization of `g_n(K)` over the unit simplex.
//!
//! The objective is concave and the feasible set is the simplex, so the
//! Frank-Wolfe duality gap `max_i grad_i - K' grad` is a certified upper
//! bound on `g_n* - g_n(K)` at every iterate. The implementation is the
//! away-step variant with exact line search: away steps avoid the zig-zag
//! stall of the vanilla method when the maximizer sits on a face of the
//! simplex, and exact line search lands on vertex solutions (the dominant
//! asset case) exactly rather than asymptotically. Ties in both the forward
//! and away vertex selection break toward the lowest asset index.

use serde::{Deserialize, Serialize};

use crate::model::{CompoundOutcomeSet, ReturnModel, WeightVector};
use crate::{exec, Error, Result};

/// Outcome of a simplex ELG maximization.
///
/// `gradient_gap` is the final Frank-Wolfe duality gap in nats/step; on
/// success it is at most the requested tolerance and certifies
/// `g_n* - value <= gradient_gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub weights: WeightVector,
    pub value: f64,
    pub iterations: usize,
    pub gradient_gap: f64,
    pub horizon: usize,
}

/// Maximizes `g_n(K)` over the simplex using exact gradients over the
/// enumerated outcome set.
///
/// Returns when the duality gap drops to `tol`. If `max_iters` runs out
/// first, the best iterate is handed back inside [`Error::Unconverged`].
pub fn optimize_elg(
    model: &ReturnModel,
    n: usize,
    tol: f64,
    max_iters: usize,
    budget: u64,
) -> Result<OptimizationResult> {
    let outcomes = CompoundOutcomeSet::enumerate(model, n, budget)?;
    optimize_on(&outcomes, tol, max_iters)
}

/// [`optimize_elg`] on an already enumerated outcome set.
pub fn optimize_on(
    outcomes: &CompoundOutcomeSet,
    tol: f64,
    max_iters: usize,
) -> Result<OptimizationResult> {
    let m = outcomes.asset_count();
    let count = outcomes.outcome_count();
    let mut k = vec![1.0 / m as f64; m];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < max_iters {
        // Dot products K' R per outcome, reused by gradient and line search.
        let dots = exec::map_indexed(count, |o| {
            let r = outcomes.total_returns(o);
            k.iter().zip(r).map(|(w, x)| w * x).sum::<f64>()
        });
        let grad = super::gradient_with_dots(outcomes, &dots);

        let forward = argmax(&grad);
        let k_dot_grad: f64 = k.iter().zip(&grad).map(|(w, g)| w * g).sum();
        gap = (grad[forward] - k_dot_grad).max(0.0);
        if gap <= tol {
            let result = finish(outcomes, k, iterations, gap)?;
            return Ok(result);
        }

        let away = argmin_support(&grad, &k);
        let away_gain = (k_dot_grad - grad[away]).max(0.0);

        // Direction d = sign * (e_vertex - K); per-outcome slope coefficient
        // b_o = sign * (R_{o,vertex} - dots_o).
        let (vertex, sign, gamma_max) = if gap >= away_gain {
            (forward, 1.0, 1.0)
        } else {
            let kv = k[away];
            (away, -1.0, kv / (1.0 - kv))
        };
        // Slope and curvature of the 1-D restriction along the step, fused
        // into one pass over the outcomes (the 1/n factor cancels at the
        // root so it is left out).
        let slope = |gamma: f64| -> (f64, f64) {
            let acc = exec::indexed_sum_vec(count, 2, |o, acc| {
                let b = sign * (outcomes.total_returns(o)[vertex] - dots[o]);
                let t = b / (dots[o] + gamma * b);
                let p = outcomes.probability(o);
                acc[0] += p * t;
                acc[1] -= p * t * t;
            });
            (acc[0], acc[1])
        };
        let gamma = line_search(&slope, gamma_max);
        if gamma == 0.0 {
            // Numerical floor: the certified gap disagrees with the line
            // search at working precision. Give up honestly after a retry.
            stalls += 1;
            if stalls >= 2 {
                break;
            }
            iterations += 1;
            continue;
        }
        stalls = 0;

        if sign > 0.0 {
            if gamma == 1.0 {
                // Snap exactly onto the forward vertex.
                k.iter_mut().for_each(|w| *w = 0.0);
                k[vertex] = 1.0;
            } else {
                for w in k.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                k[vertex] += gamma;
            }
        } else {
            let drop_step = gamma >= gamma_max;
            for w in k.iter_mut() {
                *w *= 1.0 + gamma;
            }
            k[vertex] -= gamma;
            if drop_step || k[vertex] < 0.0 {
                k[vertex] = 0.0;
            }
        }
        let sum: f64 = k.iter().sum();
        if sum != 1.0 {
            for w in k.iter_mut() {
                *w /= sum;
            }
        }
        iterations += 1;
    }

    let best = finish(outcomes, k, iterations, gap)?;
    Err(Error::Unconverged {
        iterations,
        gap,
        best: Box::new(best),
    })
}

fn finish(
    outcomes: &CompoundOutcomeSet,
    mut k: Vec<f64>,
    iterations: usize,
    gap: f64,
) -> Result<OptimizationResult> {
    let sum: f64 = k.iter().sum();
    if sum != 1.0 {
        for w in k.iter_mut() {
            *w /= sum;
        }
    }
    let weights = WeightVector::new(k)?;
    let value = super::elg_exact_on(outcomes, &weights);
    Ok(OptimizationResult {
        weights,
        value,
        iterations,
        gradient_gap: gap,
        horizon: outcomes.horizon(),
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn argmin_support(values: &[f64], k: &[f64]) -> usize {
    let mut best = None;
    for (i, &v) in values.iter().enumerate() {
        if k[i] > 0.0 && best.is_none_or(|b: usize| v < values[b]) {
            best = Some(i);
        }
    }
    best.expect("simplex iterate has nonempty support")
}

/// Maximizes the concave 1-D restriction given `slope(gamma)` returning the
/// first and second derivatives of the restriction at `gamma`.
///
/// `slope(0) > 0` is expected (ascent direction). Returns `gamma_max` when
/// the slope is still nonnegative there — that is what lands vertex optima
/// exactly — otherwise the interior root of the strictly decreasing slope,
/// by Newton steps safeguarded with a bisection bracket.
fn line_search(slope: &dyn Fn(f64) -> (f64, f64), gamma_max: f64) -> f64 {
    let (d0, dd0) = slope(0.0);
    if d0 <= 0.0 {
        return 0.0;
    }
    let (d_max, _) = slope(gamma_max);
    if d_max >= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0f64, gamma_max);
    let mut gamma = if dd0 < 0.0 { -d0 / dd0 } else { 0.5 * gamma_max };
    for _ in 0..128 {
        if !(gamma > lo && gamma < hi) {
            gamma = 0.5 * (lo + hi);
            // Bracket exhausted at working precision.
            if gamma <= lo || gamma >= hi {
                break;
            }
        }
        let (d, dd) = slope(gamma);
        if d == 0.0 {
            return gamma;
        }
        if d > 0.0 {
            lo = gamma;
        } else {
            hi = gamma;
        }
        gamma = if dd < 0.0 {
            gamma - d / dd
        } else {
            0.5 * (lo + hi)
        };
    }
    0.5 * (lo + hi)
}
