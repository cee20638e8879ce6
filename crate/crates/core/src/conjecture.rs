//! Numerical probing of high-frequency maximality: `g_n* <= g_1*`.
//!
//! For i.i.d. return steps the property is proven (the compound return up to
//! step `n-1` is independent of the step-`n` return), so scans over the
//! models this crate can express are expected to come back consistent; the
//! machinery exists to certify that expectation numerically and to flag any
//! instance where the certified optima say otherwise. A "violation" must
//! clear twice the optimizer tolerance before it counts: each of `g_n*` and
//! `g_1*` carries up to one tolerance of certification error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elg::optimize_on;
use crate::model::{CompoundOutcomeSet, ModelFile, ReturnModel};
use crate::{rng, Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Scan verdict; `ViolationCandidate` means some horizon beat `g_1*` by more
/// than numerical noise and the instance deserves independent rechecking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    ViolationCandidate,
}

/// Per-horizon certified optima of one model and their comparison to the
/// high-frequency baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalityReport {
    pub horizons: Vec<usize>,
    /// Certified `g_n*` per horizon, in nats/step.
    pub g_star: Vec<f64>,
    pub g1_star: f64,
    /// `max_n (g_n* - g_1*)`; nonnegative since `n = 1` is included.
    pub max_violation: f64,
    pub certified_tol: f64,
    pub verdict: Verdict,
}

/// Runs the certified optimizer for each `n = 1 ..= n_max` and compares
/// against `g_1*`.
pub fn maximality_scan(
    model: &ReturnModel,
    n_max: usize,
    tol: f64,
    max_iters: usize,
    budget: u64,
) -> Result<MaximalityReport> {
    if n_max < 1 {
        return Err(Error::HorizonZero);
    }
    // Fail fast on the largest horizon before doing any work.
    let s = model.atom_count() as u128;
    let required = s.checked_pow(n_max as u32).ok_or(Error::BudgetExceeded {
        required: u128::MAX,
        budget,
    })?;
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let mut horizons = Vec::with_capacity(n_max);
    let mut g_star = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let outcomes = CompoundOutcomeSet::enumerate(model, n, budget)?;
        let result = optimize_on(&outcomes, tol, max_iters)
            .map_err(|_| Error::ScanUnconverged { horizon: n })?;
        horizons.push(n);
        g_star.push(result.value);
    }
    let g1_star = g_star[0];
    let max_violation = g_star
        .iter()
        .map(|g| g - g1_star)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_violation > 2.0 * tol {
        Verdict::ViolationCandidate
    } else {
        Verdict::Consistent
    };
    Ok(MaximalityReport {
        horizons,
        g_star,
        g1_star,
        max_violation,
        certified_tol: tol,
        verdict,
    })
}

/// Random-model distribution for the counterexample search: asset and atom
/// counts drawn uniformly from inclusive ranges, atom returns uniform on
/// `[-magnitude, magnitude]`, atom probabilities from the flat simplex
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub m_range: (usize, usize),
    pub s_range: (usize, usize),
    /// Return magnitude bound `b`; must satisfy `0 < b < 1` so every drawn
    /// return stays above -1.
    pub magnitude: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            m_range: (2, 3),
            s_range: (2, 3),
            magnitude: 0.8,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_range.0 < 2 || self.m_range.0 > self.m_range.1 {
            return Err(Error::InvalidGenerator(format!(
                "asset range {:?} must satisfy 2 <= lo <= hi",
                self.m_range
            )));
        }
        if self.s_range.0 < 1 || self.s_range.0 > self.s_range.1 {
            return Err(Error::InvalidGenerator(format!(
                "atom range {:?} must satisfy 1 <= lo <= hi",
                self.s_range
            )));
        }
        if !(self.magnitude > 0.0 && self.magnitude < 1.0) {
            return Err(Error::InvalidGenerator(format!(
                "magnitude {} must lie in (0, 1)",
                self.magnitude
            )));
        }
        Ok(())
    }

    /// Draws one model. Asset names are positional (`a0`, `a1`, ...).
    pub fn sample(&self, rng: &mut impl Rng) -> ReturnModel {
        let m = rng.random_range(self.m_range.0..=self.m_range.1);
        let s = rng.random_range(self.s_range.0..=self.s_range.1);
        let atoms: Vec<Vec<f64>> = (0..s)
            .map(|_| {
                (0..m)
                    .map(|_| rng.random_range(-self.magnitude..=self.magnitude))
                    .collect()
            })
            .collect();
        // Flat simplex draw: normalized unit exponentials.
        let raw: Vec<f64> = (0..s)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let probs = raw.iter().map(|e| e / total).collect();
        let names = (0..m).map(|i| format!("a{i}")).collect();
        ReturnModel::new(names, atoms, probs, None)
            .expect("generator draws respect the model invariants")
    }
}

/// One searched instance: the drawn model and its scan report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub model: ReturnModel,
    pub report: MaximalityReport,
}

/// Provenance attached to serialized violation candidates so an instance can
/// be regenerated and rechecked independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub trial_index: u64,
    pub tool_version: String,
}

/// Violation-candidate document: the model in the standard model-file layout
/// plus a provenance block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateFile {
    #[serde(flatten)]
    pub model: ModelFile,
    pub provenance: Provenance,
}

impl TrialOutcome {
    /// Serializable candidate document for this trial.
    pub fn candidate_file(&self, master_seed: u64) -> CandidateFile {
        CandidateFile {
            model: self.model.clone().into(),
            provenance: Provenance {
                seed: master_seed,
                trial_index: self.trial_index,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }
}

/// Scans `trials` randomly drawn models and ranks them by `max_violation`
/// descending (ties keep trial order).
///
/// Trial `t` draws its model from ChaCha8 stream `t` under `seed`, so the
/// search is deterministic, and trials can run in parallel without changing
/// the ranked output.
pub fn counterexample_search(
    spec: &GeneratorSpec,
    trials: u64,
    n_max: usize,
    seed: u64,
    tol: f64,
    max_iters: usize,
    budget: u64,
) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    if n_max < 1 {
        return Err(Error::HorizonZero);
    }
    let worst_case = (spec.s_range.1 as u128)
        .checked_pow(n_max as u32)
        .ok_or(Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
    if worst_case > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: worst_case,
            budget,
        });
    }

    let run_trial = |t: u64| -> Result<TrialOutcome> {
        let mut stream = rng::stream_rng(seed, t);
        let model = spec.sample(&mut stream);
        let report = maximality_scan(&model, n_max, tol, max_iters, budget)?;
        Ok(TrialOutcome {
            trial_index: t,
            model,
            report,
        })
    };

    #[cfg(feature = "parallel")]
    let mut outcomes = (0..trials)
        .into_par_iter()
        .map(run_trial)
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let mut outcomes = (0..trials).map(run_trial).collect::<Result<Vec<_>>>()?;

    outcomes.sort_by(|a, b| {
        b.report
            .max_violation
            .partial_cmp(&a.report.max_violation)
            .expect("violations are finite")
    });
    Ok(outcomes)
}
