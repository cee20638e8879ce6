//! Data model: joint finite-support return distributions, simplex weight
//! vectors, rebalancing frequency, and n-step compound outcome enumeration.

use serde::{Deserialize, Serialize};

use crate::{exec, Error, Result};

/// Construction tolerance for probability and weight normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Post-enumeration tolerance for the outcome probability sum; the float
/// error budget grows with the number of enumerated terms.
pub const ENUMERATION_TOL: f64 = 1e-9;

/// Joint i.i.d. per-step return distribution over `m >= 2` assets with
/// finite support.
///
/// Each atom is a full cross-asset return vector, so arbitrary cross-asset
/// correlation is representable. Per-step net returns must stay above -1
/// (the per-step loss is limited to less than 100%). A riskless asset is an
/// ordinary constant column flagged by `riskless_index`; no operation treats
/// it specially.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct ReturnModel {
    asset_names: Vec<String>,
    /// Row-major `s x m` matrix of per-step net returns.
    atoms: Vec<f64>,
    probabilities: Vec<f64>,
    riskless_index: Option<usize>,
    m: usize,
    s: usize,
}

/// On-disk representation of a model file: JSON with `assets`, `atoms`
/// (row = atom, column = asset), `probs`, and optional `riskless` index.
/// Unknown fields such as a provenance block are preserved on read via
/// serde's default tolerance for extra keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub assets: Vec<String>,
    pub atoms: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riskless: Option<usize>,
}

impl TryFrom<ModelFile> for ReturnModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        ReturnModel::new(file.assets, file.atoms, file.probs, file.riskless)
    }
}

impl From<ReturnModel> for ModelFile {
    fn from(model: ReturnModel) -> Self {
        ModelFile {
            assets: model.asset_names.clone(),
            atoms: (0..model.s)
                .map(|a| model.atom_row(a).to_vec())
                .collect(),
            probs: model.probabilities.clone(),
            riskless: model.riskless_index,
        }
    }
}

impl ReturnModel {
    /// Builds and validates a model. `atoms` is one row per atom, one column
    /// per asset.
    pub fn new(
        asset_names: Vec<String>,
        atoms: Vec<Vec<f64>>,
        probabilities: Vec<f64>,
        riskless_index: Option<usize>,
    ) -> Result<Self> {
        let m = asset_names.len();
        let s = atoms.len();
        let mut flat = Vec::with_capacity(s * m);
        for (a, row) in atoms.iter().enumerate() {
            if row.len() != m {
                return Err(Error::AtomWidth {
                    atom: a,
                    got: row.len(),
                    expected: m,
                });
            }
            flat.extend_from_slice(row);
        }
        let model = ReturnModel {
            asset_names,
            atoms: flat,
            probabilities,
            riskless_index,
            m,
            s,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks every model invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::TooFewAssets { m: self.m });
        }
        if self.s == 0 {
            return Err(Error::NoAtoms);
        }
        if self.probabilities.len() != self.s {
            return Err(Error::ProbabilityCount {
                got: self.probabilities.len(),
                expected: self.s,
            });
        }
        for (a, &p) in self.probabilities.iter().enumerate() {
            if p.is_nan() || p < 0.0 {
                return Err(Error::NegativeProbability { atom: a, value: p });
            }
        }
        let sum = exec::compensated_sum(self.probabilities.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ProbabilitySum {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        for a in 0..self.s {
            for i in 0..self.m {
                let x = self.atom(a, i);
                if !x.is_finite() {
                    return Err(Error::ReturnNotFinite { atom: a, asset: i });
                }
                if x <= -1.0 {
                    return Err(Error::ReturnNotAboveMinusOne {
                        atom: a,
                        asset: i,
                        value: x,
                    });
                }
            }
        }
        if let Some(j) = self.riskless_index {
            if j >= self.m {
                return Err(Error::RisklessIndexOutOfRange { index: j, m: self.m });
            }
            let rate = self.atom(0, j);
            if rate < 0.0 {
                return Err(Error::NegativeRisklessRate { rate });
            }
            for a in 1..self.s {
                if self.atom(a, j) != rate {
                    return Err(Error::RisklessColumnInconsistent {
                        asset: j,
                        atom: a,
                        value: self.atom(a, j),
                        rate,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn asset_count(&self) -> usize {
        self.m
    }

    pub fn atom_count(&self) -> usize {
        self.s
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn riskless_index(&self) -> Option<usize> {
        self.riskless_index
    }

    /// Net return of `asset` under atom `atom`.
    pub fn atom(&self, atom: usize, asset: usize) -> f64 {
        self.atoms[atom * self.m + asset]
    }

    /// Full return vector of one atom.
    pub fn atom_row(&self, atom: usize) -> &[f64] {
        &self.atoms[atom * self.m..(atom + 1) * self.m]
    }

    /// Parses a model file (JSON), rejecting anything that violates the
    /// model invariants. Syntax problems surface as [`Error::Json`],
    /// invariant violations as their own typed errors.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        ReturnModel::try_from(file)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self.clone()))
            .expect("model serialization cannot fail")
    }

    /// Cumulative probabilities for inverse-CDF atom sampling.
    pub(crate) fn cumulative_probabilities(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.s);
        let mut acc = 0.0;
        for &p in &self.probabilities {
            acc += p;
            cum.push(acc);
        }
        // Guard the top so a uniform draw of 1.0-epsilon never falls off.
        if let Some(last) = cum.last_mut() {
            *last = f64::INFINITY;
        }
        cum
    }
}

/// Validates a model, returning the first violated invariant as an error.
pub fn validate_model(model: &ReturnModel) -> Result<()> {
    model.validate()
}

/// Portfolio weights on the unit simplex: componentwise nonnegative,
/// summing to 1. Long-only and fully invested, which rules out bankruptcy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        WeightVector::new(weights)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(k: WeightVector) -> Vec<f64> {
        k.weights
    }
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeWeight { index: i, value: w });
            }
        }
        let sum = exec::compensated_sum(weights.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::WeightSum {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(WeightVector { weights })
    }

    /// Equal weight on every asset.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::WeightLength { got: 0, expected: 1 });
        }
        Ok(WeightVector {
            weights: vec![1.0 / m as f64; m],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Unit weight vector `e_j`: everything on asset `j`.
pub fn unit_weight(m: usize, j: usize) -> Result<WeightVector> {
    if j >= m {
        return Err(Error::AssetIndexOutOfRange { index: j, m });
    }
    let mut weights = vec![0.0; m];
    weights[j] = 1.0;
    Ok(WeightVector { weights })
}

/// Rebalancing schedule: the portfolio is reset every `n` base intervals of
/// `delta_t` seconds, so the rebalancing frequency is `1 / (n * delta_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyConfig {
    delta_t: f64,
    n: usize,
}

impl FrequencyConfig {
    pub fn new(delta_t: f64, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::HorizonZero);
        }
        if !delta_t.is_finite() || delta_t <= 0.0 {
            return Err(Error::NonpositiveDeltaT { value: delta_t });
        }
        Ok(FrequencyConfig { delta_t, n })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn period(&self) -> usize {
        self.n
    }

    /// Rebalancing frequency in 1/seconds.
    pub fn frequency(&self) -> f64 {
        1.0 / (self.n as f64 * self.delta_t)
    }
}

/// Exhaustive enumeration of the `s^n` length-`n` atom sequences of a model:
/// one total-return vector (componentwise product of `1 + X` along the
/// sequence) and one probability (product of atom probabilities) per
/// sequence, in lexicographic atom-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundOutcomeSet {
    horizon: usize,
    m: usize,
    probabilities: Vec<f64>,
    /// Row-major `count x m` total-return matrix; every entry is > 0.
    returns: Vec<f64>,
}

impl CompoundOutcomeSet {
    /// Enumerates all n-step outcomes, failing fast when `s^n` exceeds
    /// `budget` (the caller should fall back to Monte Carlo).
    pub fn enumerate(model: &ReturnModel, n: usize, budget: u64) -> Result<Self> {
        model.validate()?;
        if n < 1 {
            return Err(Error::HorizonZero);
        }
        let s = model.atom_count() as u128;
        let required = s
            .checked_pow(n as u32)
            .ok_or(Error::BudgetExceeded {
                required: u128::MAX,
                budget,
            })?;
        if required > budget as u128 {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let count = required as usize;
        let m = model.asset_count();

        let mut probabilities = Vec::with_capacity(count);
        let mut returns = Vec::with_capacity(count * m);

        // Depth-first over atom sequences, most significant digit first, so
        // outcome index c corresponds to the base-s digits of c.
        let mut prob_stack = vec![1.0; n + 1];
        let mut ret_stack = vec![1.0; (n + 1) * m];
        let mut digits = vec![0usize; n];
        let mut depth = 0usize;
        loop {
            if depth == n {
                probabilities.push(prob_stack[n]);
                returns.extend_from_slice(&ret_stack[n * m..(n + 1) * m]);
                // Backtrack to the deepest digit that can still advance.
                loop {
                    if depth == 0 {
                        debug_assert_eq!(probabilities.len(), count);
                        let set = CompoundOutcomeSet {
                            horizon: n,
                            m,
                            probabilities,
                            returns,
                        };
                        set.check(model)?;
                        return Ok(set);
                    }
                    depth -= 1;
                    if digits[depth] + 1 < model.atom_count() {
                        digits[depth] += 1;
                        break;
                    }
                    digits[depth] = 0;
                }
            }
            let atom = digits[depth];
            prob_stack[depth + 1] = prob_stack[depth] * model.probabilities()[atom];
            for i in 0..m {
                ret_stack[(depth + 1) * m + i] =
                    ret_stack[depth * m + i] * (1.0 + model.atom(atom, i));
            }
            depth += 1;
        }
    }

    fn check(&self, model: &ReturnModel) -> Result<()> {
        let count = self.outcome_count();
        let sum = exec::indexed_sum(count, |o| self.probabilities[o]);
        if (sum - 1.0).abs() > ENUMERATION_TOL {
            return Err(Error::ProbabilitySum {
                sum,
                tol: ENUMERATION_TOL,
            });
        }
        debug_assert!(self.returns.iter().all(|&r| r > 0.0));
        let _ = model;
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn asset_count(&self) -> usize {
        self.m
    }

    pub fn outcome_count(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probabilities[outcome]
    }

    /// Total-return vector (entries `1 + compound return`, all > 0).
    pub fn total_returns(&self, outcome: usize) -> &[f64] {
        &self.returns[outcome * self.m..(outcome + 1) * self.m]
    }

    /// Iterator over `(probability, total-return vector)` pairs in
    /// enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        (0..self.outcome_count()).map(|o| (self.probability(o), self.total_returns(o)))
    }
}

/// Enumerates n-step compound outcomes; see [`CompoundOutcomeSet::enumerate`].
pub fn compound_outcomes(model: &ReturnModel, n: usize, budget: u64) -> Result<CompoundOutcomeSet> {
    CompoundOutcomeSet::enumerate(model, n, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_atom_risky() -> ReturnModel {
        ReturnModel::new(
            vec!["cash".into(), "risky".into()],
            vec![vec![0.0, 0.2], vec![0.0, -0.1]],
            vec![0.5, 0.5],
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn cash_only_model_is_valid() {
        let model = ReturnModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0]],
            vec![1.0],
            Some(0),
        );
        assert!(model.is_ok());
    }

    #[test]
    fn atom_return_at_minus_one_rejected() {
        let err = ReturnModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, -1.0]],
            vec![1.0],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("return not > -1"), "{err}");
    }

    #[test]
    fn probability_sum_off_rejected() {
        let err = ReturnModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.1], vec![0.0, -0.1]],
            vec![0.5, 0.4],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("probability sum 0.9"), "{err}");
    }

    #[test]
    fn negative_probability_rejected() {
        let err = ReturnModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.1], vec![0.0, -0.1]],
            vec![1.2, -0.2],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { atom: 1, .. }));
    }

    #[test]
    fn inconsistent_riskless_column_rejected() {
        let err = ReturnModel::new(
            vec!["cash".into(), "risky".into()],
            vec![vec![0.0, 0.2], vec![0.01, -0.1]],
            vec![0.5, 0.5],
            Some(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::RisklessColumnInconsistent { .. }));
    }

    #[test]
    fn unit_weight_examples() {
        assert_eq!(unit_weight(2, 0).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(unit_weight(3, 2).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert!(unit_weight(2, 5).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.6, 0.5]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn frequency_identity() {
        let cfg = FrequencyConfig::new(0.1, 5).unwrap();
        assert!((cfg.frequency() * cfg.period() as f64 * cfg.delta_t() - 1.0).abs() <= 1e-12);
        assert!(FrequencyConfig::new(0.0, 5).is_err());
        assert!(FrequencyConfig::new(1.0, 0).is_err());
    }

    #[test]
    fn one_step_outcomes_reproduce_atoms_bitwise() {
        let model = two_atom_risky();
        let set = compound_outcomes(&model, 1, 100).unwrap();
        assert_eq!(set.outcome_count(), 2);
        for (a, (p, r)) in set.iter().enumerate() {
            assert_eq!(p.to_bits(), model.probabilities()[a].to_bits());
            for (i, ri) in r.iter().enumerate() {
                assert_eq!(ri.to_bits(), (1.0 + model.atom(a, i)).to_bits());
            }
        }
    }

    #[test]
    fn three_step_enumeration_matches_hand_product() {
        let model = two_atom_risky();
        let set = compound_outcomes(&model, 3, 100).unwrap();
        assert_eq!(set.outcome_count(), 8);
        let sum: f64 = (0..8).map(|o| set.probability(o)).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        // Outcome index is the base-2 digit string of the atom sequence,
        // most significant step first.
        let step = [0.2, -0.1];
        for o in 0..8 {
            let seq = [(o >> 2) & 1, (o >> 1) & 1, o & 1];
            let expect: f64 = seq.iter().map(|&a| 1.0 + step[a]).product();
            assert!((set.total_returns(o)[1] - expect).abs() <= 1e-15);
            assert!((set.probability(o) - 0.125).abs() <= 1e-15);
        }
    }

    #[test]
    fn budget_exceeded_reports_required_count() {
        let names: Vec<String> = (0..2).map(|i| format!("a{i}")).collect();
        let atoms: Vec<Vec<f64>> = (0..10).map(|a| vec![0.0, a as f64 * 0.01]).collect();
        let model = ReturnModel::new(names, atoms, vec![0.1; 10], None).unwrap();
        let err = compound_outcomes(&model, 12, 1_000_000_000).unwrap_err();
        match err {
            Error::BudgetExceeded { required, budget } => {
                assert_eq!(required, 10u128.pow(12));
                assert_eq!(budget, 1_000_000_000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let model = two_atom_risky();
        let a = compound_outcomes(&model, 4, 100).unwrap();
        let b = compound_outcomes(&model, 4, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_file_round_trip() {
        let model = two_atom_risky();
        let text = model.to_json_string();
        let back = ReturnModel::from_json_str(&text).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn model_file_rejects_invalid_contents() {
        let text = r#"{"assets":["a","b"],"atoms":[[0.0,0.2]],"probs":[0.9]}"#;
        assert!(ReturnModel::from_json_str(text).is_err());
    }
}
