//! Step-up and step-down procedures and the catalogue of built-ins.
//!
//! A step-up procedure finds the largest sorted rank j whose p-value lies at
//! or below its critical value and rejects the hypotheses at ranks 1..=j.
//! A step-down procedure finds the smallest rank whose p-value exceeds its
//! critical value and rejects everything at strictly smaller ranks. When no
//! rank satisfies the step-up condition nothing is rejected; when no rank
//! satisfies the step-down condition everything is rejected.
//!
//! Rejection is cut at sorted ranks with a stable tie-break, so for any
//! threshold that is non-decreasing in rank (every catalogue entry and every
//! max/min combination of them) tied p-values always receive identical
//! decisions and the result coincides with the value-cut reading of the
//! rules. The two readings only part ways for thresholds that decrease in
//! rank, where the rank cut is the one the counterexample constructions rely
//! on.

use crate::pvalue::{sort_pvalues, Level, PValueVector};
use crate::rejection::RejectionSet;
use crate::threshold::{LevelSpec, ThresholdFunction};
use serde::Serialize;
use thiserror::Error;

/// Whether rejection proceeds from the most significant p-value up or from
/// the least significant down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProcedureKind {
    StepUp,
    StepDown,
}

/// Transform applied to the input vector before evaluation. `OneMinus`
/// appears only in procedures produced by the complement construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InputTransform {
    Identity,
    OneMinus,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("procedure is defined for m = {expected} hypotheses, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("procedure was compiled at fixed alpha = {frozen}, cannot evaluate at alpha = {got}")]
    AlphaMismatch { frozen: f64, got: f64 },
}

/// Errors raised by the builtin catalogue.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuiltinError {
    #[error("unknown builtin procedure '{0}'")]
    UnknownName(String),
    #[error("topk parameter k = {k} is outside 1..={m}")]
    KOutOfRange { k: usize, m: usize },
    #[error("level {0} is outside [0, 1]")]
    LevelOutOfRange(f64),
    #[error("procedure needs at least one hypothesis, got m = 0")]
    ZeroHypotheses,
    #[error("builtin '{name}' takes a level parameter")]
    ExpectsLevel { name: String },
    #[error("builtin '{name}' takes an integer k parameter")]
    ExpectsK { name: String },
}

/// A stepwise procedure: kind, threshold, input transform, and the number of
/// hypotheses it is defined for. Immutable after construction; evaluation is
/// a pure function of (procedure, p, alpha).
#[derive(Debug, Clone)]
pub struct StepwiseProcedure {
    kind: ProcedureKind,
    threshold: ThresholdFunction,
    input_transform: InputTransform,
    m: usize,
}

impl StepwiseProcedure {
    pub fn new(kind: ProcedureKind, threshold: ThresholdFunction, m: usize) -> Self {
        StepwiseProcedure {
            kind,
            threshold,
            input_transform: InputTransform::Identity,
            m,
        }
    }

    pub(crate) fn with_transform(
        kind: ProcedureKind,
        threshold: ThresholdFunction,
        transform: InputTransform,
        m: usize,
    ) -> Self {
        StepwiseProcedure {
            kind,
            threshold,
            input_transform: transform,
            m,
        }
    }

    pub fn kind(&self) -> ProcedureKind {
        self.kind
    }

    pub fn threshold(&self) -> &ThresholdFunction {
        &self.threshold
    }

    pub fn input_transform(&self) -> InputTransform {
        self.input_transform
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Critical value at the given sorted rank. For `OneMinus` procedures the
    /// rank refers to the transformed vector; the threshold context stays the
    /// original input.
    pub fn threshold_at(&self, rank: usize, alpha: Level, p: &PValueVector) -> f64 {
        self.threshold.evaluate(rank, alpha.value(), p)
    }

    /// Evaluates the procedure on `p` at level `alpha`.
    pub fn evaluate(&self, p: &PValueVector, alpha: Level) -> Result<RejectionSet, EvalError> {
        if p.len() != self.m {
            return Err(EvalError::LengthMismatch {
                expected: self.m,
                got: p.len(),
            });
        }
        Ok(match self.input_transform {
            InputTransform::Identity => eval_ranked(self.kind, &self.threshold, p, p, alpha),
            InputTransform::OneMinus => {
                let transformed = p.one_minus();
                eval_ranked(self.kind, &self.threshold, &transformed, p, alpha)
            }
        })
    }

    /// Smallest nonzero distance between any comparison value and any
    /// critical value, used by the verification harness to keep samples away
    /// from decision boundaries. Exact coincidences are skipped: a
    /// p-dependent threshold equals the p-value that defines it by
    /// construction, and that comparison cannot flip under perturbation.
    pub fn min_boundary_gap(&self, p: &PValueVector, alpha: Level) -> f64 {
        let comparison = match self.input_transform {
            InputTransform::Identity => p.clone(),
            InputTransform::OneMinus => p.one_minus(),
        };
        let mut gap = f64::INFINITY;
        for rank in 1..=self.m {
            let t = self.threshold.evaluate(rank, alpha.value(), p);
            for &v in comparison.values() {
                let d = (v - t).abs();
                if d > 0.0 && d < gap {
                    gap = d;
                }
            }
        }
        gap
    }
}

/// Shared rank-cut evaluation. `comparison` is the vector whose order
/// statistics are compared against the threshold; `context` is the original
/// input handed to p-dependent thresholds.
fn eval_ranked(
    kind: ProcedureKind,
    tau: &ThresholdFunction,
    comparison: &PValueVector,
    context: &PValueVector,
    alpha: Level,
) -> RejectionSet {
    let view = sort_pvalues(comparison);
    let m = comparison.len();
    let cut = match kind {
        ProcedureKind::StepUp => {
            let mut cut = 0;
            for rank in 1..=m {
                if view.value(rank) <= tau.evaluate(rank, alpha.value(), context) {
                    cut = rank;
                }
            }
            cut
        }
        ProcedureKind::StepDown => {
            let mut cut = m;
            for rank in 1..=m {
                if view.value(rank) > tau.evaluate(rank, alpha.value(), context) {
                    cut = rank - 1;
                    break;
                }
            }
            cut
        }
    };
    RejectionSet::from_indices(m, (1..=cut).map(|rank| view.original_index(rank)))
}

/// Step-up evaluation of a bare threshold function.
pub fn eval_step_up(tau: &ThresholdFunction, p: &PValueVector, alpha: Level) -> RejectionSet {
    eval_ranked(ProcedureKind::StepUp, tau, p, p, alpha)
}

/// Step-down evaluation of a bare threshold function.
pub fn eval_step_down(tau: &ThresholdFunction, p: &PValueVector, alpha: Level) -> RejectionSet {
    eval_ranked(ProcedureKind::StepDown, tau, p, p, alpha)
}

/// The builtin catalogue.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSpec {
    Bonferroni(LevelSpec),
    SidakSd(LevelSpec),
    SidakSu(LevelSpec),
    Holm(LevelSpec),
    Hochberg(LevelSpec),
    Bh(LevelSpec),
    BhSd(LevelSpec),
    TopK(usize),
}

impl BuiltinSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinSpec::Bonferroni(_) => "bonferroni",
            BuiltinSpec::SidakSd(_) => "sidak_sd",
            BuiltinSpec::SidakSu(_) => "sidak_su",
            BuiltinSpec::Holm(_) => "holm",
            BuiltinSpec::Hochberg(_) => "hochberg",
            BuiltinSpec::Bh(_) => "bh",
            BuiltinSpec::BhSd(_) => "bh_sd",
            BuiltinSpec::TopK(_) => "topk",
        }
    }

    pub fn level(&self) -> Option<LevelSpec> {
        match self {
            BuiltinSpec::Bonferroni(l)
            | BuiltinSpec::SidakSd(l)
            | BuiltinSpec::SidakSu(l)
            | BuiltinSpec::Holm(l)
            | BuiltinSpec::Hochberg(l)
            | BuiltinSpec::Bh(l)
            | BuiltinSpec::BhSd(l) => Some(*l),
            BuiltinSpec::TopK(_) => None,
        }
    }

    pub fn uses_symbolic_alpha(&self) -> bool {
        self.level().is_some_and(|l| l.is_symbolic())
    }

    /// Instantiates the catalogue entry for m hypotheses.
    pub fn build(&self, m: usize) -> Result<StepwiseProcedure, BuiltinError> {
        if m == 0 {
            return Err(BuiltinError::ZeroHypotheses);
        }
        if let Some(LevelSpec::Literal(a)) = self.level() {
            if !(0.0..=1.0).contains(&a) {
                return Err(BuiltinError::LevelOutOfRange(a));
            }
        }
        let proc = match self {
            BuiltinSpec::Bonferroni(l) => StepwiseProcedure::new(
                ProcedureKind::StepUp,
                ThresholdFunction::bonferroni(*l),
                m,
            ),
            BuiltinSpec::SidakSd(l) => {
                StepwiseProcedure::new(ProcedureKind::StepDown, ThresholdFunction::sidak(*l), m)
            }
            BuiltinSpec::SidakSu(l) => {
                StepwiseProcedure::new(ProcedureKind::StepUp, ThresholdFunction::sidak(*l), m)
            }
            BuiltinSpec::Holm(l) => StepwiseProcedure::new(
                ProcedureKind::StepDown,
                ThresholdFunction::inverse_rank("holm", *l),
                m,
            ),
            BuiltinSpec::Hochberg(l) => StepwiseProcedure::new(
                ProcedureKind::StepUp,
                ThresholdFunction::inverse_rank("hochberg", *l),
                m,
            ),
            BuiltinSpec::Bh(l) => StepwiseProcedure::new(
                ProcedureKind::StepUp,
                ThresholdFunction::linear("bh", *l),
                m,
            ),
            BuiltinSpec::BhSd(l) => StepwiseProcedure::new(
                ProcedureKind::StepDown,
                ThresholdFunction::linear("bh_sd", *l),
                m,
            ),
            BuiltinSpec::TopK(k) => {
                if *k < 1 || *k > m {
                    return Err(BuiltinError::KOutOfRange { k: *k, m });
                }
                StepwiseProcedure::new(
                    ProcedureKind::StepUp,
                    ThresholdFunction::kth_smallest(*k),
                    m,
                )
            }
        };
        Ok(proc)
    }
}

/// Parameter for the stringly-named catalogue lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinParam {
    Level(LevelSpec),
    K(usize),
}

/// Looks up a catalogue entry by (case-insensitive) name and instantiates it.
pub fn builtin(name: &str, param: BuiltinParam, m: usize) -> Result<StepwiseProcedure, BuiltinError> {
    spec_for(name, param)?.build(m)
}

/// Resolves a builtin name and parameter into a `BuiltinSpec`.
pub fn spec_for(name: &str, param: BuiltinParam) -> Result<BuiltinSpec, BuiltinError> {
    let lower = name.to_ascii_lowercase();
    let level = || match param {
        BuiltinParam::Level(l) => Ok(l),
        BuiltinParam::K(_) => Err(BuiltinError::ExpectsLevel {
            name: lower.clone(),
        }),
    };
    match lower.as_str() {
        "bonferroni" => Ok(BuiltinSpec::Bonferroni(level()?)),
        "sidak_sd" => Ok(BuiltinSpec::SidakSd(level()?)),
        "sidak_su" => Ok(BuiltinSpec::SidakSu(level()?)),
        "holm" => Ok(BuiltinSpec::Holm(level()?)),
        "hochberg" => Ok(BuiltinSpec::Hochberg(level()?)),
        "bh" => Ok(BuiltinSpec::Bh(level()?)),
        "bh_sd" => Ok(BuiltinSpec::BhSd(level()?)),
        "topk" => match param {
            BuiltinParam::K(k) => Ok(BuiltinSpec::TopK(k)),
            BuiltinParam::Level(_) => Err(BuiltinError::ExpectsK { name: lower }),
        },
        _ => Err(BuiltinError::UnknownName(name.to_string())),
    }
}

/// Every catalogue entry with a symbolic level, plus top-k; used by the
/// verification suites.
pub fn all_builtins(k: usize) -> Vec<BuiltinSpec> {
    vec![
        BuiltinSpec::Bonferroni(LevelSpec::Symbolic),
        BuiltinSpec::SidakSd(LevelSpec::Symbolic),
        BuiltinSpec::SidakSu(LevelSpec::Symbolic),
        BuiltinSpec::Holm(LevelSpec::Symbolic),
        BuiltinSpec::Hochberg(LevelSpec::Symbolic),
        BuiltinSpec::Bh(LevelSpec::Symbolic),
        BuiltinSpec::BhSd(LevelSpec::Symbolic),
        BuiltinSpec::TopK(k),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(values: &[f64]) -> PValueVector {
        PValueVector::new(values.to_vec()).unwrap()
    }

    fn level(alpha: f64) -> Level {
        Level::new(alpha).unwrap()
    }

    fn eval(spec: BuiltinSpec, values: &[f64], alpha: f64) -> Vec<usize> {
        let p = pv(values);
        spec.build(p.len())
            .unwrap()
            .evaluate(&p, level(alpha))
            .unwrap()
            .to_vec()
    }

    const P_STAR: [f64; 3] = [0.034, 0.06, 1.0];

    #[test]
    fn bh_step_up_rejects_first_two() {
        let got = eval(BuiltinSpec::Bh(LevelSpec::Literal(0.1)), &P_STAR, 0.1);
        assert_eq!(got, vec![1, 2]);
    }

    #[test]
    fn sidak_step_down_rejects_first() {
        let got = eval(BuiltinSpec::SidakSd(LevelSpec::Literal(0.1)), &P_STAR, 0.1);
        assert_eq!(got, vec![1]);
    }

    #[test]
    fn sidak_form_step_up_rejects_first() {
        let got = eval(BuiltinSpec::SidakSu(LevelSpec::Literal(0.1)), &P_STAR, 0.1);
        assert_eq!(got, vec![1]);
    }

    #[test]
    fn bh_form_step_down() {
        let got = eval(BuiltinSpec::BhSd(LevelSpec::Literal(0.1)), &[0.0, 0.06, 1.0], 0.1);
        assert_eq!(got, vec![1, 2]);
        let got = eval(BuiltinSpec::BhSd(LevelSpec::Literal(0.1)), &P_STAR, 0.1);
        assert!(got.is_empty());
    }

    #[test]
    fn step_up_rejects_nothing_when_all_above() {
        // Every critical value below 1, every p-value equal to 1.
        let got = eval(BuiltinSpec::Bh(LevelSpec::Literal(0.2)), &[1.0, 1.0, 1.0], 0.2);
        assert!(got.is_empty());
    }

    #[test]
    fn step_down_rejects_all_when_none_above() {
        let tau = ThresholdFunction::from_table("t", vec![0.9, 0.9]);
        let got = eval_step_down(&tau, &pv(&[0.1, 0.2]), level(0.5));
        assert_eq!(got.to_vec(), vec![1, 2]);
    }

    #[test]
    fn symbolic_level_binds_at_eval() {
        let spec = BuiltinSpec::Bh(LevelSpec::Symbolic);
        let p = pv(&P_STAR);
        let proc = spec.build(3).unwrap();
        assert_eq!(proc.evaluate(&p, level(0.1)).unwrap().to_vec(), vec![1, 2]);
        assert!(proc.evaluate(&p, level(0.01)).unwrap().is_empty());
    }

    #[test]
    fn topk_selects_smallest() {
        let got = eval(BuiltinSpec::TopK(2), &[0.9, 0.1, 0.4, 0.2], 0.5);
        assert_eq!(got, vec![2, 4]);
    }

    #[test]
    fn topk_ties_reject_more() {
        // With ties at the k-th smallest value the whole tie group is kept.
        let got = eval(BuiltinSpec::TopK(1), &[0.3, 0.3, 0.8], 0.5);
        assert_eq!(got, vec![1, 2]);
    }

    #[test]
    fn catalogue_errors() {
        assert!(matches!(
            builtin("nope", BuiltinParam::Level(LevelSpec::Symbolic), 3),
            Err(BuiltinError::UnknownName(_))
        ));
        assert!(matches!(
            builtin("topk", BuiltinParam::K(4), 3),
            Err(BuiltinError::KOutOfRange { k: 4, m: 3 })
        ));
        assert!(matches!(
            builtin("bh", BuiltinParam::Level(LevelSpec::Literal(1.5)), 3),
            Err(BuiltinError::LevelOutOfRange(_))
        ));
        assert!(builtin("BH", BuiltinParam::Level(LevelSpec::Literal(0.05)), 3).is_ok());
    }

    #[test]
    fn length_mismatch_is_reported() {
        let proc = BuiltinSpec::Bh(LevelSpec::Symbolic).build(3).unwrap();
        let err = proc.evaluate(&pv(&[0.1, 0.2]), level(0.1)).unwrap_err();
        assert_eq!(err, EvalError::LengthMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn rank_cut_on_decreasing_threshold() {
        // The decreasing table cuts through the tie group: the hypothesis at
        // sorted rank 1 is rejected alone.
        let tau = ThresholdFunction::from_table("decreasing", vec![1.0, 0.0]);
        let got = eval_step_up(&tau, &pv(&[0.5, 0.5]), level(0.5));
        assert_eq!(got.to_vec(), vec![1]);
        let got = eval_step_up(&tau, &pv(&[1.0, 0.5]), level(0.5));
        assert_eq!(got.to_vec(), vec![2]);
    }
}
