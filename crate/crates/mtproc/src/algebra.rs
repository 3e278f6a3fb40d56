//! Set operations over stepwise procedures.
//!
//! Unions and intersections of two procedures of the same kind acting on the
//! same input scale fuse into a single procedure whose threshold is the
//! pointwise max (union) or min (intersection) of the operands' thresholds.
//! The complement of a procedure at a fixed level compiles to a procedure of
//! the opposite kind with the reversed, reflected threshold applied to 1 - p.
//! Everything else is evaluated at output level, applying the set operation
//! to the operands' rejection sets.
//!
//! Compilation also tracks what can still be promised about the result:
//! unions and intersections preserve monotonicity, mixed-kind combinations
//! lose the invariance property of well-behaved procedures, and complements
//! and differences lose monotonicity outright. The claims are metadata, not
//! enforcement: a `NotGuaranteed` procedure still evaluates.

use crate::procedure::{
    BuiltinError, BuiltinSpec, EvalError, InputTransform, ProcedureKind, StepwiseProcedure,
};
use crate::pvalue::{Level, PValueVector};
use crate::rejection::RejectionSet;
use crate::threshold::{LevelSpec, ThresholdFunction};
use thiserror::Error;

/// Expression tree over the builtin catalogue.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcedureExpr {
    Builtin(BuiltinSpec),
    Union(Box<ProcedureExpr>, Box<ProcedureExpr>),
    Intersect(Box<ProcedureExpr>, Box<ProcedureExpr>),
    Diff(Box<ProcedureExpr>, Box<ProcedureExpr>),
    /// The level is resolved to a concrete constant at compile time.
    Complement(Box<ProcedureExpr>, LevelSpec),
}

impl ProcedureExpr {
    pub fn builtin(spec: BuiltinSpec) -> Self {
        ProcedureExpr::Builtin(spec)
    }

    pub fn union(a: ProcedureExpr, b: ProcedureExpr) -> Self {
        ProcedureExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn intersect(a: ProcedureExpr, b: ProcedureExpr) -> Self {
        ProcedureExpr::Intersect(Box::new(a), Box::new(b))
    }

    pub fn diff(a: ProcedureExpr, b: ProcedureExpr) -> Self {
        ProcedureExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn complement(child: ProcedureExpr, level: LevelSpec) -> Self {
        ProcedureExpr::Complement(Box::new(child), level)
    }

    /// True when any leaf or complement level uses the symbolic `alpha`.
    pub fn uses_symbolic_alpha(&self) -> bool {
        match self {
            ProcedureExpr::Builtin(spec) => spec.uses_symbolic_alpha(),
            ProcedureExpr::Union(a, b)
            | ProcedureExpr::Intersect(a, b)
            | ProcedureExpr::Diff(a, b) => a.uses_symbolic_alpha() || b.uses_symbolic_alpha(),
            ProcedureExpr::Complement(child, level) => {
                level.is_symbolic() || child.uses_symbolic_alpha()
            }
        }
    }

    /// True when the tree contains a complement or difference node.
    pub fn has_complement_or_diff(&self) -> bool {
        match self {
            ProcedureExpr::Builtin(_) => false,
            ProcedureExpr::Union(a, b) | ProcedureExpr::Intersect(a, b) => {
                a.has_complement_or_diff() || b.has_complement_or_diff()
            }
            ProcedureExpr::Diff(_, _) | ProcedureExpr::Complement(_, _) => true,
        }
    }
}

/// Whether a property is promised by construction or merely possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Guaranteed,
    NotGuaranteed,
}

impl Claim {
    fn and(self, other: Claim) -> Claim {
        if self == Claim::Guaranteed && other == Claim::Guaranteed {
            Claim::Guaranteed
        } else {
            Claim::NotGuaranteed
        }
    }
}

/// How a compiled procedure evaluates.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// A single stepwise procedure with an explicit threshold function.
    ClosedForm(StepwiseProcedure),
    /// Set union of the children's rejections.
    Union(Box<CompiledProcedure>, Box<CompiledProcedure>),
    /// Set intersection of the children's rejections.
    Intersect(Box<CompiledProcedure>, Box<CompiledProcedure>),
    /// Exact set complement {1..m} \ child.
    Complement(Box<CompiledProcedure>),
}

/// A compiled procedure expression together with its property claims.
#[derive(Debug, Clone)]
pub struct CompiledProcedure {
    m: usize,
    strategy: Strategy,
    monotonic_claim: Claim,
    well_behaved_claim: Claim,
    frozen_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("operands have different kinds (step-up vs step-down)")]
    KindMismatch,
    #[error("operands act on different input transforms")]
    TransformMismatch,
    #[error("operands are defined for different m ({0} vs {1})")]
    MMismatch(usize, usize),
    #[error("complement requires an identity-transform operand")]
    ComplementOfTransformed,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error("the symbolic level 'alpha' must be bound to a constant here")]
    UnresolvedAlpha,
    #[error("conflicting fixed levels in one expression: {0} vs {1}")]
    FrozenAlphaConflict(f64, f64),
    #[error("complement level {0} is outside [0, 1]")]
    ComplementLevelOutOfRange(f64),
}

impl CompiledProcedure {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.strategy, Strategy::ClosedForm(_))
    }

    pub fn closed_form(&self) -> Option<&StepwiseProcedure> {
        match &self.strategy {
            Strategy::ClosedForm(proc) => Some(proc),
            _ => None,
        }
    }

    pub fn monotonic_claim(&self) -> Claim {
        self.monotonic_claim
    }

    pub fn well_behaved_claim(&self) -> Claim {
        self.well_behaved_claim
    }

    /// The constant level captured by complement/difference nodes, if any.
    /// Evaluation at any other level is an error.
    pub fn frozen_alpha(&self) -> Option<f64> {
        self.frozen_alpha
    }

    /// Wraps a bare procedure, e.g. one built from an explicit threshold
    /// table, so the verification harness can run on it.
    pub fn from_procedure(proc: StepwiseProcedure, monotonic: Claim, well_behaved: Claim) -> Self {
        CompiledProcedure {
            m: proc.m(),
            strategy: Strategy::ClosedForm(proc),
            monotonic_claim: monotonic,
            well_behaved_claim: well_behaved,
            frozen_alpha: None,
        }
    }

    /// Smallest nonzero distance between a comparison value and a critical
    /// value across every closed-form procedure in the tree.
    pub fn min_boundary_gap(&self, p: &PValueVector, alpha: Level) -> f64 {
        match &self.strategy {
            Strategy::ClosedForm(proc) => proc.min_boundary_gap(p, alpha),
            Strategy::Union(a, b) | Strategy::Intersect(a, b) => a
                .min_boundary_gap(p, alpha)
                .min(b.min_boundary_gap(p, alpha)),
            Strategy::Complement(child) => child.min_boundary_gap(p, alpha),
        }
    }
}

/// Union of two procedures of the same kind on the same input scale: the
/// pointwise maximum of their thresholds.
pub fn union_same_kind(
    h1: &StepwiseProcedure,
    h2: &StepwiseProcedure,
) -> Result<StepwiseProcedure, AlgebraError> {
    fuse(h1, h2, ThresholdFunction::pointwise_max)
}

/// Intersection of two procedures of the same kind on the same input scale:
/// the pointwise minimum of their thresholds.
pub fn intersect_same_kind(
    h1: &StepwiseProcedure,
    h2: &StepwiseProcedure,
) -> Result<StepwiseProcedure, AlgebraError> {
    fuse(h1, h2, ThresholdFunction::pointwise_min)
}

fn fuse(
    h1: &StepwiseProcedure,
    h2: &StepwiseProcedure,
    combine: fn(ThresholdFunction, ThresholdFunction) -> ThresholdFunction,
) -> Result<StepwiseProcedure, AlgebraError> {
    if h1.kind() != h2.kind() {
        return Err(AlgebraError::KindMismatch);
    }
    if h1.input_transform() != h2.input_transform() {
        return Err(AlgebraError::TransformMismatch);
    }
    if h1.m() != h2.m() {
        return Err(AlgebraError::MMismatch(h1.m(), h2.m()));
    }
    Ok(StepwiseProcedure::with_transform(
        h1.kind(),
        combine(h1.threshold().clone(), h2.threshold().clone()),
        h1.input_transform(),
        h1.m(),
    ))
}

/// Complement at a fixed level: a step-up procedure turns into a step-down
/// procedure with threshold 1 - tau(m + 1 - i) applied to 1 - p, and
/// symmetrically for a step-down input. Away from exact threshold equality
/// its rejections are {1..m} \ h(p, alpha0).
pub fn complement(h: &StepwiseProcedure, alpha0: f64) -> Result<StepwiseProcedure, AlgebraError> {
    if h.input_transform() != InputTransform::Identity {
        return Err(AlgebraError::ComplementOfTransformed);
    }
    let kind = match h.kind() {
        ProcedureKind::StepUp => ProcedureKind::StepDown,
        ProcedureKind::StepDown => ProcedureKind::StepUp,
    };
    Ok(StepwiseProcedure::with_transform(
        kind,
        ThresholdFunction::reflected(h.threshold().clone(), alpha0),
        InputTransform::OneMinus,
        h.m(),
    ))
}

fn merge_frozen(a: Option<f64>, b: Option<f64>) -> Result<Option<f64>, CompileError> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x),
        (Some(x), Some(y)) if x == y => Ok(Some(x)),
        (Some(x), Some(y)) => Err(CompileError::FrozenAlphaConflict(x, y)),
    }
}

/// Compiles an expression for m hypotheses. `alpha_binding` resolves the
/// symbolic `alpha` where a constant is required (complement and difference
/// nodes); symbolic levels elsewhere stay symbolic and bind at evaluation.
pub fn compile(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    m: usize,
) -> Result<CompiledProcedure, CompileError> {
    match expr {
        ProcedureExpr::Builtin(spec) => {
            let proc = spec.build(m)?;
            // The top-k rule depends on the input vector itself: lowering
            // another hypothesis's p-value can displace a previously selected
            // one, so monotonicity is not promised for it.
            let claim = if matches!(spec, BuiltinSpec::TopK(_)) {
                Claim::NotGuaranteed
            } else {
                Claim::Guaranteed
            };
            Ok(CompiledProcedure {
                m,
                strategy: Strategy::ClosedForm(proc),
                monotonic_claim: claim,
                well_behaved_claim: claim,
                frozen_alpha: None,
            })
        }
        ProcedureExpr::Union(a, b) => compile_join(a, b, alpha_binding, m, JoinOp::Union),
        ProcedureExpr::Intersect(a, b) => compile_join(a, b, alpha_binding, m, JoinOp::Intersect),
        ProcedureExpr::Diff(a, b) => {
            // h1 \ h2 = h1 ∩ h2^c, evaluated at output level so the identity
            // holds exactly on every input.
            let alpha0 = alpha_binding.ok_or(CompileError::UnresolvedAlpha)?;
            let ca = compile(a, alpha_binding, m)?;
            let cb = compile(b, alpha_binding, m)?;
            let frozen = merge_frozen(
                merge_frozen(ca.frozen_alpha, cb.frozen_alpha)?,
                Some(alpha0),
            )?;
            let not_b = CompiledProcedure {
                m,
                strategy: Strategy::Complement(Box::new(cb)),
                monotonic_claim: Claim::NotGuaranteed,
                well_behaved_claim: Claim::NotGuaranteed,
                frozen_alpha: frozen,
            };
            Ok(CompiledProcedure {
                m,
                strategy: Strategy::Intersect(Box::new(ca), Box::new(not_b)),
                monotonic_claim: Claim::NotGuaranteed,
                well_behaved_claim: Claim::NotGuaranteed,
                frozen_alpha: frozen,
            })
        }
        ProcedureExpr::Complement(child, level) => {
            let alpha0 = match level {
                LevelSpec::Literal(a) => *a,
                LevelSpec::Symbolic => alpha_binding.ok_or(CompileError::UnresolvedAlpha)?,
            };
            if !(0.0..=1.0).contains(&alpha0) {
                return Err(CompileError::ComplementLevelOutOfRange(alpha0));
            }
            let cc = compile(child, alpha_binding, m)?;
            let frozen = merge_frozen(cc.frozen_alpha, Some(alpha0))?;
            let strategy = match &cc.strategy {
                Strategy::ClosedForm(proc)
                    if proc.input_transform() == InputTransform::Identity =>
                {
                    Strategy::ClosedForm(
                        complement(proc, alpha0).expect("identity transform checked"),
                    )
                }
                _ => Strategy::Complement(Box::new(cc)),
            };
            Ok(CompiledProcedure {
                m,
                strategy,
                monotonic_claim: Claim::NotGuaranteed,
                well_behaved_claim: Claim::NotGuaranteed,
                frozen_alpha: frozen,
            })
        }
    }
}

enum JoinOp {
    Union,
    Intersect,
}

fn compile_join(
    a: &ProcedureExpr,
    b: &ProcedureExpr,
    alpha_binding: Option<f64>,
    m: usize,
    op: JoinOp,
) -> Result<CompiledProcedure, CompileError> {
    let ca = compile(a, alpha_binding, m)?;
    let cb = compile(b, alpha_binding, m)?;
    let frozen = merge_frozen(ca.frozen_alpha, cb.frozen_alpha)?;
    let monotonic = ca.monotonic_claim.and(cb.monotonic_claim);
    let fused = match (&ca.strategy, &cb.strategy) {
        (Strategy::ClosedForm(p1), Strategy::ClosedForm(p2))
            if p1.kind() == p2.kind() && p1.input_transform() == p2.input_transform() =>
        {
            let proc = match op {
                JoinOp::Union => union_same_kind(p1, p2),
                JoinOp::Intersect => intersect_same_kind(p1, p2),
            }
            .expect("kind and transform checked");
            Some(proc)
        }
        _ => None,
    };
    Ok(match fused {
        Some(proc) => CompiledProcedure {
            m,
            strategy: Strategy::ClosedForm(proc),
            monotonic_claim: monotonic,
            well_behaved_claim: ca.well_behaved_claim.and(cb.well_behaved_claim),
            frozen_alpha: frozen,
        },
        None => CompiledProcedure {
            m,
            strategy: match op {
                JoinOp::Union => Strategy::Union(Box::new(ca), Box::new(cb)),
                JoinOp::Intersect => Strategy::Intersect(Box::new(ca), Box::new(cb)),
            },
            // Unions and intersections of monotonic procedures stay monotonic
            // whatever their kinds; the invariance part of well-behavedness
            // does not survive mixing a step-up with a step-down operand.
            monotonic_claim: monotonic,
            well_behaved_claim: Claim::NotGuaranteed,
            frozen_alpha: frozen,
        },
    })
}

/// Evaluates a compiled procedure.
pub fn eval_compiled(
    c: &CompiledProcedure,
    p: &PValueVector,
    alpha: Level,
) -> Result<RejectionSet, EvalError> {
    if p.len() != c.m {
        return Err(EvalError::LengthMismatch {
            expected: c.m,
            got: p.len(),
        });
    }
    if let Some(frozen) = c.frozen_alpha {
        if alpha.value() != frozen {
            return Err(EvalError::AlphaMismatch {
                frozen,
                got: alpha.value(),
            });
        }
    }
    eval_strategy(c, p, alpha)
}

fn eval_strategy(
    c: &CompiledProcedure,
    p: &PValueVector,
    alpha: Level,
) -> Result<RejectionSet, EvalError> {
    match &c.strategy {
        Strategy::ClosedForm(proc) => proc.evaluate(p, alpha),
        Strategy::Union(a, b) => Ok(eval_strategy(a, p, alpha)?.union(&eval_strategy(b, p, alpha)?)),
        Strategy::Intersect(a, b) => {
            Ok(eval_strategy(a, p, alpha)?.intersect(&eval_strategy(b, p, alpha)?))
        }
        Strategy::Complement(child) => Ok(eval_strategy(child, p, alpha)?.complement()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedure::eval_step_up;

    fn pv(values: &[f64]) -> PValueVector {
        PValueVector::new(values.to_vec()).unwrap()
    }

    fn level(alpha: f64) -> Level {
        Level::new(alpha).unwrap()
    }

    fn bh(a: f64) -> ProcedureExpr {
        ProcedureExpr::builtin(BuiltinSpec::Bh(LevelSpec::Literal(a)))
    }

    fn topk(k: usize) -> ProcedureExpr {
        ProcedureExpr::builtin(BuiltinSpec::TopK(k))
    }

    const P_TILDE: [f64; 15] = [
        0.0001, 0.0004, 0.0019, 0.0095, 0.0201, 0.0278, 0.0298, 0.0344, 0.0459, 0.3240, 0.4262,
        0.5719, 0.6528, 0.7590, 1.000,
    ];

    #[test]
    fn worked_example_intersection() {
        let p = pv(&P_TILDE);
        let c = compile(&ProcedureExpr::intersect(bh(0.05), topk(3)), None, 15).unwrap();
        assert!(c.is_closed_form());
        let got = eval_compiled(&c, &p, level(0.05)).unwrap();
        assert_eq!(got.to_vec(), vec![1, 2, 3]);
        // The fused threshold is min(0.05 * i / 15, p_(3)).
        let proc = c.closed_form().unwrap();
        for rank in 1..=15 {
            let want = (0.05 * rank as f64 / 15.0).min(0.0019);
            let got = proc.threshold_at(rank, level(0.05), &p);
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn union_of_same_procedure_is_identity() {
        let p = pv(&[0.01, 0.2, 0.8]);
        let single = compile(&bh(0.1), None, 3).unwrap();
        let doubled = compile(&ProcedureExpr::union(bh(0.1), bh(0.1)), None, 3).unwrap();
        assert_eq!(
            eval_compiled(&single, &p, level(0.1)).unwrap(),
            eval_compiled(&doubled, &p, level(0.1)).unwrap()
        );
    }

    #[test]
    fn mixed_kind_union_stays_output_level() {
        let expr = ProcedureExpr::union(
            bh(0.1),
            ProcedureExpr::builtin(BuiltinSpec::SidakSd(LevelSpec::Literal(0.1))),
        );
        let c = compile(&expr, None, 3).unwrap();
        assert!(!c.is_closed_form());
        assert_eq!(c.monotonic_claim(), Claim::Guaranteed);
        assert_eq!(c.well_behaved_claim(), Claim::NotGuaranteed);
    }

    #[test]
    fn complement_of_closed_form_is_closed_form() {
        let c = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            None,
            3,
        )
        .unwrap();
        assert!(c.is_closed_form());
        assert_eq!(c.frozen_alpha(), Some(0.1));
        assert_eq!(c.monotonic_claim(), Claim::NotGuaranteed);
        let proc = c.closed_form().unwrap();
        assert_eq!(proc.kind(), ProcedureKind::StepDown);
        assert_eq!(proc.input_transform(), InputTransform::OneMinus);
    }

    #[test]
    fn complement_rejections_are_set_complement_off_boundary() {
        let p = pv(&[0.01, 0.5, 0.9]);
        let base = compile(&bh(0.1), None, 3).unwrap();
        let comp = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            None,
            3,
        )
        .unwrap();
        let direct = eval_compiled(&base, &p, level(0.1)).unwrap();
        let complemented = eval_compiled(&comp, &p, level(0.1)).unwrap();
        assert_eq!(complemented, direct.complement());
    }

    #[test]
    fn complement_of_empty_rejects_all() {
        let p = pv(&[0.9, 0.95, 0.99]);
        let comp = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            None,
            3,
        )
        .unwrap();
        let got = eval_compiled(&comp, &p, level(0.1)).unwrap();
        assert_eq!(got, RejectionSet::full(3));
    }

    #[test]
    fn complement_freezes_alpha() {
        let comp = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            None,
            3,
        )
        .unwrap();
        let p = pv(&[0.01, 0.5, 0.9]);
        let err = eval_compiled(&comp, &p, level(0.2)).unwrap_err();
        assert_eq!(
            err,
            EvalError::AlphaMismatch {
                frozen: 0.1,
                got: 0.2
            }
        );
    }

    #[test]
    fn complement_requires_constant() {
        let err = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Symbolic),
            None,
            3,
        )
        .unwrap_err();
        assert_eq!(err, CompileError::UnresolvedAlpha);
        // With a binding the symbolic level resolves.
        let ok = compile(
            &ProcedureExpr::complement(bh(0.1), LevelSpec::Symbolic),
            Some(0.1),
            3,
        )
        .unwrap();
        assert_eq!(ok.frozen_alpha(), Some(0.1));
    }

    #[test]
    fn diff_of_self_is_empty_everywhere() {
        let expr = ProcedureExpr::diff(bh(0.1), bh(0.1));
        let c = compile(&expr, Some(0.1), 3).unwrap();
        assert!(!c.is_closed_form());
        for values in [
            [0.01, 0.02, 0.03],
            [0.0, 0.5, 1.0],
            // Exact threshold equality: p_(1) = 0.1/3 is on the bh line.
            [0.1 / 3.0, 0.5, 0.9],
        ] {
            let got = eval_compiled(&c, &pv(&values), level(0.1)).unwrap();
            assert!(got.is_empty(), "diff(h, h) not empty at {values:?}");
        }
    }

    #[test]
    fn conflicting_frozen_levels_are_rejected() {
        let expr = ProcedureExpr::union(
            ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            ProcedureExpr::complement(bh(0.2), LevelSpec::Literal(0.2)),
        );
        let err = compile(&expr, None, 3).unwrap_err();
        assert_eq!(err, CompileError::FrozenAlphaConflict(0.1, 0.2));
    }

    #[test]
    fn fused_union_matches_step_up_on_max_threshold() {
        // union(bonferroni(0.2), hochberg(0.1)) is a step-up procedure on the
        // pointwise max staircase.
        let expr = ProcedureExpr::union(
            ProcedureExpr::builtin(BuiltinSpec::Bonferroni(LevelSpec::Literal(0.2))),
            ProcedureExpr::builtin(BuiltinSpec::Hochberg(LevelSpec::Literal(0.1))),
        );
        let c = compile(&expr, None, 5).unwrap();
        let proc = c.closed_form().expect("same-kind union fuses");
        assert_eq!(proc.kind(), ProcedureKind::StepUp);
        let p = pv(&[0.03, 0.2, 0.041, 0.8, 0.049]);
        let via_algebra = eval_compiled(&c, &p, level(0.5)).unwrap();
        let tau = ThresholdFunction::pointwise_max(
            ThresholdFunction::bonferroni(LevelSpec::Literal(0.2)),
            ThresholdFunction::inverse_rank("hochberg", LevelSpec::Literal(0.1)),
        );
        assert_eq!(via_algebra, eval_step_up(&tau, &p, level(0.5)));
    }

    #[test]
    fn same_kind_fusion_requires_matching_transform() {
        let su = BuiltinSpec::Bh(LevelSpec::Literal(0.1)).build(3).unwrap();
        let sd = BuiltinSpec::Holm(LevelSpec::Literal(0.1)).build(3).unwrap();
        assert_eq!(union_same_kind(&su, &sd).unwrap_err(), AlgebraError::KindMismatch);
        let reflected = complement(&su, 0.1).unwrap();
        assert_eq!(
            intersect_same_kind(&sd, &reflected).unwrap_err(),
            AlgebraError::TransformMismatch
        );
        assert_eq!(complement(&reflected, 0.1).unwrap_err(), AlgebraError::ComplementOfTransformed);
    }

    #[test]
    fn complement_of_complement_falls_back_to_output_level() {
        let expr = ProcedureExpr::complement(
            ProcedureExpr::complement(bh(0.1), LevelSpec::Literal(0.1)),
            LevelSpec::Literal(0.1),
        );
        let c = compile(&expr, None, 3).unwrap();
        assert!(!c.is_closed_form());
        // Double complement is the original procedure, exactly.
        let base = compile(&bh(0.1), None, 3).unwrap();
        let p = pv(&[0.02, 0.5, 0.9]);
        assert_eq!(
            eval_compiled(&c, &p, level(0.1)).unwrap(),
            eval_compiled(&base, &p, level(0.1)).unwrap()
        );
    }
}
