//! Fixed-vector regression cases: the documented example evaluations and the
//! counterexample constructions, each reproduced exactly.

use super::{PropertyReport, Witness};
use crate::algebra::{compile, eval_compiled, ProcedureExpr};
use crate::procedure::{BuiltinSpec, ProcedureKind, StepwiseProcedure};
use crate::pvalue::{Level, PValueVector};
use crate::threshold::{LevelSpec, ThresholdFunction};

/// The classical 15-entry example vector used for the worked intersection.
pub const EXAMPLE_15: [f64; 15] = [
    0.0001, 0.0004, 0.0019, 0.0095, 0.0201, 0.0278, 0.0298, 0.0344, 0.0459, 0.3240, 0.4262,
    0.5719, 0.6528, 0.7590, 1.000,
];

/// Step-up procedure on a rank-decreasing threshold table (m = 2); monotone
/// in neither reading of the rules.
pub fn decreasing_rank_witness() -> StepwiseProcedure {
    StepwiseProcedure::new(
        ProcedureKind::StepUp,
        ThresholdFunction::from_table("decreasing-rank", vec![1.0, 0.0]),
        2,
    )
}

/// Single-hypothesis step-up procedure whose critical value drops as the
/// level grows: rejected at alpha = 0.2, not rejected at alpha = 0.3.
pub fn decreasing_alpha_witness() -> StepwiseProcedure {
    StepwiseProcedure::new(
        ProcedureKind::StepUp,
        ThresholdFunction::from_fn("decreasing-alpha", false, true, |_, alpha, _| {
            if alpha < 0.25 {
                0.5
            } else {
                0.3
            }
        }),
        1,
    )
}

struct Case {
    name: &'static str,
    expr: ProcedureExpr,
    alpha: f64,
    values: Vec<f64>,
    expected: Vec<usize>,
}

fn builtin(spec: BuiltinSpec) -> ProcedureExpr {
    ProcedureExpr::Builtin(spec)
}

fn lit(a: f64) -> LevelSpec {
    LevelSpec::Literal(a)
}

fn cases() -> Vec<Case> {
    let p_star = vec![0.034, 0.06, 1.0];
    let mixed_intersect = ProcedureExpr::intersect(
        builtin(BuiltinSpec::Bh(lit(0.1))),
        builtin(BuiltinSpec::SidakSd(lit(0.1))),
    );
    let mixed_union = ProcedureExpr::union(
        builtin(BuiltinSpec::SidakSu(lit(0.1))),
        builtin(BuiltinSpec::BhSd(lit(0.1))),
    );
    vec![
        Case {
            name: "bh step-up on p*",
            expr: builtin(BuiltinSpec::Bh(lit(0.1))),
            alpha: 0.1,
            values: p_star.clone(),
            expected: vec![1, 2],
        },
        Case {
            name: "sidak step-down on p*",
            expr: builtin(BuiltinSpec::SidakSd(lit(0.1))),
            alpha: 0.1,
            values: p_star.clone(),
            expected: vec![1],
        },
        Case {
            name: "mixed intersection on p*",
            expr: mixed_intersect.clone(),
            alpha: 0.1,
            values: p_star.clone(),
            expected: vec![1],
        },
        Case {
            name: "mixed intersection after raising non-rejected",
            expr: mixed_intersect,
            alpha: 0.1,
            values: vec![0.034, 1.0, 1.0],
            expected: vec![],
        },
        Case {
            name: "sidak-threshold step-up on p*",
            expr: builtin(BuiltinSpec::SidakSu(lit(0.1))),
            alpha: 0.1,
            values: p_star.clone(),
            expected: vec![1],
        },
        Case {
            name: "bh-threshold step-down on p*",
            expr: builtin(BuiltinSpec::BhSd(lit(0.1))),
            alpha: 0.1,
            values: p_star.clone(),
            expected: vec![],
        },
        Case {
            name: "mixed union on p*",
            expr: mixed_union.clone(),
            alpha: 0.1,
            values: p_star,
            expected: vec![1],
        },
        Case {
            name: "mixed union after lowering rejected",
            expr: mixed_union,
            alpha: 0.1,
            values: vec![0.0, 0.06, 1.0],
            expected: vec![1, 2],
        },
        Case {
            name: "bh(0.05) on the 15-entry example",
            expr: builtin(BuiltinSpec::Bh(lit(0.05))),
            alpha: 0.05,
            values: EXAMPLE_15.to_vec(),
            expected: vec![1, 2, 3, 4],
        },
        Case {
            name: "bh(0.05) ∩ topk(3) on the 15-entry example",
            expr: ProcedureExpr::intersect(
                builtin(BuiltinSpec::Bh(lit(0.05))),
                builtin(BuiltinSpec::TopK(3)),
            ),
            alpha: 0.05,
            values: EXAMPLE_15.to_vec(),
            expected: vec![1, 2, 3],
        },
        Case {
            name: "topk(3) on the 15-entry example",
            expr: builtin(BuiltinSpec::TopK(3)),
            alpha: 0.05,
            values: EXAMPLE_15.to_vec(),
            expected: vec![1, 2, 3],
        },
    ]
}

/// Runs every fixed-vector case and returns one report each.
pub fn paper_regression_suite() -> Vec<PropertyReport> {
    let mut reports = Vec::new();
    for case in cases() {
        let p = PValueVector::new(case.values.clone()).expect("case vectors are valid");
        let alpha = Level::new(case.alpha).unwrap();
        let compiled = compile(&case.expr, Some(case.alpha), p.len()).expect("cases compile");
        let got = eval_compiled(&compiled, &p, alpha).expect("cases evaluate");
        let mut violations = Vec::new();
        if got.to_vec() != case.expected {
            violations.push(Witness {
                p: case.values.clone(),
                q: None,
                alpha: case.alpha,
                alpha_prime: None,
                observed: (got.to_vec(), case.expected.clone()),
                detail: "computed rejections differ from the documented set".into(),
            });
        }
        reports.push(PropertyReport::finish(
            format!("regression: {}", case.name),
            1,
            violations,
        ));
    }

    // The rank-cut behaviour of the decreasing-threshold construction.
    let witness = decreasing_rank_witness();
    for (values, expected) in [(vec![0.5, 0.5], vec![1]), (vec![1.0, 0.5], vec![2])] {
        let p = PValueVector::new(values.clone()).unwrap();
        let got = witness.evaluate(&p, Level::new(0.1).unwrap()).unwrap();
        let mut violations = Vec::new();
        if got.to_vec() != expected {
            violations.push(Witness {
                p: values.clone(),
                q: None,
                alpha: 0.1,
                alpha_prime: None,
                observed: (got.to_vec(), expected.clone()),
                detail: "decreasing-threshold step-up differs from the documented cut".into(),
            });
        }
        reports.push(PropertyReport::finish(
            format!("regression: decreasing-rank witness on {values:?}"),
            1,
            violations,
        ));
    }

    // The level-direction witness: rejected at 0.2, kept at 0.3.
    let witness = decreasing_alpha_witness();
    let p = PValueVector::new(vec![0.5]).unwrap();
    let at_02 = witness.evaluate(&p, Level::new(0.2).unwrap()).unwrap();
    let at_03 = witness.evaluate(&p, Level::new(0.3).unwrap()).unwrap();
    let mut violations = Vec::new();
    if at_02.to_vec() != vec![1] || !at_03.is_empty() {
        violations.push(Witness {
            p: vec![0.5],
            q: None,
            alpha: 0.2,
            alpha_prime: Some(0.3),
            observed: (at_02.to_vec(), at_03.to_vec()),
            detail: "decreasing-alpha witness did not flip between the two levels".into(),
        });
    }
    reports.push(PropertyReport::finish(
        "regression: decreasing-alpha witness",
        1,
        violations,
    ));

    reports
}
