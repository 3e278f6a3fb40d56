//! Brute-force output-level evaluation and the closed-form equivalence
//! oracle.
//!
//! The output-level evaluator walks the expression tree and applies set
//! operations directly to the operands' rejection sets, using nothing but
//! the core evaluators. It deliberately shares no code with the compilation
//! path it is used to check.

use super::{sample_alpha, sample_m, CheckConfig, PropertyReport, Witness};
use crate::algebra::{compile, eval_compiled, CompileError, ProcedureExpr};
use crate::procedure::{BuiltinError, EvalError};
use crate::pvalue::{Level, PValueVector};
use crate::rejection::RejectionSet;
use crate::threshold::LevelSpec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("expression does not compile to a closed form")]
    NotClosedForm,
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("could not sample a boundary-free input after {0} attempts")]
    SamplingExhausted(usize),
}

/// Evaluates an expression by recursion over rejection sets: unions,
/// intersections and differences of the children's outputs, and the exact
/// set complement {1..m} \ child for complement nodes (the child evaluated at
/// the node's constant level).
pub fn output_level_eval(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    m: usize,
    p: &PValueVector,
    alpha: Level,
) -> Result<RejectionSet, OracleError> {
    match expr {
        ProcedureExpr::Builtin(spec) => {
            let proc = spec.build(m).map_err(CompileError::Builtin)?;
            Ok(proc.evaluate(p, alpha)?)
        }
        ProcedureExpr::Union(a, b) => Ok(output_level_eval(a, alpha_binding, m, p, alpha)?
            .union(&output_level_eval(b, alpha_binding, m, p, alpha)?)),
        ProcedureExpr::Intersect(a, b) => Ok(output_level_eval(a, alpha_binding, m, p, alpha)?
            .intersect(&output_level_eval(b, alpha_binding, m, p, alpha)?)),
        ProcedureExpr::Diff(a, b) => Ok(output_level_eval(a, alpha_binding, m, p, alpha)?
            .difference(&output_level_eval(b, alpha_binding, m, p, alpha)?)),
        ProcedureExpr::Complement(child, level) => {
            let alpha0 = match level {
                LevelSpec::Literal(a) => *a,
                LevelSpec::Symbolic => alpha_binding.ok_or(CompileError::UnresolvedAlpha)?,
            };
            let inner = output_level_eval(
                child,
                alpha_binding,
                m,
                p,
                Level::new(alpha0).map_err(|_| CompileError::ComplementLevelOutOfRange(alpha0))?,
            )?;
            Ok(inner.complement())
        }
    }
}

/// Compares the compiled closed form against independent output-level
/// evaluation on randomized inputs. Expressions containing a complement are
/// sampled away from exact threshold equality, where the reflected
/// construction is allowed to differ from the set complement.
pub fn oracle_equivalence(expr: &ProcedureExpr, cfg: &CheckConfig) -> Result<PropertyReport, OracleError> {
    cfg.assert_valid();
    const MAX_ATTEMPTS: usize = 1_000;
    let needs_margin = expr.has_complement_or_diff();
    let mut violations = Vec::new();
    let mut trials_run = 0;

    for trial in 0..cfg.trials {
        let mut rng = cfg.trial_rng(trial as u64);
        // Resample m on k-out-of-range so fixed top-k expressions work with
        // small problem sizes in the range.
        let mut compiled = None;
        let mut alpha0 = 0.0;
        let mut m = 0;
        for _ in 0..MAX_ATTEMPTS {
            m = sample_m(&mut rng, cfg.m_range);
            alpha0 = sample_alpha(&mut rng);
            match compile(expr, Some(alpha0), m) {
                Ok(c) => {
                    compiled = Some(c);
                    break;
                }
                Err(CompileError::Builtin(BuiltinError::KOutOfRange { .. })) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        let Some(compiled) = compiled else {
            return Err(OracleError::SamplingExhausted(MAX_ATTEMPTS));
        };
        if !compiled.is_closed_form() {
            return Err(OracleError::NotClosedForm);
        }
        let alpha = Level::new(compiled.frozen_alpha().unwrap_or(alpha0)).unwrap();

        let mut sampled = None;
        for _ in 0..MAX_ATTEMPTS {
            let p = super::sample_p(&mut rng, m);
            if !needs_margin || compiled.min_boundary_gap(&p, alpha) > cfg.boundary_margin {
                sampled = Some(p);
                break;
            }
        }
        let Some(p) = sampled else {
            return Err(OracleError::SamplingExhausted(MAX_ATTEMPTS));
        };

        let closed = eval_compiled(&compiled, &p, alpha)?;
        let brute = output_level_eval(expr, Some(alpha.value()), m, &p, alpha)?;
        trials_run += 1;
        if closed != brute {
            violations.push(Witness {
                p: p.values().to_vec(),
                q: None,
                alpha: alpha.value(),
                alpha_prime: None,
                observed: (closed.to_vec(), brute.to_vec()),
                detail: "closed form disagrees with output-level evaluation".into(),
            });
        }
    }
    Ok(PropertyReport::finish(
        "oracle equivalence",
        trials_run,
        violations,
    ))
}
