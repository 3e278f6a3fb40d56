//! Expression-level drivers: compile an expression for every problem size in
//! the configured range, fan the trial budget out across the sizes, and merge
//! the per-size reports.

use super::checks::{
    check_condition1_part1, check_condition1_part2, check_condition2, check_monotonicity,
};
use super::{CheckConfig, PropertyReport};
use crate::algebra::{compile, CompileError, CompiledProcedure, ProcedureExpr};
use crate::procedure::BuiltinError;

fn merge(property: &str, reports: Vec<PropertyReport>) -> PropertyReport {
    let trials = reports.iter().map(|r| r.trials_run).sum();
    let violations = reports.into_iter().flat_map(|r| r.violations).collect();
    PropertyReport::finish(property, trials, violations)
}

/// Compiles the expression for every m in the range, skipping sizes the
/// expression cannot be instantiated at (a fixed top-k parameter larger than
/// m). Errors other than k-out-of-range are reported; so is an empty result.
fn compile_over_range(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
) -> Result<Vec<CompiledProcedure>, CompileError> {
    let mut compiled = Vec::new();
    let mut last_skip = None;
    for m in cfg.m_range.0..=cfg.m_range.1 {
        match compile(expr, alpha_binding, m) {
            Ok(c) => compiled.push(c),
            Err(CompileError::Builtin(BuiltinError::KOutOfRange { k, m })) => {
                last_skip = Some(CompileError::Builtin(BuiltinError::KOutOfRange { k, m }));
            }
            Err(e) => return Err(e),
        }
    }
    if compiled.is_empty() {
        return Err(last_skip.expect("either a compilation or a skip happened"));
    }
    Ok(compiled)
}

fn per_m_config(cfg: &CheckConfig, n: usize, m: usize) -> CheckConfig {
    CheckConfig {
        trials: cfg.trials.div_ceil(n),
        // A distinct stream family per size keeps the draws independent.
        seed: cfg.seed.wrapping_add(m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..*cfg
    }
}

fn run_over_range(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
    property: &str,
    check: fn(&CompiledProcedure, &CheckConfig) -> PropertyReport,
) -> Result<PropertyReport, CompileError> {
    let compiled = compile_over_range(expr, alpha_binding, cfg)?;
    let n = compiled.len();
    let reports = compiled
        .iter()
        .map(|c| check(c, &per_m_config(cfg, n, c.m())))
        .collect();
    Ok(merge(property, reports))
}

/// Monotonicity check across the configured m range.
pub fn check_monotonicity_expr(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
) -> Result<PropertyReport, CompileError> {
    run_over_range(expr, alpha_binding, cfg, "monotonicity", check_monotonicity)
}

/// Invariance check across the configured m range.
pub fn check_condition1_part1_expr(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
) -> Result<PropertyReport, CompileError> {
    run_over_range(
        expr,
        alpha_binding,
        cfg,
        "condition 1 part 1",
        check_condition1_part1,
    )
}

/// Local-constancy check across the configured m range.
pub fn check_condition1_part2_expr(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
) -> Result<PropertyReport, CompileError> {
    run_over_range(
        expr,
        alpha_binding,
        cfg,
        "condition 1 part 2",
        check_condition1_part2,
    )
}

/// Threshold-regularity grid check across the configured m range. Returns
/// `None` when the expression does not compile to a closed form anywhere in
/// the range (there is no single threshold to check).
pub fn check_condition2_expr(
    expr: &ProcedureExpr,
    alpha_binding: Option<f64>,
    cfg: &CheckConfig,
) -> Result<Option<PropertyReport>, CompileError> {
    let compiled = compile_over_range(expr, alpha_binding, cfg)?;
    if !compiled.iter().all(|c| c.is_closed_form()) {
        return Ok(None);
    }
    let reports = compiled
        .iter()
        .map(|c| {
            let proc = c.closed_form().expect("checked above");
            check_condition2(proc.threshold(), proc.m(), cfg)
        })
        .collect();
    Ok(Some(merge("condition 2", reports)))
}
