//! Evaluation reports: the JSON schema and the human-readable table.

use mtproc::{Claim, CompiledProcedure, InputTransform, Level, PValueVector, RejectionSet};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub expression: String,
    pub canonical: String,
    pub alpha: Option<f64>,
    pub m: usize,
    pub strategy: &'static str,
    pub monotonic: &'static str,
    pub well_behaved: &'static str,
    pub rejected: Vec<usize>,
    pub ranks: Vec<RankRow>,
}

#[derive(Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub pvalue: f64,
    pub index: usize,
    pub threshold: Option<f64>,
    pub rejected: bool,
}

pub fn claim_str(claim: Claim) -> &'static str {
    match claim {
        Claim::Guaranteed => "guaranteed",
        Claim::NotGuaranteed => "not-guaranteed",
    }
}

pub fn strategy_str(compiled: &CompiledProcedure) -> &'static str {
    if compiled.is_closed_form() {
        "closed-form"
    } else {
        "output-level"
    }
}

pub fn build(
    expression: &str,
    canonical: String,
    compiled: &CompiledProcedure,
    p: &PValueVector,
    alpha_report: Option<f64>,
    alpha_eval: Level,
    rejected: &RejectionSet,
) -> EvalReport {
    let view = mtproc::sort_pvalues(p);
    // A per-rank critical value exists only for closed forms acting directly
    // on p; the complement construction compares transformed values and
    // output-level trees have no single threshold.
    let identity_closed_form = compiled
        .closed_form()
        .filter(|proc| proc.input_transform() == InputTransform::Identity);
    let ranks = (1..=p.len())
        .map(|rank| {
            let index = view.original_index(rank);
            RankRow {
                rank,
                pvalue: view.value(rank),
                index,
                threshold: identity_closed_form.map(|proc| proc.threshold_at(rank, alpha_eval, p)),
                rejected: rejected.contains(index),
            }
        })
        .collect();
    EvalReport {
        schema_version: SCHEMA_VERSION,
        expression: expression.to_string(),
        canonical,
        alpha: alpha_report,
        m: p.len(),
        strategy: strategy_str(compiled),
        monotonic: claim_str(compiled.monotonic_claim()),
        well_behaved: claim_str(compiled.well_behaved_claim()),
        rejected: rejected.to_vec(),
        ranks,
    }
}

/// Six significant digits, the precision thresholds are reported at.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("expression:   {}\n", report.expression));
    if report.canonical != report.expression {
        out.push_str(&format!("canonical:    {}\n", report.canonical));
    }
    match report.alpha {
        Some(a) => out.push_str(&format!("alpha:        {a}\n")),
        None => out.push_str("alpha:        (not used)\n"),
    }
    out.push_str(&format!("m:            {}\n", report.m));
    out.push_str(&format!("strategy:     {}\n", report.strategy));
    out.push_str(&format!(
        "claims:       monotonic={}, well-behaved={}\n",
        report.monotonic, report.well_behaved
    ));
    let rejected = report
        .rejected
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    out.push_str(&format!(
        "rejected ({}): {}\n\n",
        report.rejected.len(),
        if rejected.is_empty() { "-" } else { &rejected }
    ));
    out.push_str("rank  p-value  index  threshold  rejected\n");
    for row in &report.ranks {
        out.push_str(&format!(
            "{:>4}  {:<7} {:>6}  {:<9}  {}\n",
            row.rank,
            row.pvalue,
            row.index,
            row.threshold.map(sig6).unwrap_or_else(|| "-".to_string()),
            if row.rejected { "yes" } else { "no" }
        ));
    }
    out
}
