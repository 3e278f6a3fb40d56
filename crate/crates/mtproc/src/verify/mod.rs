//! Randomized and exact property checkers: monotonicity, the invariance and
//! local-constancy conditions of well-behaved procedures, threshold
//! regularity, brute-force oracle comparisons, and the fixed-vector
//! regression cases.
//!
//! All checks are deterministic: every random draw derives from the
//! configured seed, with an independent stream per trial.

mod checks;
mod drivers;
mod oracle;
mod regression;

pub use checks::{
    check_condition1_part1, check_condition1_part2, check_condition2, check_monotonicity,
};
pub use drivers::{
    check_condition1_part1_expr, check_condition1_part2_expr, check_condition2_expr,
    check_monotonicity_expr,
};
pub use oracle::{oracle_equivalence, output_level_eval, OracleError};
pub use regression::{
    decreasing_alpha_witness, decreasing_rank_witness, paper_regression_suite,
};

use crate::pvalue::PValueVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Configuration for the randomized checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Number of randomized trials per check.
    pub trials: usize,
    /// Seed for all sampling; identical configs yield identical reports.
    pub seed: u64,
    /// Inclusive range of problem sizes sampled where the procedure under
    /// test does not fix m.
    pub m_range: (usize, usize),
    /// Perturbation radius for the local-constancy check.
    pub delta: f64,
    /// Samples closer than this to a decision boundary are rediscarded; must
    /// exceed `delta`.
    pub boundary_margin: f64,
    /// Grid spacing over [0, 1] for the exact threshold checks.
    pub alpha_grid_step: f64,
    /// Probe size for the numeric continuity check; the allowed increment is
    /// 100 times the step.
    pub continuity_step: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 10_000,
            seed: 42,
            m_range: (1, 8),
            delta: 1e-7,
            boundary_margin: 1e-4,
            alpha_grid_step: 0.02,
            continuity_step: 1e-6,
        }
    }
}

impl CheckConfig {
    /// A smaller budget for quick runs.
    pub fn with_trials(trials: usize) -> Self {
        CheckConfig {
            trials,
            ..CheckConfig::default()
        }
    }

    /// Tolerance for the numeric continuity probe.
    pub fn continuity_tolerance(&self) -> f64 {
        self.continuity_step * 100.0
    }

    pub(crate) fn assert_valid(&self) {
        assert!(self.delta > 0.0, "delta must be positive");
        assert!(
            self.boundary_margin > self.delta,
            "boundary_margin must exceed delta"
        );
        assert!(self.alpha_grid_step > 0.0 && self.continuity_step > 0.0);
        assert!(self.m_range.0 >= 1 && self.m_range.0 <= self.m_range.1);
    }

    /// Independent generator for one trial.
    pub(crate) fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

/// A concrete input demonstrating a property violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub p: Vec<f64>,
    pub q: Option<Vec<f64>>,
    pub alpha: f64,
    pub alpha_prime: Option<f64>,
    /// The two rejection sets whose relation violates the property (their
    /// reading depends on the check, e.g. h(p, alpha) vs h(q, alpha')).
    pub observed: (Vec<usize>, Vec<usize>),
    pub detail: String,
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub trials_run: usize,
    pub violations: Vec<Witness>,
    pub passed: bool,
}

impl PropertyReport {
    pub(crate) fn finish(property: impl Into<String>, trials_run: usize, violations: Vec<Witness>) -> Self {
        let passed = violations.is_empty();
        PropertyReport {
            property: property.into(),
            trials_run,
            violations,
            passed,
        }
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.violations.first()
    }
}

pub(crate) fn sample_p(rng: &mut ChaCha8Rng, m: usize) -> PValueVector {
    PValueVector::new((0..m).map(|_| rng.gen::<f64>()).collect()).expect("uniform draws are valid")
}

/// Levels are sampled away from the extremes so every rejection-count regime
/// gets exercised.
pub(crate) fn sample_alpha(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.01..=0.5)
}

pub(crate) fn sample_m(rng: &mut ChaCha8Rng, range: (usize, usize)) -> usize {
    rng.gen_range(range.0..=range.1)
}
