//! Threshold functions: the critical-value maps that fully characterize a
//! stepwise procedure.
//!
//! A threshold function takes a sorted rank i in 1..=m and a significance
//! level and returns the critical value the i-th smallest p-value is compared
//! to. Thresholds may additionally depend on the input p-values themselves
//! (the top-k selection rule is the catalogue example); such thresholds
//! receive the original, untransformed vector as context.

use crate::pvalue::PValueVector;
use std::fmt;
use std::sync::Arc;

/// A significance-level parameter: either a fixed numeric level or the
/// symbolic `alpha` bound at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSpec {
    Literal(f64),
    Symbolic,
}

impl LevelSpec {
    pub fn resolve(self, runtime_alpha: f64) -> f64 {
        match self {
            LevelSpec::Literal(a) => a,
            LevelSpec::Symbolic => runtime_alpha,
        }
    }

    pub fn is_symbolic(self) -> bool {
        matches!(self, LevelSpec::Symbolic)
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSpec::Literal(a) => write!(f, "{a}"),
            LevelSpec::Symbolic => write!(f, "alpha"),
        }
    }
}

type CustomFn = dyn Fn(usize, f64, &PValueVector) -> f64 + Send + Sync;

#[derive(Clone)]
enum Form {
    /// alpha / m, constant in rank.
    Bonferroni(LevelSpec),
    /// 1 - (1 - alpha)^(1 / (m - i + 1)).
    Sidak(LevelSpec),
    /// alpha / (m - i + 1); shared by the Holm and Hochberg procedures.
    InverseRank(LevelSpec),
    /// alpha * i / m; the Benjamini-Hochberg critical line.
    Linear(LevelSpec),
    /// p_(k), the k-th smallest input p-value; constant in rank and alpha.
    KthSmallest(usize),
    /// Explicit per-rank critical values (rank i maps to entry i - 1).
    Table(Arc<[f64]>),
    /// Pointwise maximum of two thresholds.
    Max(Arc<ThresholdFunction>, Arc<ThresholdFunction>),
    /// Pointwise minimum of two thresholds.
    Min(Arc<ThresholdFunction>, Arc<ThresholdFunction>),
    /// 1 - inner(m + 1 - i) with the level frozen to a constant; produced by
    /// the complement construction.
    Reflected {
        inner: Arc<ThresholdFunction>,
        frozen_alpha: f64,
    },
    /// Arbitrary rule; used for counterexample seeds in the verification
    /// harness.
    Custom(Arc<CustomFn>),
}

/// A threshold function tau_alpha(i) with values in [0, 1].
#[derive(Clone)]
pub struct ThresholdFunction {
    name: String,
    depends_on_p: bool,
    depends_on_alpha: bool,
    form: Form,
}

impl ThresholdFunction {
    pub fn bonferroni(level: LevelSpec) -> Self {
        ThresholdFunction {
            name: format!("bonferroni({level})"),
            depends_on_p: false,
            depends_on_alpha: level.is_symbolic(),
            form: Form::Bonferroni(level),
        }
    }

    pub fn sidak(level: LevelSpec) -> Self {
        ThresholdFunction {
            name: format!("sidak({level})"),
            depends_on_p: false,
            depends_on_alpha: level.is_symbolic(),
            form: Form::Sidak(level),
        }
    }

    pub fn inverse_rank(name: &str, level: LevelSpec) -> Self {
        ThresholdFunction {
            name: format!("{name}({level})"),
            depends_on_p: false,
            depends_on_alpha: level.is_symbolic(),
            form: Form::InverseRank(level),
        }
    }

    pub fn linear(name: &str, level: LevelSpec) -> Self {
        ThresholdFunction {
            name: format!("{name}({level})"),
            depends_on_p: false,
            depends_on_alpha: level.is_symbolic(),
            form: Form::Linear(level),
        }
    }

    pub fn kth_smallest(k: usize) -> Self {
        ThresholdFunction {
            name: format!("topk({k})"),
            depends_on_p: true,
            depends_on_alpha: false,
            form: Form::KthSmallest(k),
        }
    }

    /// Explicit per-rank critical values. The table must cover every rank the
    /// threshold is evaluated at, and every entry must lie in [0, 1].
    pub fn from_table(name: impl Into<String>, values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| (0.0..=1.0).contains(v)),
            "table entries must lie in [0, 1]"
        );
        ThresholdFunction {
            name: name.into(),
            depends_on_p: false,
            depends_on_alpha: false,
            form: Form::Table(values.into()),
        }
    }

    pub fn from_fn<F>(name: impl Into<String>, depends_on_p: bool, depends_on_alpha: bool, f: F) -> Self
    where
        F: Fn(usize, f64, &PValueVector) -> f64 + Send + Sync + 'static,
    {
        ThresholdFunction {
            name: name.into(),
            depends_on_p,
            depends_on_alpha,
            form: Form::Custom(Arc::new(f)),
        }
    }

    pub fn pointwise_max(a: ThresholdFunction, b: ThresholdFunction) -> Self {
        ThresholdFunction {
            name: format!("max({}, {})", a.name, b.name),
            depends_on_p: a.depends_on_p || b.depends_on_p,
            depends_on_alpha: a.depends_on_alpha || b.depends_on_alpha,
            form: Form::Max(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pointwise_min(a: ThresholdFunction, b: ThresholdFunction) -> Self {
        ThresholdFunction {
            name: format!("min({}, {})", a.name, b.name),
            depends_on_p: a.depends_on_p || b.depends_on_p,
            depends_on_alpha: a.depends_on_alpha || b.depends_on_alpha,
            form: Form::Min(Arc::new(a), Arc::new(b)),
        }
    }

    /// The reversed, reflected threshold 1 - inner(m + 1 - i), with the inner
    /// level frozen at `frozen_alpha`. The result no longer depends on the
    /// runtime level.
    pub fn reflected(inner: ThresholdFunction, frozen_alpha: f64) -> Self {
        ThresholdFunction {
            name: format!("complement({}, {frozen_alpha})", inner.name),
            depends_on_p: inner.depends_on_p,
            depends_on_alpha: false,
            form: Form::Reflected {
                inner: Arc::new(inner),
                frozen_alpha,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depends_on_p(&self) -> bool {
        self.depends_on_p
    }

    pub fn depends_on_alpha(&self) -> bool {
        self.depends_on_alpha
    }

    /// Critical value for the given 1-based rank. `p` is the original input
    /// vector; it supplies m and the context for p-dependent thresholds.
    pub fn evaluate(&self, rank: usize, alpha: f64, p: &PValueVector) -> f64 {
        let m = p.len();
        debug_assert!(rank >= 1 && rank <= m, "rank {rank} outside 1..={m}");
        let mf = m as f64;
        match &self.form {
            Form::Bonferroni(level) => level.resolve(alpha) / mf,
            Form::Sidak(level) => {
                let a = level.resolve(alpha);
                1.0 - (1.0 - a).powf(1.0 / (mf - rank as f64 + 1.0))
            }
            Form::InverseRank(level) => level.resolve(alpha) / (mf - rank as f64 + 1.0),
            Form::Linear(level) => level.resolve(alpha) * rank as f64 / mf,
            Form::KthSmallest(k) => {
                let mut values = p.values().to_vec();
                let (_, kth, _) = values.select_nth_unstable_by(*k - 1, |a, b| a.total_cmp(b));
                *kth
            }
            Form::Table(values) => values[rank - 1],
            Form::Max(a, b) => a.evaluate(rank, alpha, p).max(b.evaluate(rank, alpha, p)),
            Form::Min(a, b) => a.evaluate(rank, alpha, p).min(b.evaluate(rank, alpha, p)),
            Form::Reflected { inner, frozen_alpha } => {
                1.0 - inner.evaluate(m + 1 - rank, *frozen_alpha, p)
            }
            Form::Custom(f) => f(rank, alpha, p),
        }
    }
}

impl fmt::Debug for ThresholdFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThresholdFunction")
            .field("name", &self.name)
            .field("depends_on_p", &self.depends_on_p)
            .field("depends_on_alpha", &self.depends_on_alpha)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy(m: usize) -> PValueVector {
        PValueVector::new((1..=m).map(|i| i as f64 / (m as f64 + 1.0)).collect()).unwrap()
    }

    #[test]
    fn holm_thresholds_m4() {
        // Direct evaluation of alpha / (m - i + 1) at alpha = 0.05, m = 4.
        let tau = ThresholdFunction::inverse_rank("holm", LevelSpec::Literal(0.05));
        let p = dummy(4);
        let got: Vec<f64> = (1..=4).map(|i| tau.evaluate(i, 0.0, &p)).collect();
        let want = [0.0125, 0.05 / 3.0, 0.025, 0.05];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-15, "{g} vs {w}");
        }
    }

    #[test]
    fn sidak_endpoints() {
        let tau = ThresholdFunction::sidak(LevelSpec::Symbolic);
        let p = dummy(3);
        assert_eq!(tau.evaluate(1, 0.0, &p), 0.0);
        assert_eq!(tau.evaluate(1, 1.0, &p), 1.0);
        let t1 = tau.evaluate(1, 0.1, &p);
        assert!((t1 - (1.0 - 0.9f64.powf(1.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn kth_smallest_reads_context() {
        let tau = ThresholdFunction::kth_smallest(3);
        let p = PValueVector::new(vec![0.9, 0.1, 0.4, 0.2]).unwrap();
        for rank in 1..=4 {
            assert_eq!(tau.evaluate(rank, 0.5, &p), 0.4);
        }
        assert!(tau.depends_on_p());
        assert!(!tau.depends_on_alpha());
    }

    #[test]
    fn reflected_reverses_and_flips() {
        // complement of bonferroni(0.05) at m = 3: constant 1 - 0.05/3.
        let tau = ThresholdFunction::reflected(
            ThresholdFunction::bonferroni(LevelSpec::Literal(0.05)),
            0.05,
        );
        let p = dummy(3);
        for rank in 1..=3 {
            let got = tau.evaluate(rank, 0.9, &p); // runtime alpha ignored
            assert!((got - (1.0 - 0.05 / 3.0)).abs() < 1e-15);
        }
        assert!(!tau.depends_on_alpha());
    }

    #[test]
    fn max_min_compose() {
        let a = ThresholdFunction::bonferroni(LevelSpec::Literal(0.2));
        let b = ThresholdFunction::inverse_rank("hochberg", LevelSpec::Literal(0.1));
        let tau = ThresholdFunction::pointwise_max(a.clone(), b.clone());
        let p = dummy(5);
        // bonferroni: 0.04 constant; hochberg: 0.1/(5-i+1).
        let want = [0.04, 0.04, 0.04, 0.05, 0.1];
        for (i, w) in want.iter().enumerate() {
            assert!((tau.evaluate(i + 1, 0.0, &p) - w).abs() < 1e-15);
        }
        let tau_min = ThresholdFunction::pointwise_min(a, b);
        let want_min = [0.02, 0.025, 0.1 / 3.0, 0.04, 0.04];
        for (i, w) in want_min.iter().enumerate() {
            assert!((tau_min.evaluate(i + 1, 0.0, &p) - w).abs() < 1e-15);
        }
    }
}
