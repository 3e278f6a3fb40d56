//! Step-up/step-down multiple testing procedures as composable threshold
//! functions.
//!
//! The crate provides:
//!
//! - the core evaluators and a catalogue of built-in procedures
//!   (Bonferroni, Šidák, Holm, Hochberg, Benjamini-Hochberg, top-k),
//! - an algebra that combines procedures with union, intersection,
//!   difference, and complement, compiling to a single stepwise procedure
//!   with an explicit threshold wherever such a closed form exists and to an
//!   output-level evaluation tree otherwise,
//! - a small expression language for writing compositions as text,
//! - randomized checkers for monotonicity and well-behavedness together with
//!   brute-force oracles that validate the closed forms.

pub mod algebra;
pub mod dsl;
pub mod procedure;
pub mod pvalue;
pub mod rejection;
pub mod threshold;
pub mod verify;

pub use algebra::{compile, eval_compiled, Claim, CompiledProcedure, ProcedureExpr, Strategy};
pub use procedure::{
    builtin, eval_step_down, eval_step_up, BuiltinParam, BuiltinSpec, InputTransform,
    ProcedureKind, StepwiseProcedure,
};
pub use pvalue::{sort_pvalues, Level, PValueVector, SortedView};
pub use rejection::RejectionSet;
pub use threshold::{LevelSpec, ThresholdFunction};
pub use verify::{CheckConfig, PropertyReport, Witness};
