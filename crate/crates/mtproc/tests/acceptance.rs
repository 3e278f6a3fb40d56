//! Acceptance suite. One test per criterion; each prints its verdict line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use mtproc::dsl;
use mtproc::procedure::all_builtins;
use mtproc::verify::{
    check_condition1_part1_expr, check_condition1_part2_expr, check_condition2,
    check_condition1_part1, check_monotonicity, check_monotonicity_expr, oracle_equivalence,
    decreasing_rank_witness, CheckConfig,
};
use mtproc::{
    compile, eval_compiled, BuiltinSpec, Claim, CompiledProcedure, Level, LevelSpec,
    PValueVector, ProcedureExpr, ThresholdFunction,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

fn pv(values: &[f64]) -> PValueVector {
    PValueVector::new(values.to_vec()).unwrap()
}

fn level(alpha: f64) -> Level {
    Level::new(alpha).unwrap()
}

fn builtin(spec: BuiltinSpec) -> ProcedureExpr {
    ProcedureExpr::Builtin(spec)
}

fn eval_expr(expr: &ProcedureExpr, values: &[f64], alpha: f64) -> Vec<usize> {
    let p = pv(values);
    let compiled = compile(expr, Some(alpha), p.len()).unwrap();
    eval_compiled(&compiled, &p, level(alpha)).unwrap().to_vec()
}

fn pass(n: usize, name: &str) {
    println!("acceptance criterion {n} ({name}): PASS");
}

const P_STAR: [f64; 3] = [0.034, 0.06, 1.0];

const P_TILDE: [f64; 15] = [
    0.0001, 0.0004, 0.0019, 0.0095, 0.0201, 0.0278, 0.0298, 0.0344, 0.0459, 0.3240, 0.4262,
    0.5719, 0.6528, 0.7590, 1.000,
];

#[test]
fn criterion_1_mixed_intersection_example() {
    let bh = builtin(BuiltinSpec::Bh(LevelSpec::Literal(0.1)));
    let sidak_sd = builtin(BuiltinSpec::SidakSd(LevelSpec::Literal(0.1)));
    assert_eq!(eval_expr(&bh, &P_STAR, 0.1), vec![1, 2]);
    assert_eq!(eval_expr(&sidak_sd, &P_STAR, 0.1), vec![1]);

    let intersection = ProcedureExpr::intersect(bh, sidak_sd);
    let compiled = compile(&intersection, None, 3).unwrap();
    assert!(!compiled.is_closed_form(), "mixed kinds stay output-level");
    assert_eq!(eval_expr(&intersection, &P_STAR, 0.1), vec![1]);
    assert_eq!(eval_expr(&intersection, &[0.034, 1.0, 1.0], 0.1), Vec::<usize>::new());
    pass(1, "mixed intersection example");
}

#[test]
fn criterion_2_mixed_union_example() {
    let sidak_su = builtin(BuiltinSpec::SidakSu(LevelSpec::Literal(0.1)));
    let bh_sd = builtin(BuiltinSpec::BhSd(LevelSpec::Literal(0.1)));
    assert_eq!(eval_expr(&sidak_su, &P_STAR, 0.1), vec![1]);
    assert_eq!(eval_expr(&bh_sd, &P_STAR, 0.1), Vec::<usize>::new());

    let union = ProcedureExpr::union(sidak_su, bh_sd);
    assert_eq!(eval_expr(&union, &P_STAR, 0.1), vec![1]);
    assert_eq!(eval_expr(&union, &[0.0, 0.06, 1.0], 0.1), vec![1, 2]);
    pass(2, "mixed union example");
}

#[test]
fn criterion_3_worked_example() {
    let bh = builtin(BuiltinSpec::Bh(LevelSpec::Literal(0.05)));
    assert_eq!(eval_expr(&bh, &P_TILDE, 0.05), vec![1, 2, 3, 4]);

    let intersection = ProcedureExpr::intersect(bh, builtin(BuiltinSpec::TopK(3)));
    let compiled = compile(&intersection, None, 15).unwrap();
    assert!(compiled.is_closed_form(), "same-kind intersection fuses");
    assert_eq!(eval_expr(&intersection, &P_TILDE, 0.05), vec![1, 2, 3]);
    pass(3, "worked fdr-with-selection example");
}

#[test]
fn criterion_4_decreasing_threshold_witness() {
    let witness = decreasing_rank_witness();
    assert_eq!(
        witness.evaluate(&pv(&[0.5, 0.5]), level(0.1)).unwrap().to_vec(),
        vec![1]
    );
    assert_eq!(
        witness.evaluate(&pv(&[1.0, 0.5]), level(0.1)).unwrap().to_vec(),
        vec![2]
    );
    let h = CompiledProcedure::from_procedure(witness, Claim::NotGuaranteed, Claim::NotGuaranteed);
    let report = check_monotonicity(&h, &CheckConfig::default());
    assert!(!report.passed, "the checker must flag the witness");
    pass(4, "decreasing-threshold witness");
}

#[test]
fn criterion_5_oracle_equivalence() {
    let step_up: Vec<BuiltinSpec> = vec![
        BuiltinSpec::Bonferroni(LevelSpec::Symbolic),
        BuiltinSpec::SidakSu(LevelSpec::Symbolic),
        BuiltinSpec::Hochberg(LevelSpec::Symbolic),
        BuiltinSpec::Bh(LevelSpec::Symbolic),
        BuiltinSpec::TopK(3),
    ];
    let step_down: Vec<BuiltinSpec> = vec![
        BuiltinSpec::SidakSd(LevelSpec::Symbolic),
        BuiltinSpec::Holm(LevelSpec::Symbolic),
        BuiltinSpec::BhSd(LevelSpec::Symbolic),
    ];
    let cfg = CheckConfig::with_trials(500);

    let mut union_trials = 0;
    let mut intersect_trials = 0;
    for family in [&step_up, &step_down] {
        for i in 0..family.len() {
            for j in i..family.len() {
                let a = builtin(family[i].clone());
                let b = builtin(family[j].clone());
                let union = oracle_equivalence(&ProcedureExpr::union(a.clone(), b.clone()), &cfg)
                    .expect("same-kind unions compile to closed form");
                assert!(
                    union.passed,
                    "union {} ∪ {}: {:?}",
                    family[i].name(),
                    family[j].name(),
                    union.first_witness()
                );
                union_trials += union.trials_run;
                let inter = oracle_equivalence(&ProcedureExpr::intersect(a, b), &cfg)
                    .expect("same-kind intersections compile to closed form");
                assert!(
                    inter.passed,
                    "intersect {} ∩ {}: {:?}",
                    family[i].name(),
                    family[j].name(),
                    inter.first_witness()
                );
                intersect_trials += inter.trials_run;
            }
        }
    }
    assert!(union_trials >= 10_000, "only {union_trials} union trials");
    assert!(intersect_trials >= 10_000, "only {intersect_trials} intersection trials");

    // Complements at fixed levels, boundary-free sampling. The top-k rule is
    // left out: its threshold equals p_(k) identically, so every input sits
    // on the decision boundary and the off-boundary equivalence claim is
    // empty for it.
    let with_level: Vec<fn(LevelSpec) -> BuiltinSpec> = vec![
        BuiltinSpec::Bonferroni,
        BuiltinSpec::SidakSd,
        BuiltinSpec::SidakSu,
        BuiltinSpec::Holm,
        BuiltinSpec::Hochberg,
        BuiltinSpec::Bh,
        BuiltinSpec::BhSd,
    ];
    let mut complement_trials = 0;
    for make in &with_level {
        for alpha0 in [0.05, 0.2, 0.35] {
            let expr = ProcedureExpr::complement(
                builtin(make(LevelSpec::Literal(alpha0))),
                LevelSpec::Literal(alpha0),
            );
            let report = oracle_equivalence(&expr, &cfg).expect("complements compile closed-form");
            assert!(
                report.passed,
                "complement of {:?} at {alpha0}: {:?}",
                make(LevelSpec::Literal(alpha0)).name(),
                report.first_witness()
            );
            complement_trials += report.trials_run;
        }
    }
    assert!(complement_trials >= 10_000, "only {complement_trials} complement trials");
    pass(5, "closed forms match brute-force oracle");
}

/// The procedures whose compiled claims promise both properties.
fn guaranteed_exprs() -> Vec<(String, ProcedureExpr)> {
    let mut exprs: Vec<(String, ProcedureExpr)> = vec![
        BuiltinSpec::Bonferroni(LevelSpec::Symbolic),
        BuiltinSpec::SidakSd(LevelSpec::Symbolic),
        BuiltinSpec::SidakSu(LevelSpec::Symbolic),
        BuiltinSpec::Holm(LevelSpec::Symbolic),
        BuiltinSpec::Hochberg(LevelSpec::Symbolic),
        BuiltinSpec::Bh(LevelSpec::Symbolic),
        BuiltinSpec::BhSd(LevelSpec::Symbolic),
    ]
    .into_iter()
    .map(|spec| (spec.name().to_string(), builtin(spec)))
    .collect();
    exprs.push((
        "union(bh, hochberg)".into(),
        ProcedureExpr::union(
            builtin(BuiltinSpec::Bh(LevelSpec::Symbolic)),
            builtin(BuiltinSpec::Hochberg(LevelSpec::Symbolic)),
        ),
    ));
    exprs.push((
        "intersect(holm, sidak_sd)".into(),
        ProcedureExpr::intersect(
            builtin(BuiltinSpec::Holm(LevelSpec::Symbolic)),
            builtin(BuiltinSpec::SidakSd(LevelSpec::Symbolic)),
        ),
    ));
    exprs.push((
        "union(bonferroni(0.2), hochberg(0.1))".into(),
        ProcedureExpr::union(
            builtin(BuiltinSpec::Bonferroni(LevelSpec::Literal(0.2))),
            builtin(BuiltinSpec::Hochberg(LevelSpec::Literal(0.1))),
        ),
    ));
    exprs.push((
        "intersect(bh, bonferroni)".into(),
        ProcedureExpr::intersect(
            builtin(BuiltinSpec::Bh(LevelSpec::Symbolic)),
            builtin(BuiltinSpec::Bonferroni(LevelSpec::Symbolic)),
        ),
    ));
    exprs
}

#[test]
fn criterion_6_property_suites() {
    let cfg = CheckConfig::default();

    // Definition-1 checks for every procedure whose compiled claim promises
    // monotonicity. The top-k selection rule is the one catalogue entry that
    // is not monotonic (lowering a competitor displaces a selected
    // hypothesis); its claim says so and it is checked negatively elsewhere.
    for (name, expr) in guaranteed_exprs() {
        let compiled = compile(&expr, None, 4).unwrap();
        assert_eq!(compiled.monotonic_claim(), Claim::Guaranteed, "{name}");
        assert_eq!(compiled.well_behaved_claim(), Claim::Guaranteed, "{name}");
        let report = check_monotonicity_expr(&expr, None, &cfg).unwrap();
        assert!(
            report.passed && report.trials_run >= 10_000,
            "monotonicity of {name}: {:?}",
            report.first_witness()
        );
    }

    // Both invariance conditions hold for every builtin, top-k included, and
    // for the guaranteed compositions.
    let mut condition1_targets = guaranteed_exprs();
    condition1_targets.push(("topk(3)".into(), builtin(BuiltinSpec::TopK(3))));
    for (name, expr) in condition1_targets {
        let part1 = check_condition1_part1_expr(&expr, None, &cfg).unwrap();
        assert!(
            part1.passed && part1.trials_run >= 10_000,
            "condition 1 part 1 of {name}: {:?}",
            part1.first_witness()
        );
        let part2 = check_condition1_part2_expr(&expr, None, &cfg).unwrap();
        assert!(
            part2.passed && part2.trials_run >= 10_000,
            "condition 1 part 2 of {name}: {:?}",
            part2.first_witness()
        );
    }

    // Exact grid checks of threshold regularity for all catalogue thresholds
    // and max/min combinations of them.
    let m = 6;
    let mut thresholds: Vec<ThresholdFunction> = all_builtins(3)
        .into_iter()
        .map(|spec| spec.build(m).unwrap().threshold().clone())
        .collect();
    thresholds.push(ThresholdFunction::pointwise_max(
        ThresholdFunction::linear("bh", LevelSpec::Symbolic),
        ThresholdFunction::inverse_rank("hochberg", LevelSpec::Symbolic),
    ));
    thresholds.push(ThresholdFunction::pointwise_min(
        ThresholdFunction::sidak(LevelSpec::Symbolic),
        ThresholdFunction::bonferroni(LevelSpec::Symbolic),
    ));
    thresholds.push(ThresholdFunction::pointwise_max(
        ThresholdFunction::bonferroni(LevelSpec::Literal(0.2)),
        ThresholdFunction::inverse_rank("hochberg", LevelSpec::Literal(0.1)),
    ));
    thresholds.push(ThresholdFunction::pointwise_min(
        ThresholdFunction::kth_smallest(3),
        ThresholdFunction::linear("bh", LevelSpec::Symbolic),
    ));
    for tau in &thresholds {
        let report = check_condition2(tau, m, &cfg);
        assert!(
            report.passed,
            "condition 2 of {}: {:?}",
            tau.name(),
            report.first_witness()
        );
    }
    pass(6, "property suites for builtins and guaranteed compositions");
}

#[test]
fn criterion_7_negative_suites() {
    // The invariance violations at the documented vectors.
    let mixed_intersect = ProcedureExpr::intersect(
        builtin(BuiltinSpec::Bh(LevelSpec::Literal(0.1))),
        builtin(BuiltinSpec::SidakSd(LevelSpec::Literal(0.1))),
    );
    let cfg = CheckConfig::with_trials(1_000);
    let report = check_condition1_part1(&compile(&mixed_intersect, None, 3).unwrap(), &cfg);
    assert!(!report.passed);
    let w = report.first_witness().unwrap();
    assert_eq!(w.p, vec![0.034, 0.06, 1.0]);
    assert_eq!(w.q.as_deref(), Some([0.034, 1.0, 1.0].as_slice()));
    assert_eq!(w.observed, (vec![1], vec![]));

    let mixed_union = ProcedureExpr::union(
        builtin(BuiltinSpec::SidakSu(LevelSpec::Literal(0.1))),
        builtin(BuiltinSpec::BhSd(LevelSpec::Literal(0.1))),
    );
    let report = check_condition1_part1(&compile(&mixed_union, None, 3).unwrap(), &cfg);
    assert!(!report.passed);
    let w = report.first_witness().unwrap();
    assert_eq!(w.p, vec![0.034, 0.06, 1.0]);
    assert_eq!(w.q.as_deref(), Some([0.0, 0.06, 1.0].as_slice()));
    assert_eq!(w.observed, (vec![1], vec![1, 2]));

    // Complements and same-kind differences lose monotonicity; the checker
    // finds witnesses inside a 1000-trial budget at the default seed.
    let complement = ProcedureExpr::complement(
        builtin(BuiltinSpec::Bh(LevelSpec::Literal(0.1))),
        LevelSpec::Literal(0.1),
    );
    let report = check_monotonicity_expr(&complement, None, &cfg).unwrap();
    assert!(!report.passed, "complement evaded {} trials", report.trials_run);

    let difference = ProcedureExpr::diff(
        builtin(BuiltinSpec::Bh(LevelSpec::Literal(0.1))),
        builtin(BuiltinSpec::Bonferroni(LevelSpec::Literal(0.1))),
    );
    let report = check_monotonicity_expr(&difference, Some(0.1), &cfg).unwrap();
    assert!(!report.passed, "difference evaded {} trials", report.trials_run);
    pass(7, "documented violations are found");
}

fn level_strategy() -> impl Strategy<Value = LevelSpec> {
    prop_oneof![
        3 => (0.0..=1.0f64).prop_map(LevelSpec::Literal),
        1 => Just(LevelSpec::Symbolic),
    ]
}

fn builtin_strategy() -> impl Strategy<Value = BuiltinSpec> {
    prop_oneof![
        level_strategy().prop_map(BuiltinSpec::Bonferroni),
        level_strategy().prop_map(BuiltinSpec::SidakSd),
        level_strategy().prop_map(BuiltinSpec::SidakSu),
        level_strategy().prop_map(BuiltinSpec::Holm),
        level_strategy().prop_map(BuiltinSpec::Hochberg),
        level_strategy().prop_map(BuiltinSpec::Bh),
        level_strategy().prop_map(BuiltinSpec::BhSd),
        (1..=20usize).prop_map(BuiltinSpec::TopK),
    ]
}

fn expr_strategy() -> impl Strategy<Value = ProcedureExpr> {
    let leaf = builtin_strategy().prop_map(ProcedureExpr::Builtin);
    leaf.prop_recursive(4, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcedureExpr::union(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcedureExpr::intersect(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcedureExpr::diff(a, b)),
            (inner, level_strategy()).prop_map(|(c, l)| ProcedureExpr::complement(c, l)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn criterion_8_roundtrip(expr in expr_strategy()) {
        let text = dsl::format(&expr);
        let parsed = dsl::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &expr, "round-trip changed the tree for '{}'", text);
        prop_assert_eq!(dsl::format(&parsed), text);
    }
}

#[test]
fn criterion_8_fuzz_never_crashes() {
    let seeds = [
        "intersect(bh(0.05), topk(3))",
        "union(bonferroni(0.2), hochberg(0.1))",
        "complement(diff(bh(alpha), holm(0.3)), alpha)",
        "topk(k=12)",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0_22);
    let start = Instant::now();
    let mut iterations: u64 = 0;
    while start.elapsed() < Duration::from_secs(10) {
        for _ in 0..512 {
            let text: String = match rng.gen_range(0..3u8) {
                0 => {
                    let len = rng.gen_range(0..64);
                    let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
                    String::from_utf8_lossy(&bytes).into_owned()
                }
                1 => {
                    let len = rng.gen_range(0..64);
                    (0..len).map(|_| rng.gen_range(' '..='~')).collect()
                }
                _ => {
                    let mut text = seeds[rng.gen_range(0..seeds.len())].as_bytes().to_vec();
                    for _ in 0..rng.gen_range(1..6) {
                        let at = rng.gen_range(0..text.len());
                        text[at] = rng.gen();
                    }
                    String::from_utf8_lossy(&text).into_owned()
                }
            };
            let outcome = catch_unwind(AssertUnwindSafe(|| dsl::parse(&text)));
            match outcome {
                Ok(Ok(_)) => {}
                Ok(Err(err)) => {
                    assert!(
                        err.span.start <= err.span.end && err.span.end <= text.len(),
                        "span {:?} escapes input {:?}",
                        err.span,
                        text
                    );
                }
                Err(_) => panic!("parser panicked on input {text:?}"),
            }
            iterations += 1;
        }
    }
    assert!(iterations > 50_000, "fuzz loop too slow: {iterations}");
    pass(8, "dsl round-trip and fuzz");
}
