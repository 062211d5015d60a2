//! Invariants checked over generated corpora and random programs.

use std::collections::BTreeSet;

use proptest::prelude::*;

use mol_core::analysis::{
    abstraction_count, fixpoint_analyze, oracle_classify, solve, solve_in_order, summarize_program, AnalysisOptions,
    NullabilityClass,
};
use mol_core::checker::{check_program, CheckMode};
use mol_core::corpus::{generate_corpus, ClassMix, Corpus, CorpusSpec};
use mol_core::dynamic::{
    aggregate_traces, profile_from_csv, profile_to_csv, read_traces, write_trace, Outcome, RunOptions, Tracer,
};
use mol_core::ir::{parse_program, parse_syntax, print_program, validate_program, ProgramIndex};

fn corpus(seed: u64, methods: usize, loop_density: f64) -> Corpus {
    generate_corpus(&CorpusSpec {
        method_count: methods,
        seed,
        loop_density,
        drivers: 3,
        ..CorpusSpec::default()
    })
    .unwrap()
}

fn mix() -> impl Strategy<Value = ClassMix> {
    prop::array::uniform5(0.0f64..1.0).prop_filter_map("all zero", |w| {
        let sum: f64 = w.iter().sum();
        (sum > 0.01).then(|| ClassMix {
            definite: w[0] / sum,
            possible: w[1] / sum,
            not_required: w[2] / sum,
            forwarding: w[3] / sum,
            recursive: 1.0 - (w[0] + w[1] + w[2] + w[3]) / sum,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let c = corpus(seed, 40, 0.2);
        let reparsed = parse_program(&c.text).unwrap();
        prop_assert_eq!(&reparsed, &c.program);
        prop_assert_eq!(print_program(&reparsed), c.text);
    }

    #[test]
    fn static_analysis_recovers_ground_truth(
        seed in any::<u64>(),
        mix in mix(),
        loop_density in 0.0f64..0.5,
        max_ref_params in 1usize..=7,
    ) {
        let spec = CorpusSpec {
            method_count: 60,
            max_ref_params,
            class_mix: mix,
            loop_density,
            seed,
            drivers: 2,
            ..CorpusSpec::default()
        };
        let c = generate_corpus(&spec).unwrap();
        let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
        prop_assert!(r.path_budget_exceeded.is_empty());
        prop_assert_eq!(r.classes, c.truth.expected_class);
    }

    #[test]
    fn oracle_agrees_with_fixpoint(seed in any::<u64>()) {
        let c = corpus(seed, 30, 0.3);
        let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
        for ((key, i), class) in &r.classes {
            prop_assert_eq!(oracle_classify(&c.program, key, *i, 1).unwrap(), *class, "{} #{}", key, i);
        }
    }

    #[test]
    fn fixpoint_is_order_independent_and_ascends(seed in any::<u64>(), shuffle in any::<u64>()) {
        let c = corpus(seed, 50, 0.1);
        let idx = ProgramIndex::new(&c.program);
        let transfers = summarize_program(&idx, AnalysisOptions::default()).unwrap();
        let reference = solve(&transfers);
        let n = abstraction_count(&transfers);
        let mut order: Vec<usize> = (0..n).collect();
        let mut state = shuffle;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let mut previous: Option<mol_core::analysis::Env> = None;
        let mut ascending = true;
        let permuted = solve_in_order(&transfers, &order, |env| {
            if let Some(prev) = &previous {
                ascending &= prev.iter().all(|(k, c)| env[k] >= *c);
            }
            previous = Some(env.clone());
        });
        prop_assert!(ascending);
        prop_assert_eq!(permuted.env, reference.env);
        prop_assert!(reference.sweeps <= 2 * reference_entries(&transfers) + 1);
    }

    #[test]
    fn completed_runs_never_pass_null_to_definite(seed in any::<u64>()) {
        let c = corpus(seed, 80, 0.1);
        let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
        let tracer = Tracer::new(&c.program);
        for (i, entry) in c.truth.entries.iter().enumerate() {
            let t = tracer.run(entry, RunOptions::new(seed ^ i as u64)).unwrap();
            if t.outcome != Outcome::Completed {
                continue;
            }
            for rec in &t.records {
                for (k, pos) in rec.abstraction.reference_positions().into_iter().enumerate() {
                    prop_assert!(
                        !(rec.arg_null[k]
                            && r.classes[&(rec.abstraction.clone(), pos)] == NullabilityClass::DefinitelyRequired)
                    );
                }
            }
        }
    }

    #[test]
    fn continuum_is_at_least_as_permissive(seed in any::<u64>(), mix in mix()) {
        let spec = CorpusSpec { method_count: 60, class_mix: mix, seed, drivers: 3, ..CorpusSpec::default() };
        let c = generate_corpus(&spec).unwrap();
        let sites = |mode| -> BTreeSet<(u32, u32)> {
            check_program(&c.program, mode).into_iter().filter(|d| d.is_error()).map(|d| (d.line, d.col)).collect()
        };
        let (cont, conv) = (sites(CheckMode::Continuum), sites(CheckMode::Conventional));
        prop_assert!(cont.is_subset(&conv), "{:?}", cont.difference(&conv).collect::<Vec<_>>());
    }

    #[test]
    fn possibly_unassigned_matches_path_enumeration(body in block(3)) {
        let src = format!("classifier C; method m(req p: C) {{ {} }}", render(&body));
        let program = parse_syntax(&src).unwrap();
        let reported = validate_program(&program)
            .iter()
            .any(|d| d.kind == "unassigned" || d.kind == "unresolved");
        let mut paths_ok = true;
        explore(&body, BTreeSet::new(), &mut |_| {}, &mut paths_ok);
        prop_assert_eq!(reported, !paths_ok, "{}", src);
    }
}

fn reference_entries(transfers: &[mol_core::analysis::MethodTransfer]) -> usize {
    let idx: BTreeSet<_> = transfers
        .iter()
        .flat_map(|t| t.per_param.keys().map(move |i| (t.method.clone(), *i)))
        .collect();
    idx.len()
}

/// Statements over one local `x` for the unassigned-use oracle.
#[derive(Debug, Clone)]
enum S {
    Assign,
    Use,
    Return,
    If(Vec<S>, Vec<S>),
    While(Vec<S>),
}

fn block(depth: u32) -> BoxedStrategy<Vec<S>> {
    let leaf = prop_oneof![Just(S::Assign), Just(S::Use), Just(S::Return)];
    let stmt = if depth == 0 {
        leaf.boxed()
    } else {
        prop_oneof![
            3 => leaf,
            1 => (block(depth - 1), block(depth - 1)).prop_map(|(a, b)| S::If(a, b)),
            1 => block(depth - 1).prop_map(S::While),
        ]
        .boxed()
    };
    prop::collection::vec(stmt, 0..4).boxed()
}

fn render(stmts: &[S]) -> String {
    stmts
        .iter()
        .map(|s| match s {
            S::Assign => "x = new C;".to_string(),
            S::Use => "deref x;".to_string(),
            S::Return => "return;".to_string(),
            S::If(a, b) => format!("if opaque {{ {} }} else {{ {} }}", render(a), render(b)),
            S::While(b) => format!("while opaque {{ {} }}", render(b)),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Walks every path (loops run zero or one time, which suffices for
/// definite assignment) and clears `ok` when `x` is used unassigned. Calls
/// `exit` with the assignment state of each path that falls through.
fn explore(stmts: &[S], assigned: BTreeSet<()>, exit: &mut dyn FnMut(BTreeSet<()>), ok: &mut bool) {
    let Some((first, rest)) = stmts.split_first() else {
        exit(assigned);
        return;
    };
    let mut continue_with = |a: BTreeSet<()>, ok: &mut bool| explore(rest, a, exit, ok);
    match first {
        S::Assign => continue_with(BTreeSet::from([()]), ok),
        S::Use => {
            if assigned.is_empty() {
                *ok = false;
            }
            continue_with(assigned, ok);
        }
        S::Return => {}
        S::If(a, b) => {
            let mut outs = Vec::new();
            explore(a, assigned.clone(), &mut |s| outs.push(s), ok);
            explore(b, assigned, &mut |s| outs.push(s), ok);
            for s in outs {
                continue_with(s, ok);
            }
        }
        S::While(b) => {
            let mut outs = vec![assigned.clone()];
            explore(b, assigned, &mut |s| outs.push(s), ok);
            for s in outs {
                continue_with(s, ok);
            }
        }
    }
}

#[test]
fn traces_and_profiles_round_trip() {
    let c = corpus(11, 120, 0.1);
    let tracer = Tracer::new(&c.program);
    let traces: Vec<_> = c
        .truth
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| tracer.run(e, RunOptions::new(i as u64)).unwrap())
        .collect();
    let text: String = traces.iter().map(write_trace).collect();
    assert_eq!(read_traces(&text).unwrap(), traces);
    let (profile, diags) = aggregate_traces(&traces, &c.program);
    assert!(diags.is_empty());
    // The CSV carries counts and flags, not the implementations seen.
    let summary = |d: &mol_core::dynamic::DynamicProfile| -> Vec<_> {
        d.per_abstraction
            .iter()
            .map(|(k, v)| (k.clone(), v.call_count, v.never_null.clone()))
            .collect()
    };
    assert_eq!(
        summary(&profile_from_csv(&profile_to_csv(&profile)).unwrap()),
        summary(&profile)
    );
}

#[test]
fn identical_seeds_give_identical_traces() {
    let c = corpus(5, 150, 0.1);
    let tracer = Tracer::new(&c.program);
    for entry in &c.truth.entries {
        let a = tracer.run(entry, RunOptions::new(77)).unwrap();
        let b = tracer.run(entry, RunOptions::new(77)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn covering_driver_reaches_every_abstraction() {
    let c = corpus(6, 200, 0.1);
    let t = Tracer::new(&c.program).run("main_cover", RunOptions::new(1)).unwrap();
    assert_eq!(t.outcome, Outcome::Completed);
    let seen: BTreeSet<_> = t.records.iter().map(|r| r.abstraction.clone()).collect();
    let keys: BTreeSet<_> = c.truth.expected_class.keys().map(|(k, _)| k.clone()).collect();
    assert_eq!(seen, keys);
}
