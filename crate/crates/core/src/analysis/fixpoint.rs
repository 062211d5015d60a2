//! Evaluation of path summaries and the interprocedural fixpoint.

use std::collections::{BTreeMap, BTreeSet};

use super::lattice::NullabilityClass;
use super::summary::{summarize_method, AnalysisOptions, MethodTransfer, ParamSummary, PathEvent};
use crate::diag::Diagnostic;
use crate::ir::{Program, ProgramIndex};
use crate::key::AbstractionKey;

/// Classification of every (abstraction, reference parameter index).
pub type Env = BTreeMap<(AbstractionKey, usize), NullabilityClass>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticResult {
    pub classes: Env,
    /// Number of sweeps, including the final one that changed nothing.
    pub iterations: usize,
    pub path_budget_exceeded: BTreeSet<AbstractionKey>,
    pub options: AnalysisOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PathStatus {
    Ok,
    Maybe,
    Fail,
}

fn lookup(env: &Env, callee: &AbstractionKey, position: usize) -> NullabilityClass {
    *env.get(&(callee.clone(), position))
        .unwrap_or_else(|| panic!("environment has no entry for {callee} parameter {position}"))
}

/// Applies one method's transfer function to a callee environment.
///
/// # Panics
///
/// If `env` lacks an entry for a callee position the summary refers to.
pub fn evaluate_transfer(t: &MethodTransfer, env: &Env) -> BTreeMap<usize, NullabilityClass> {
    use NullabilityClass::*;
    t.per_param
        .iter()
        .map(|(&i, summary)| {
            let class = match summary {
                ParamSummary::Paths(paths) => {
                    let (mut all_fail, mut all_ok) = (true, true);
                    for path in paths {
                        let mut status = PathStatus::Ok;
                        for ev in path {
                            let s = match ev {
                                PathEvent::LocalFail => PathStatus::Fail,
                                PathEvent::CalleeUse { callee, position } => match lookup(env, callee, *position) {
                                    DefinitelyRequired => PathStatus::Fail,
                                    PossiblyRequired => PathStatus::Maybe,
                                    NotLocallyRequired => PathStatus::Ok,
                                },
                            };
                            status = match (status, s) {
                                (PathStatus::Fail, _) | (_, PathStatus::Fail) => PathStatus::Fail,
                                (PathStatus::Maybe, _) | (_, PathStatus::Maybe) => PathStatus::Maybe,
                                _ => PathStatus::Ok,
                            };
                        }
                        all_fail &= status == PathStatus::Fail;
                        all_ok &= status == PathStatus::Ok;
                    }
                    if all_fail {
                        DefinitelyRequired
                    } else if all_ok {
                        NotLocallyRequired
                    } else {
                        PossiblyRequired
                    }
                }
                ParamSummary::Fallback { local, dependencies } => {
                    let deps_required = dependencies
                        .iter()
                        .any(|(callee, pos)| lookup(env, callee, *pos) >= PossiblyRequired);
                    let from_deps = if deps_required {
                        PossiblyRequired
                    } else {
                        NotLocallyRequired
                    };
                    local.join(from_deps)
                }
            };
            (i, class)
        })
        .collect()
}

/// Builds the transfer function of every method, in declaration order.
pub fn summarize_program(
    idx: &ProgramIndex<'_>,
    opts: AnalysisOptions,
) -> Result<Vec<MethodTransfer>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut out = Vec::new();
    for m in &idx.methods {
        match summarize_method(m, idx, opts) {
            Ok(t) => out.push(t),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// The outcome of iterating a set of transfer functions to their least
/// fixpoint.
#[derive(Debug, Clone)]
pub struct Solution {
    pub env: Env,
    pub sweeps: usize,
}

/// Groups transfers by abstraction, keeping first-appearance order.
fn group(transfers: &[MethodTransfer]) -> Vec<(AbstractionKey, Vec<&MethodTransfer>)> {
    let mut groups: Vec<(AbstractionKey, Vec<&MethodTransfer>)> = Vec::new();
    let mut slot: BTreeMap<&AbstractionKey, usize> = BTreeMap::new();
    for t in transfers {
        match slot.get(&t.method) {
            Some(&i) => groups[i].1.push(t),
            None => {
                slot.insert(&t.method, groups.len());
                groups.push((t.method.clone(), vec![t]));
            }
        }
    }
    groups
}

/// Number of abstractions `solve_in_order` expects an ordering over.
pub fn abstraction_count(transfers: &[MethodTransfer]) -> usize {
    group(transfers).len()
}

pub fn solve(transfers: &[MethodTransfer]) -> Solution {
    let order: Vec<usize> = (0..abstraction_count(transfers)).collect();
    solve_in_order(transfers, &order, |_| {})
}

/// Runs the fixpoint, visiting abstractions in `order` within each sweep
/// and calling `on_sweep` with the environment published by every sweep.
///
/// Each sweep evaluates every transfer against a frozen snapshot of the
/// previous environment and joins the results in. An abstraction with
/// several implementations takes the meet of their results, so a class is
/// claimed only when every implementation supports it.
pub fn solve_in_order(transfers: &[MethodTransfer], order: &[usize], mut on_sweep: impl FnMut(&Env)) -> Solution {
    let groups = group(transfers);
    assert_eq!(order.len(), groups.len(), "order must permute the abstractions");
    let mut env: Env = BTreeMap::new();
    for (key, impls) in &groups {
        for t in impls {
            for &i in t.per_param.keys() {
                env.insert((key.clone(), i), NullabilityClass::NotLocallyRequired);
            }
        }
    }
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let snapshot = env.clone();
        let mut changed = false;
        for &g in order {
            let (key, impls) = &groups[g];
            let mut combined: BTreeMap<usize, NullabilityClass> = BTreeMap::new();
            for t in impls {
                for (i, c) in evaluate_transfer(t, &snapshot) {
                    combined.entry(i).and_modify(|prev| *prev = prev.meet(c)).or_insert(c);
                }
            }
            for (i, c) in combined {
                let entry = env.get_mut(&(key.clone(), i)).expect("seeded above");
                let joined = entry.join(c);
                if joined != *entry {
                    *entry = joined;
                    changed = true;
                }
            }
        }
        on_sweep(&env);
        if !changed {
            break;
        }
    }
    Solution { env, sweeps }
}

/// Classifies every reference parameter of every abstraction in `p`.
pub fn fixpoint_analyze(p: &Program, opts: AnalysisOptions) -> Result<StaticResult, Vec<Diagnostic>> {
    let idx = ProgramIndex::new(p);
    let transfers = summarize_program(&idx, opts)?;
    let path_budget_exceeded = transfers
        .iter()
        .filter(|t| t.exceeded_budget())
        .map(|t| t.method.clone())
        .collect();
    let solution = solve(&transfers);
    Ok(StaticResult {
        classes: solution.env,
        iterations: solution.sweeps,
        path_budget_exceeded,
        options: opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::summary::Path;
    use crate::ir::parse_program;
    use NullabilityClass::*;

    fn key(s: &str) -> AbstractionKey {
        s.parse().unwrap()
    }

    fn transfer(paths: &[&[PathEvent]]) -> MethodTransfer {
        MethodTransfer {
            method: key("f(C)"),
            implementation: "f".into(),
            per_param: BTreeMap::from([(
                0,
                ParamSummary::Paths(paths.iter().map(|p| p.iter().cloned().collect::<Path>()).collect()),
            )]),
        }
    }

    fn g0() -> PathEvent {
        PathEvent::CalleeUse {
            callee: key("g(C)"),
            position: 0,
        }
    }

    fn env_with(c: NullabilityClass) -> Env {
        BTreeMap::from([((key("g(C)"), 0), c)])
    }

    #[test]
    fn local_fail_is_definite_under_any_env() {
        let t = transfer(&[&[PathEvent::LocalFail]]);
        for c in NullabilityClass::ALL {
            assert_eq!(evaluate_transfer(&t, &env_with(c))[&0], DefinitelyRequired);
        }
    }

    #[test]
    fn forwarding_takes_the_callee_class() {
        let t = transfer(&[&[g0()]]);
        assert_eq!(
            evaluate_transfer(&t, &env_with(NotLocallyRequired))[&0],
            NotLocallyRequired
        );
        assert_eq!(
            evaluate_transfer(&t, &env_with(DefinitelyRequired))[&0],
            DefinitelyRequired
        );
    }

    #[test]
    fn one_failing_and_one_clean_path_is_possible() {
        // Path status table: {g0} is FAIL when g is definite, {} is OK.
        // Mixed statuses classify as possibly required.
        let t = transfer(&[&[g0()], &[]]);
        let expected = [
            (NotLocallyRequired, NotLocallyRequired),
            (PossiblyRequired, PossiblyRequired),
            (DefinitelyRequired, PossiblyRequired),
        ];
        for (callee, want) in expected {
            assert_eq!(evaluate_transfer(&t, &env_with(callee))[&0], want);
        }
    }

    #[test]
    fn fallback_caps_dependencies_at_possible() {
        let t = MethodTransfer {
            method: key("f(C)"),
            implementation: "f".into(),
            per_param: BTreeMap::from([(
                0,
                ParamSummary::Fallback {
                    local: NotLocallyRequired,
                    dependencies: BTreeSet::from([(key("g(C)"), 0)]),
                },
            )]),
        };
        assert_eq!(
            evaluate_transfer(&t, &env_with(DefinitelyRequired))[&0],
            PossiblyRequired
        );
        assert_eq!(
            evaluate_transfer(&t, &env_with(NotLocallyRequired))[&0],
            NotLocallyRequired
        );
    }

    #[test]
    #[should_panic(expected = "no entry")]
    fn missing_env_entry_is_a_contract_violation() {
        evaluate_transfer(&transfer(&[&[g0()]]), &Env::new());
    }

    #[test]
    fn single_definite_method_takes_two_sweeps() {
        let p = parse_program("classifier C; method pDcase(req p: C) { deref p; return; }").unwrap();
        let r = fixpoint_analyze(&p, AnalysisOptions::default()).unwrap();
        assert_eq!(r.classes[&(key("pDcase(C)"), 0)], DefinitelyRequired);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn mutual_recursion_without_derefs_stays_at_bottom() {
        let p = parse_program(
            "classifier C; method a(req p: C) { call b(p); return; } method b(req q: C) { call a(q); return; }",
        )
        .unwrap();
        let r = fixpoint_analyze(&p, AnalysisOptions::default()).unwrap();
        assert!(r.classes.values().all(|&c| c == NotLocallyRequired));
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn forwarding_chain_converges_within_four_sweeps() {
        let p = parse_program(
            "classifier C;
             method c1(req p: C) { call c2(p); return; }
             method c2(req p: C) { call c3(p); return; }
             method c3(req p: C) { deref p; return; }",
        )
        .unwrap();
        let r = fixpoint_analyze(&p, AnalysisOptions::default()).unwrap();
        for m in ["c1(C)", "c2(C)", "c3(C)"] {
            assert_eq!(r.classes[&(key(m), 0)], DefinitelyRequired, "{m}");
        }
        assert!(r.iterations <= 4, "{} sweeps", r.iterations);
    }

    #[test]
    fn implementations_combine_by_meet() {
        let p = parse_program(
            "classifier A; classifier B;
             class KA is A { method m(req x: A) { deref x; } }
             class KB is B { method m(req x: A) { return; } }
             class KC is A { method n(req x: A) { deref x; } }
             class KD is B { method n(req x: A) { if opaque { return; } deref x; } }",
        )
        .unwrap();
        let r = fixpoint_analyze(&p, AnalysisOptions::default()).unwrap();
        assert_eq!(r.classes[&(key("m(A)"), 0)], NotLocallyRequired);
        assert_eq!(r.classes[&(key("n(A)"), 0)], PossiblyRequired);
    }

    #[test]
    fn value_parameters_have_no_entries() {
        let p = parse_program("classifier C; method m(val v, req p: C, val w) { deref p; }").unwrap();
        let r = fixpoint_analyze(&p, AnalysisOptions::default()).unwrap();
        assert_eq!(r.classes.keys().map(|(_, i)| *i).collect::<Vec<_>>(), vec![1]);
    }
}
