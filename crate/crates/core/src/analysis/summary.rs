//! Per-method path summaries.
//!
//! For every reference parameter the method body is enumerated once under
//! the hypothesis that the parameter enters as null and every other
//! reference parameter enters non-null. Each surviving path is reduced to
//! the set of events that matter to the interprocedural phase: a local
//! failure, or a call that hands a null to some callee position. The
//! fixpoint then only re-evaluates these event sets against the current
//! callee classifications; bodies are never walked again.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::lattice::NullabilityClass;
use crate::diag::Diagnostic;
use crate::ir::{Arg, Cond, Expr, MethodDecl, ParamType, ProgramIndex, Stmt, StmtKind};
use crate::key::AbstractionKey;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathEvent {
    /// A null is dereferenced, or `fail` is reached.
    LocalFail,
    /// A call passes null at reference position `position` of `callee`, with
    /// every other reference argument non-null.
    CalleeUse { callee: AbstractionKey, position: usize },
}

pub type Path = BTreeSet<PathEvent>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamSummary {
    /// All distinct event sets over the enumerated paths; never empty.
    Paths(BTreeSet<Path>),
    /// Coarse summary used when enumeration exceeded the path budget.
    ///
    /// Only the straight-line prefix before the first branch is inspected:
    /// `local` is `DefinitelyRequired` if that prefix fails, otherwise
    /// `NotLocallyRequired`, and `dependencies` lists the callee positions the
    /// prefix hands a null to. Evaluation never lifts a dependency above
    /// `PossiblyRequired`.
    Fallback {
        local: NullabilityClass,
        dependencies: BTreeSet<(AbstractionKey, usize)>,
    },
}

/// The per-method transfer function: one summary per reference parameter,
/// keyed by parameter index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodTransfer {
    pub method: AbstractionKey,
    pub implementation: String,
    pub per_param: BTreeMap<usize, ParamSummary>,
}

impl MethodTransfer {
    pub fn exceeded_budget(&self) -> bool {
        self.per_param
            .values()
            .any(|s| matches!(s, ParamSummary::Fallback { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Maximum number of loop-body copies per loop.
    pub loop_bound: usize,
    /// Live plus finished paths allowed before falling back.
    pub max_paths: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            loop_bound: 1,
            max_paths: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Val {
    Unset,
    Null,
    NonNull,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct State {
    vals: Vec<Val>,
    events: Path,
}

struct OverBudget;

enum Abort {
    Budget(OverBudget),
    Resolve(Diagnostic),
}

impl From<OverBudget> for Abort {
    fn from(b: OverBudget) -> Self {
        Abort::Budget(b)
    }
}

struct Enumerator<'a, 'p> {
    idx: &'a ProgramIndex<'p>,
    method: &'a MethodDecl,
    slots: &'a HashMap<String, usize>,
    opts: AnalysisOptions,
    finished: BTreeSet<Path>,
}

pub fn summarize_method(
    m: &MethodDecl,
    idx: &ProgramIndex<'_>,
    opts: AnalysisOptions,
) -> Result<MethodTransfer, Diagnostic> {
    let slots = variable_slots(m);
    let mut per_param = BTreeMap::new();
    for (i, param) in m.params().iter().enumerate() {
        if !param.is_reference() {
            continue;
        }
        let entry = entry_state(m, &slots, i);
        let mut en = Enumerator {
            idx,
            method: m,
            slots: &slots,
            opts,
            finished: BTreeSet::new(),
        };
        let summary = match en.block(&m.body, BTreeSet::from([entry.clone()])) {
            Ok(live) => {
                en.finished.extend(live.into_iter().map(|s| s.events));
                if en.finished.is_empty() {
                    // Every path was cut at the loop bound.
                    en.finished.insert(Path::new());
                }
                ParamSummary::Paths(en.finished)
            }
            Err(Abort::Resolve(d)) => return Err(d),
            Err(Abort::Budget(_)) => en.prefix_fallback(entry)?,
        };
        per_param.insert(i, summary);
    }
    Ok(MethodTransfer {
        method: m.key(),
        implementation: m.implementation_name(),
        per_param,
    })
}

fn variable_slots(m: &MethodDecl) -> HashMap<String, usize> {
    fn walk(stmts: &[Stmt], out: &mut HashMap<String, usize>) {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { target, .. } => {
                    let n = out.len();
                    out.entry(target.clone()).or_insert(n);
                }
                StmtKind::If {
                    then_body, else_body, ..
                } => {
                    walk(then_body, out);
                    walk(else_body, out);
                }
                StmtKind::While { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    let mut slots = HashMap::new();
    for p in m.params() {
        let n = slots.len();
        slots.entry(p.name.clone()).or_insert(n);
    }
    walk(&m.body, &mut slots);
    slots
}

fn entry_state(m: &MethodDecl, slots: &HashMap<String, usize>, null_param: usize) -> State {
    let mut vals = vec![Val::Unset; slots.len()];
    for (i, p) in m.params().iter().enumerate() {
        vals[slots[&p.name]] = match p.ty {
            ParamType::Reference { .. } if i == null_param => Val::Null,
            _ => Val::NonNull,
        };
    }
    State {
        vals,
        events: Path::new(),
    }
}

impl Enumerator<'_, '_> {
    fn val(&self, st: &State, var: &str) -> Val {
        st.vals[self.slots[var]]
    }

    fn is_null(&self, st: &State, var: &str) -> bool {
        self.val(st, var) == Val::Null
    }

    fn finish(&mut self, mut st: State, fail: bool) {
        if fail {
            st.events.insert(PathEvent::LocalFail);
        }
        self.finished.insert(st.events);
    }

    fn block(&mut self, stmts: &[Stmt], mut live: BTreeSet<State>) -> Result<BTreeSet<State>, Abort> {
        for s in stmts {
            if live.is_empty() {
                break;
            }
            live = self.stmt(s, live)?;
            if live.len() + self.finished.len() > self.opts.max_paths {
                return Err(OverBudget.into());
            }
        }
        Ok(live)
    }

    /// Splits states into those that may take the true and the false branch.
    fn split(&self, cond: &Cond, live: BTreeSet<State>) -> (BTreeSet<State>, BTreeSet<State>) {
        match cond {
            Cond::Opaque => (live.clone(), live),
            Cond::IsNull(v) => live.into_iter().partition(|st| self.is_null(st, v)),
            Cond::NotNull(v) => live.into_iter().partition(|st| !self.is_null(st, v)),
        }
    }

    /// Null reference arguments of a call: returns the callee key and the
    /// single null reference position, if there is exactly one.
    fn call_event(&self, st: &State, key: &AbstractionKey, args: &[Arg]) -> Option<PathEvent> {
        let mut nulls = key.reference_positions().into_iter().filter(|&j| match &args[j] {
            Arg::Null => true,
            Arg::Var(v) => self.is_null(st, v),
        });
        let first = nulls.next()?;
        if nulls.next().is_some() {
            return None;
        }
        Some(PathEvent::CalleeUse {
            callee: key.clone(),
            position: first,
        })
    }

    fn resolve(&self, s: &Stmt, callee: &str, arity: usize) -> Result<AbstractionKey, Abort> {
        self.idx.resolve_call(callee, arity).cloned().map_err(|e| {
            Abort::Resolve(Diagnostic::error(
                "unresolved",
                self.method.name(),
                s.pos,
                e.to_string(),
            ))
        })
    }

    fn stmt(&mut self, s: &Stmt, live: BTreeSet<State>) -> Result<BTreeSet<State>, Abort> {
        let mut out = BTreeSet::new();
        match &s.kind {
            StmtKind::Deref(v) => {
                for st in live {
                    if self.is_null(&st, v) {
                        self.finish(st, true);
                    } else {
                        out.insert(st);
                    }
                }
            }
            StmtKind::Fail => live.into_iter().for_each(|st| self.finish(st, true)),
            StmtKind::Return => live.into_iter().for_each(|st| self.finish(st, false)),
            StmtKind::Assign { target, value } => {
                let slot = self.slots[target];
                for st in live {
                    let vals: &[Val] = match value {
                        Expr::Null => &[Val::Null],
                        Expr::New(_) => &[Val::NonNull],
                        Expr::Var(v) => match self.val(&st, v) {
                            Val::Null => &[Val::Null],
                            _ => &[Val::NonNull],
                        },
                        Expr::Opaque => &[Val::Null, Val::NonNull],
                    };
                    for &v in vals {
                        let mut next = st.clone();
                        next.vals[slot] = v;
                        out.insert(next);
                    }
                }
            }
            StmtKind::Call { callee, args } => {
                let key = self.resolve(s, callee, args.len())?;
                for mut st in live {
                    if let Some(ev) = self.call_event(&st, &key, args) {
                        st.events.insert(ev);
                    }
                    out.insert(st);
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let (t, e) = self.split(cond, live);
                out = self.block(then_body, t)?;
                out.extend(self.block(else_body, e)?);
            }
            StmtKind::While { cond, body } => {
                let mut current = live;
                for copies in 0..=self.opts.loop_bound {
                    let (cont, exit) = self.split(cond, current);
                    out.extend(exit);
                    // Paths still inside the loop at the bound are dropped.
                    if copies == self.opts.loop_bound || cont.is_empty() {
                        break;
                    }
                    current = self.block(body, cont)?;
                }
            }
        }
        Ok(out)
    }

    fn prefix_fallback(&mut self, mut st: State) -> Result<ParamSummary, Diagnostic> {
        let mut local = NullabilityClass::NotLocallyRequired;
        let mut dependencies = BTreeSet::new();
        for s in &self.method.body {
            match &s.kind {
                StmtKind::Deref(v) if self.is_null(&st, v) => {
                    local = NullabilityClass::DefinitelyRequired;
                    break;
                }
                StmtKind::Deref(_) => {}
                StmtKind::Fail => {
                    local = NullabilityClass::DefinitelyRequired;
                    break;
                }
                StmtKind::Return => break,
                StmtKind::Assign { target, value } => {
                    let v = match value {
                        Expr::Null => Val::Null,
                        Expr::New(_) => Val::NonNull,
                        Expr::Var(v) => self.val(&st, v),
                        Expr::Opaque => break,
                    };
                    st.vals[self.slots[target]] = v;
                }
                StmtKind::Call { callee, args } => {
                    let key = match self.resolve(s, callee, args.len()) {
                        Ok(k) => k,
                        Err(Abort::Resolve(d)) => return Err(d),
                        Err(Abort::Budget(_)) => unreachable!(),
                    };
                    if let Some(PathEvent::CalleeUse { callee, position }) = self.call_event(&st, &key, args) {
                        dependencies.insert((callee, position));
                    }
                }
                StmtKind::If { .. } | StmtKind::While { .. } => break,
            }
        }
        Ok(ParamSummary::Fallback { local, dependencies })
    }
}
