//! Brute-force reference classifier.
//!
//! Runs a method with one reference parameter null and every other
//! reference parameter bound to a fresh object, exploring both outcomes of
//! every `opaque` condition and expression, unrolling loops up to the loop
//! bound and inlining callees through the regular dispatch rule. Executions
//! that recurse deeper than the depth limit, or spin past the loop bound,
//! are treated as non-terminating and ignored.
//!
//! The classification is then read off the set of outcomes: every
//! terminating execution fails ⇒ definitely required; none fails ⇒ not
//! locally required; otherwise possibly required.
//!
//! This deliberately shares nothing with the summary/fixpoint pipeline
//! beyond parsing and dispatch.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::lattice::NullabilityClass;
use crate::ir::{Arg, Cond, Expr, MethodDecl, Program, ProgramIndex, Stmt, StmtKind};
use crate::key::AbstractionKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum call depth; deeper executions are cut and ignored.
    pub max_depth: usize,
    /// Maximum number of (state, statement) steps across the enumeration.
    pub max_work: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_depth: 48,
            max_work: 5_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle infeasible: enumeration exceeded {0} steps")]
    Infeasible(usize),
    #[error("no method implements {0}")]
    UnknownMethod(AbstractionKey),
    #[error("parameter {1} of {0} is not a reference parameter")]
    NotReference(AbstractionKey, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Value {
    Unset,
    Null,
    Object(String),
    Scalar,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Outcomes {
    fails: bool,
    completes: bool,
}

type Frame = Vec<Value>;

struct Oracle<'a, 'p> {
    idx: &'a ProgramIndex<'p>,
    loop_bound: usize,
    limits: OracleLimits,
    work: usize,
    memo: HashMap<(usize, Vec<Value>, usize), Outcomes>,
    slot_tables: HashMap<usize, HashMap<String, usize>>,
}

pub fn oracle_classify(
    p: &Program,
    method: &AbstractionKey,
    param: usize,
    loop_bound: usize,
) -> Result<NullabilityClass, OracleError> {
    oracle_classify_with(p, method, param, loop_bound, OracleLimits::default())
}

pub fn oracle_classify_with(
    p: &Program,
    method: &AbstractionKey,
    param: usize,
    loop_bound: usize,
    limits: OracleLimits,
) -> Result<NullabilityClass, OracleError> {
    if !method.is_reference_position(param) {
        return Err(OracleError::NotReference(method.clone(), param));
    }
    let idx = ProgramIndex::new(p);
    let args: Vec<Value> = method
        .param_types
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == param {
                Value::Null
            } else if method.is_reference_position(i) {
                Value::Object(t.clone())
            } else {
                Value::Scalar
            }
        })
        .collect();
    let target = idx
        .dispatch(method, classifier_of(args.first()))
        .ok_or_else(|| OracleError::UnknownMethod(method.clone()))?;
    let mut oracle = Oracle {
        idx: &idx,
        loop_bound,
        limits,
        work: 0,
        memo: HashMap::new(),
        slot_tables: HashMap::new(),
    };
    let out = oracle.invoke(target, args, 0)?;
    Ok(match (out.fails, out.completes) {
        (true, false) => NullabilityClass::DefinitelyRequired,
        (true, true) => NullabilityClass::PossiblyRequired,
        (false, _) => NullabilityClass::NotLocallyRequired,
    })
}

fn classifier_of(v: Option<&Value>) -> Option<&str> {
    match v {
        Some(Value::Object(c)) => Some(c),
        _ => None,
    }
}

fn slots_for(m: &MethodDecl) -> HashMap<String, usize> {
    let mut names: Vec<String> = m.params().iter().map(|p| p.name.clone()).collect();
    let mut stack: Vec<&Stmt> = m.body.iter().collect();
    while let Some(s) = stack.pop() {
        match &s.kind {
            StmtKind::Assign { target, .. } => names.push(target.clone()),
            StmtKind::If {
                then_body, else_body, ..
            } => stack.extend(then_body.iter().chain(else_body)),
            StmtKind::While { body, .. } => stack.extend(body),
            _ => {}
        }
    }
    let mut table = HashMap::new();
    for n in names {
        let next = table.len();
        table.entry(n).or_insert(next);
    }
    table
}

impl Oracle<'_, '_> {
    fn tick(&mut self, n: usize) -> Result<(), OracleError> {
        self.work += n;
        if self.work > self.limits.max_work {
            Err(OracleError::Infeasible(self.limits.max_work))
        } else {
            Ok(())
        }
    }

    /// Outcome set of running implementation `target` on `args` at `depth`.
    fn invoke(&mut self, target: usize, args: Vec<Value>, depth: usize) -> Result<Outcomes, OracleError> {
        if depth > self.limits.max_depth {
            return Ok(Outcomes::default());
        }
        let memo_key = (target, args, depth);
        if let Some(o) = self.memo.get(&memo_key) {
            return Ok(*o);
        }
        let (target, args, depth) = memo_key;
        let m = self.idx.methods[target];
        self.slot_tables.entry(target).or_insert_with(|| slots_for(m));
        let width = self.slot_tables[&target].len();
        let mut frame = vec![Value::Unset; width];
        frame[..args.len()].clone_from_slice(&args);
        let mut out = Outcomes::default();
        let live = self.block(target, &m.body, BTreeSet::from([frame]), depth, &mut out)?;
        if !live.is_empty() {
            out.completes = true;
        }
        self.memo.insert((target, args, depth), out);
        Ok(out)
    }

    fn slot(&self, target: usize, var: &str) -> usize {
        self.slot_tables[&target][var]
    }

    fn holds(&self, target: usize, frame: &Frame, c: &Cond) -> [bool; 2] {
        // [can be true, can be false]
        match c {
            Cond::Opaque => [true, true],
            Cond::IsNull(v) => {
                let null = frame[self.slot(target, v)] == Value::Null;
                [null, !null]
            }
            Cond::NotNull(v) => {
                let null = frame[self.slot(target, v)] == Value::Null;
                [!null, null]
            }
        }
    }

    fn block(
        &mut self,
        target: usize,
        stmts: &[Stmt],
        mut live: BTreeSet<Frame>,
        depth: usize,
        out: &mut Outcomes,
    ) -> Result<BTreeSet<Frame>, OracleError> {
        for s in stmts {
            if live.is_empty() {
                break;
            }
            self.tick(live.len())?;
            live = self.stmt(target, s, live, depth, out)?;
        }
        Ok(live)
    }

    fn stmt(
        &mut self,
        target: usize,
        s: &Stmt,
        live: BTreeSet<Frame>,
        depth: usize,
        out: &mut Outcomes,
    ) -> Result<BTreeSet<Frame>, OracleError> {
        let mut next = BTreeSet::new();
        match &s.kind {
            StmtKind::Deref(v) => {
                let slot = self.slot(target, v);
                for f in live {
                    if f[slot] == Value::Null {
                        out.fails = true;
                    } else {
                        next.insert(f);
                    }
                }
            }
            StmtKind::Fail => out.fails = true,
            StmtKind::Return => out.completes = true,
            StmtKind::Assign { target: var, value } => {
                let slot = self.slot(target, var);
                for f in live {
                    let choices = match value {
                        Expr::Null => vec![Value::Null],
                        Expr::New(c) => vec![Value::Object(c.clone())],
                        Expr::Var(v) => vec![f[self.slot(target, v)].clone()],
                        Expr::Opaque => vec![Value::Null, Value::Scalar],
                    };
                    for c in choices {
                        let mut g = f.clone();
                        g[slot] = c;
                        next.insert(g);
                    }
                }
            }
            StmtKind::Call { callee, args } => {
                let key = self
                    .idx
                    .resolve_call(callee, args.len())
                    .map_err(|_| OracleError::UnknownMethod(AbstractionKey::new(callee.clone(), vec![])))?
                    .clone();
                for f in live {
                    let values: Vec<Value> = args
                        .iter()
                        .map(|a| match a {
                            Arg::Null => Value::Null,
                            Arg::Var(v) => f[self.slot(target, v)].clone(),
                        })
                        .collect();
                    let callee_impl = self
                        .idx
                        .dispatch(&key, classifier_of(values.first()))
                        .ok_or_else(|| OracleError::UnknownMethod(key.clone()))?;
                    let o = self.invoke(callee_impl, values, depth + 1)?;
                    out.fails |= o.fails;
                    if o.completes {
                        next.insert(f);
                    }
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let (mut t, mut e) = (BTreeSet::new(), BTreeSet::new());
                for f in live {
                    let [can_t, can_f] = self.holds(target, &f, cond);
                    if can_t {
                        t.insert(f.clone());
                    }
                    if can_f {
                        e.insert(f);
                    }
                }
                next = self.block(target, then_body, t, depth, out)?;
                next.extend(self.block(target, else_body, e, depth, out)?);
            }
            StmtKind::While { cond, body } => {
                let mut current = live;
                for copies in 0..=self.loop_bound {
                    let mut stay = BTreeSet::new();
                    for f in current {
                        let [can_t, can_f] = self.holds(target, &f, cond);
                        if can_f {
                            next.insert(f.clone());
                        }
                        if can_t {
                            stay.insert(f);
                        }
                    }
                    if copies == self.loop_bound || stay.is_empty() {
                        break;
                    }
                    current = self.block(target, body, stay, depth, out)?;
                }
            }
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;
    use NullabilityClass::*;

    fn classify(src: &str, key: &str, param: usize) -> NullabilityClass {
        let p = parse_program(src).unwrap();
        oracle_classify(&p, &key.parse().unwrap(), param, 1).unwrap()
    }

    const SHAPES: &str = "classifier C;
        method pDcase(req p: C) { deref p; return; }
        method pPcase(req p: C) { if opaque { deref p; } return; }
        method pNcase(req p: C) { return; }
        method guarded(req p: C) { if p != null { deref p; } return; }
        method fwd(req p: C) { call pDcase(p); return; }
        method fwdP(req p: C) { call pPcase(p); return; }";

    #[test]
    fn canonical_shapes() {
        assert_eq!(classify(SHAPES, "pDcase(C)", 0), DefinitelyRequired);
        assert_eq!(classify(SHAPES, "pPcase(C)", 0), PossiblyRequired);
        assert_eq!(classify(SHAPES, "pNcase(C)", 0), NotLocallyRequired);
        assert_eq!(classify(SHAPES, "guarded(C)", 0), NotLocallyRequired);
    }

    #[test]
    fn forwarding_matches_callee() {
        assert_eq!(classify(SHAPES, "fwd(C)", 0), classify(SHAPES, "pDcase(C)", 0));
        assert_eq!(classify(SHAPES, "fwdP(C)", 0), classify(SHAPES, "pPcase(C)", 0));
    }

    #[test]
    fn recursion_is_cut_at_depth() {
        let src = "classifier C;
            method r(req p: C) { if opaque { call r(p); } deref p; }
            method spin(req p: C) { call spin(p); }";
        assert_eq!(classify(src, "r(C)", 0), DefinitelyRequired);
        assert_eq!(classify(src, "spin(C)", 0), NotLocallyRequired);
    }

    #[test]
    fn explicit_fail_counts() {
        let src = "classifier C; method m(req p: C, req q: C) { if opaque { fail; } }";
        assert_eq!(classify(src, "m(C,C)", 1), PossiblyRequired);
    }

    #[test]
    fn dispatch_follows_the_first_argument() {
        let src = "classifier A; classifier B;
            class KA is A { method m(req x: A, req y: B) { deref y; } }
            class KB is B { method m(req x: A, req y: B) { return; } }";
        // x is a fresh A object, so KA.m runs.
        assert_eq!(classify(src, "m(A,B)", 1), DefinitelyRequired);
    }

    #[test]
    fn budget_is_reported() {
        let mut body = String::new();
        for i in 0..20 {
            body.push_str(&format!("x{i} = opaque; "));
        }
        let src = format!("classifier C; method m(req p: C) {{ {body} deref p; }}");
        let p = parse_program(&src).unwrap();
        let limits = OracleLimits {
            max_depth: 8,
            max_work: 1000,
        };
        let err = oracle_classify_with(&p, &"m(C)".parse().unwrap(), 0, 1, limits).unwrap_err();
        assert_eq!(err, OracleError::Infeasible(1000));
    }

    #[test]
    fn value_position_is_rejected() {
        let p = parse_program("method m(val v) { return; }").unwrap();
        assert!(matches!(
            oracle_classify(&p, &"m(val)".parse().unwrap(), 0, 1),
            Err(OracleError::NotReference(..))
        ));
    }
}
