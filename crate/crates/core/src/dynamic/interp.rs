//! Seeded MOL interpreter.
//!
//! Frames live on an explicit stack, so deep interpreted recursion cannot
//! overflow the host stack; the step limit bounds both time and memory.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::rng::SplitMix64;
use crate::diag::Diagnostic;
use crate::ir::{Arg, Cond, Expr, MethodDecl, Nullability, Pos, Program, ProgramIndex, Stmt, StmtKind};
use crate::key::AbstractionKey;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeValue {
    Null,
    ObjectRef {
        id: u64,
        classifier: String,
        fields: BTreeMap<String, RuntimeValue>,
    },
    Scalar(u64),
}

impl RuntimeValue {
    pub fn is_null(&self) -> bool {
        matches!(self, RuntimeValue::Null)
    }

    fn classifier(&self) -> Option<&str> {
        match self {
            RuntimeValue::ObjectRef { classifier, .. } => Some(classifier),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallRecord {
    pub abstraction: AbstractionKey,
    /// Owner-qualified implementation name, e.g. `Clock.display`.
    pub implementation: String,
    /// One flag per reference parameter, in parameter order.
    pub arg_null: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Location {
    pub implementation: String,
    pub pos: Pos,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.implementation, self.pos.line, self.pos.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Completed,
    NullDerefFailure(Location),
    ExplicitFailure(Location),
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub records: Vec<CallRecord>,
    pub outcome: Outcome,
    pub seed: u64,
}

impl ExecutionTrace {
    pub fn total_calls(&self) -> usize {
        self.records.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    /// Execution halts once this many statements have run. Re-checking a
    /// `while` condition counts as a statement.
    pub step_limit: u64,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        RunOptions {
            seed,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }
}

/// Reusable interpreter over one program.
pub struct Tracer<'p> {
    idx: ProgramIndex<'p>,
    fields: HashMap<&'p str, Vec<&'p str>>,
}

enum Work<'p> {
    Seq(&'p [Stmt], usize),
    /// Re-check of a loop condition after its body ran.
    Loop(&'p Stmt),
}

struct Frame<'p> {
    method: &'p MethodDecl,
    vars: HashMap<&'p str, RuntimeValue>,
    work: Vec<Work<'p>>,
}

struct Run<'t, 'p> {
    tracer: &'t Tracer<'p>,
    rng: SplitMix64,
    next_id: u64,
    steps: u64,
    records: Vec<CallRecord>,
}

pub fn run_program(p: &Program, entry: &str, opts: RunOptions) -> Result<ExecutionTrace, Diagnostic> {
    Tracer::new(p).run(entry, opts)
}

impl<'p> Tracer<'p> {
    pub fn new(p: &'p Program) -> Self {
        let mut fields: HashMap<&str, Vec<&str>> = HashMap::new();
        for c in p.classes() {
            fields
                .entry(c.classifier.as_str())
                .or_insert_with(|| c.fields.iter().map(|f| f.name.as_str()).collect());
        }
        Tracer {
            idx: ProgramIndex::new(p),
            fields,
        }
    }

    pub fn program(&self) -> &'p Program {
        self.idx.program
    }

    /// Runs `entry`. A free-standing method of that name is preferred;
    /// parameters, if any, receive fresh objects when required and null
    /// when optional.
    pub fn run(&self, entry: &str, opts: RunOptions) -> Result<ExecutionTrace, Diagnostic> {
        let method = self
            .idx
            .methods
            .iter()
            .copied()
            .filter(|m| m.name() == entry)
            .min_by_key(|m| (m.owner.is_some(), m.params().len()))
            .ok_or_else(|| {
                Diagnostic::error(
                    "unresolved-entry",
                    entry,
                    Pos::new(0, 0),
                    format!("no method named `{entry}`"),
                )
            })?;
        let mut run = Run {
            tracer: self,
            rng: SplitMix64::new(opts.seed),
            next_id: 0,
            steps: 0,
            records: Vec::new(),
        };
        let args = method
            .params()
            .iter()
            .map(|p| match (p.type_name(), p.nullability()) {
                (Some(t), Some(Nullability::Required)) => run.new_object(t),
                (Some(_), _) => RuntimeValue::Null,
                (None, _) => run.scalar(),
            })
            .collect();
        let outcome = run.execute(method, args, opts.step_limit);
        Ok(ExecutionTrace {
            records: run.records,
            outcome,
            seed: opts.seed,
        })
    }
}

fn frame<'p>(method: &'p MethodDecl, args: Vec<RuntimeValue>) -> Frame<'p> {
    let vars = method.params().iter().map(|p| p.name.as_str()).zip(args).collect();
    Frame {
        method,
        vars,
        work: vec![Work::Seq(&method.body, 0)],
    }
}

fn location(m: &MethodDecl, s: &Stmt) -> Location {
    Location {
        implementation: m.implementation_name(),
        pos: s.pos,
    }
}

impl<'p> Run<'_, 'p> {
    fn new_object(&mut self, classifier: &str) -> RuntimeValue {
        self.next_id += 1;
        let fields = self
            .tracer
            .fields
            .get(classifier)
            .map(|names| names.iter().map(|n| (n.to_string(), RuntimeValue::Null)).collect())
            .unwrap_or_default();
        RuntimeValue::ObjectRef {
            id: self.next_id,
            classifier: classifier.to_string(),
            fields,
        }
    }

    fn scalar(&mut self) -> RuntimeValue {
        self.next_id += 1;
        RuntimeValue::Scalar(self.next_id)
    }

    fn cond(&mut self, f: &Frame<'p>, c: &Cond) -> bool {
        match c {
            Cond::Opaque => self.rng.next_bit(),
            Cond::IsNull(v) => lookup(f, v).is_null(),
            Cond::NotNull(v) => !lookup(f, v).is_null(),
        }
    }

    fn execute(&mut self, entry: &'p MethodDecl, args: Vec<RuntimeValue>, limit: u64) -> Outcome {
        let mut stack = vec![frame(entry, args)];
        while let Some(top) = stack.last_mut() {
            let Some(work) = top.work.pop() else {
                stack.pop();
                continue;
            };
            let stmt = match work {
                Work::Seq(stmts, i) => {
                    let Some(s) = stmts.get(i) else { continue };
                    top.work.push(Work::Seq(stmts, i + 1));
                    s
                }
                Work::Loop(s) => s,
            };
            if self.steps >= limit {
                return Outcome::StepLimit;
            }
            self.steps += 1;
            let top = stack.last_mut().expect("frame present");
            match &stmt.kind {
                StmtKind::Deref(v) => {
                    if lookup(top, v).is_null() {
                        return Outcome::NullDerefFailure(location(top.method, stmt));
                    }
                }
                StmtKind::Assign { target, value } => {
                    let v = match value {
                        Expr::Null => RuntimeValue::Null,
                        Expr::New(c) => self.new_object(c),
                        Expr::Var(x) => lookup(top, x),
                        Expr::Opaque => {
                            if self.rng.next_bit() {
                                RuntimeValue::Null
                            } else {
                                self.scalar()
                            }
                        }
                    };
                    top.vars.insert(target.as_str(), v);
                }
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    let branch = if self.cond(top, cond) { then_body } else { else_body };
                    top.work.push(Work::Seq(branch, 0));
                }
                StmtKind::While { cond, body } => {
                    if self.cond(top, cond) {
                        top.work.push(Work::Loop(stmt));
                        top.work.push(Work::Seq(body, 0));
                    }
                }
                StmtKind::Return => {
                    stack.pop();
                }
                StmtKind::Fail => return Outcome::ExplicitFailure(location(top.method, stmt)),
                StmtKind::Call { callee, args } => {
                    let values: Vec<RuntimeValue> = args
                        .iter()
                        .map(|a| match a {
                            Arg::Null => RuntimeValue::Null,
                            Arg::Var(v) => lookup(top, v),
                        })
                        .collect();
                    let idx = &self.tracer.idx;
                    let Ok(key) = idx.resolve_call(callee, values.len()) else {
                        // Validated programs always resolve.
                        return Outcome::ExplicitFailure(location(top.method, stmt));
                    };
                    let first = values.first().and_then(RuntimeValue::classifier);
                    let Some(target) = idx.dispatch(key, first) else {
                        return Outcome::ExplicitFailure(location(top.method, stmt));
                    };
                    let callee_decl = idx.methods[target];
                    self.records.push(CallRecord {
                        abstraction: key.clone(),
                        implementation: callee_decl.implementation_name(),
                        arg_null: key
                            .reference_positions()
                            .into_iter()
                            .map(|j| values[j].is_null())
                            .collect(),
                    });
                    stack.push(frame(callee_decl, values));
                }
            }
        }
        Outcome::Completed
    }
}

fn lookup(f: &Frame<'_>, v: &str) -> RuntimeValue {
    // Definite assignment is checked by the validator; an unbound name can
    // only come from an unvalidated program and reads as null.
    f.vars.get(v).cloned().unwrap_or(RuntimeValue::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const M: &str = "classifier C; method m(req p: C) { deref p; return; }";

    fn run(src: &str, seed: u64, limit: u64) -> ExecutionTrace {
        let p = parse_program(src).unwrap();
        run_program(
            &p,
            "main",
            RunOptions {
                seed,
                step_limit: limit,
            },
        )
        .unwrap()
    }

    #[test]
    fn non_null_call_completes() {
        let t = run(
            &format!("{M} method main() {{ x = new C; call m(x); return; }}"),
            0,
            100,
        );
        assert_eq!(
            t.records,
            vec![CallRecord {
                abstraction: "m(C)".parse().unwrap(),
                implementation: "m".into(),
                arg_null: vec![false],
            }]
        );
        assert_eq!(t.outcome, Outcome::Completed);
    }

    #[test]
    fn null_flows_to_deref() {
        let t = run(&format!("{M} method main() {{ call m(null); return; }}"), 0, 100);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].arg_null, vec![true]);
        match t.outcome {
            Outcome::NullDerefFailure(loc) => {
                assert_eq!(loc.implementation, "m");
                assert_eq!((loc.pos.line, loc.pos.col), (1, 36));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn step_limit_truncates() {
        let src = format!("{M} method main() {{ x = new C; while x != null {{ call m(x); }} }}");
        let t = run(&src, 7, 1000);
        assert_eq!(t.outcome, Outcome::StepLimit);
        // 1 assignment, then per iteration: loop check, call, deref, return.
        assert_eq!(t.records.len(), 999usize.div_ceil(4));
    }

    #[test]
    fn value_positions_are_not_recorded() {
        let src = "classifier C; method g(val v, opt p: C) { return; } method main() { v = opaque; call g(v, null); }";
        let t = run(src, 3, 100);
        assert_eq!(t.records[0].arg_null, vec![true]);
    }

    #[test]
    fn explicit_failure() {
        let t = run("method main() { fail; }", 0, 10);
        assert!(matches!(t.outcome, Outcome::ExplicitFailure(_)));
    }

    #[test]
    fn dispatch_by_first_argument() {
        let src = "classifier A; classifier B extends A;
            class KA is A { method m(req x: A) { return; } }
            class KB is B { method m(req x: A) { return; } }
            method main() { a = new A; b = new B; call m(a); call m(b); }";
        let t = run(src, 0, 100);
        let names: Vec<&str> = t.records.iter().map(|r| r.implementation.as_str()).collect();
        assert_eq!(names, ["KA.m", "KB.m"]);
    }

    #[test]
    fn same_seed_same_trace_and_seeds_matter() {
        let src = format!(
            "{M} method main() {{ while opaque {{ x = opaque; if x != null {{ call m(x); }} else {{ y = new C; call m(y); }} }} }}"
        );
        let a = run(&src, 11, 10_000);
        assert_eq!(a, run(&src, 11, 10_000));
        let lens: std::collections::BTreeSet<usize> = (0..16).map(|s| run(&src, s, 10_000).records.len()).collect();
        assert!(lens.len() > 1);
    }

    #[test]
    fn deep_recursion_hits_step_limit_not_stack() {
        let src = "classifier C; method r(req p: C) { call r(p); } method main() { x = new C; call r(x); }";
        let t = run(src, 0, 200_000);
        assert_eq!(t.outcome, Outcome::StepLimit);
        assert_eq!(t.records.len(), 199_999);
    }

    #[test]
    fn entry_with_parameters_gets_harness_values() {
        let p = parse_program(
            "classifier C; method e(req a: C, opt b: C) { deref a; call e2(b); } method e2(opt q: C) { }",
        )
        .unwrap();
        let t = run_program(&p, "e", RunOptions::new(0)).unwrap();
        assert_eq!(t.outcome, Outcome::Completed);
        assert_eq!(t.records[0].arg_null, vec![true]);
        assert!(run_program(&p, "nope", RunOptions::new(0)).is_err());
    }
}
