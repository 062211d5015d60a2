//! Whole-program checking.
//!
//! Locals take the type of their first assignment in text order: `new C`
//! gives classifier and face `C`, required; a copy of a typed variable takes
//! that variable's type; `null` and `opaque` leave the local untyped, and
//! untyped locals are never checked or used as proof. Branch-local knowledge
//! (null tests, pool growth) is dropped at the end of the branch.

use std::collections::{BTreeSet, HashSet};

use super::model::{
    check_assignment, check_call, entry_pool, AssurancePool, CheckError, CheckMode, DeclType, Registry, Scope,
    SourceInfo,
};
use crate::diag::{sort_diagnostics, Diagnostic};
use crate::ir::{Cond, Expr, MethodDecl, Nullability, Program, Stmt, StmtKind};

pub fn check_program(p: &Program, mode: CheckMode) -> Vec<Diagnostic> {
    let registry = Registry::new(p);
    let mut out = Vec::new();
    for (key, first, second) in registry.idx.dispatch_ties() {
        let winner = registry.idx.methods[first];
        let loser = registry.idx.methods[second];
        out.push(Diagnostic::warning(
            "dispatch-tie",
            loser.implementation_name(),
            loser.pos,
            format!(
                "{} and {} implement {key} for the same classifier; {} is declared first and wins",
                winner.implementation_name(),
                loser.implementation_name(),
                winner.implementation_name()
            ),
        ));
    }
    for m in registry.idx.methods.iter().copied() {
        MethodChecker::new(m, &registry, mode, &mut out).run();
    }
    sort_diagnostics(&mut out);
    out
}

struct MethodChecker<'a, 'p> {
    method: &'p MethodDecl,
    registry: &'a Registry<'p>,
    mode: CheckMode,
    /// Assignments that introduce a local's type; they are not checked.
    defining: HashSet<*const Stmt>,
    out: &'a mut Vec<Diagnostic>,
}

#[derive(Clone)]
struct State {
    pool: AssurancePool,
    scope: Scope,
}

impl<'a, 'p> MethodChecker<'a, 'p> {
    fn new(method: &'p MethodDecl, registry: &'a Registry<'p>, mode: CheckMode, out: &'a mut Vec<Diagnostic>) -> Self {
        MethodChecker {
            method,
            registry,
            mode,
            defining: HashSet::new(),
            out,
        }
    }

    fn run(mut self) {
        let mut scope = Scope::default();
        let mut params = BTreeSet::new();
        for p in self.method.params() {
            params.insert(p.name.as_str());
            if let (Some(t), Some(n)) = (p.type_name(), p.nullability()) {
                scope.types.insert(p.name.clone(), DeclType::named(t, n));
            }
        }
        let mut seen: BTreeSet<&str> = params;
        let body = &self.method.body;
        self.type_locals(body, &mut seen, &mut scope);
        let state = State {
            pool: entry_pool(self.method, self.registry),
            scope,
        };
        self.block(body, state);
    }

    fn type_locals(&mut self, stmts: &'p [Stmt], seen: &mut BTreeSet<&'p str>, scope: &mut Scope) {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { target, value } => {
                    if seen.insert(target.as_str()) {
                        self.defining.insert(s as *const Stmt);
                        let ty = match value {
                            Expr::New(c) => Some(DeclType::named(c, Nullability::Required)),
                            Expr::Var(v) => scope.types.get(v).cloned(),
                            Expr::Null | Expr::Opaque => None,
                        };
                        if let Some(ty) = ty {
                            scope.types.insert(target.clone(), ty);
                        }
                    }
                }
                StmtKind::If {
                    then_body, else_body, ..
                } => {
                    self.type_locals(then_body, seen, scope);
                    self.type_locals(else_body, seen, scope);
                }
                StmtKind::While { body, .. } => self.type_locals(body, seen, scope),
                _ => {}
            }
        }
    }

    fn report(&mut self, s: &Stmt, e: CheckError) {
        self.out.push(Diagnostic::error(
            e.kind(),
            self.method.implementation_name(),
            s.pos,
            e.to_string(),
        ));
    }

    fn source_info(&self, value: &Expr, st: &State) -> SourceInfo {
        match value {
            Expr::Null => SourceInfo::NullLiteral,
            Expr::Opaque => SourceInfo::Value {
                classifier: None,
                proven: BTreeSet::new(),
                nullable: true,
            },
            Expr::New(c) => SourceInfo::Value {
                classifier: Some(c.clone()),
                proven: match self.mode {
                    CheckMode::Continuum => {
                        let mut all = self.registry.all_keys();
                        all.extend(st.pool.proven.iter().cloned());
                        all
                    }
                    CheckMode::Conventional => self.registry.lineage_keys(c),
                },
                nullable: false,
            },
            Expr::Var(v) => match st.scope.types.get(v) {
                None => SourceInfo::Value {
                    classifier: None,
                    proven: BTreeSet::new(),
                    nullable: true,
                },
                Some(t) => {
                    let mut proven: BTreeSet<_> = self.registry.idx.face_signatures(&t.face).cloned().collect();
                    if self.mode == CheckMode::Continuum {
                        proven.extend(st.pool.proven.iter().cloned());
                    }
                    SourceInfo::Value {
                        classifier: Some(t.classifier.clone()),
                        proven,
                        nullable: st.scope.non_null_type(v).is_none(),
                    }
                }
            },
        }
    }

    /// Records that `v` is non-null in this branch and, in continuum mode,
    /// pools the abstractions its face proves.
    fn learn_non_null(&self, st: &mut State, v: &str) {
        st.scope.known_non_null.insert(v.to_string());
        if self.mode == CheckMode::Continuum {
            if let Some(t) = st.scope.types.get(v) {
                st.pool
                    .proven
                    .extend(self.registry.idx.face_signatures(&t.face).cloned());
            }
        }
    }

    fn refine(&self, cond: &Cond, st: &State, positive: bool) -> State {
        let mut st = st.clone();
        match (cond, positive) {
            (Cond::NotNull(v), true) | (Cond::IsNull(v), false) => self.learn_non_null(&mut st, v),
            (Cond::NotNull(v), false) | (Cond::IsNull(v), true) => {
                st.scope.known_non_null.remove(v);
            }
            (Cond::Opaque, _) => {}
        }
        st
    }

    fn block(&mut self, stmts: &'p [Stmt], mut st: State) {
        for s in stmts {
            match &s.kind {
                StmtKind::Deref(_) | StmtKind::Return | StmtKind::Fail => {}
                StmtKind::Call { callee, args } => {
                    let Ok(key) = self.registry.idx.resolve_call(callee, args.len()) else {
                        continue;
                    };
                    if let Err(e) = check_call(&st.pool, key, args, self.mode, self.registry, &st.scope) {
                        self.report(s, e);
                    }
                }
                StmtKind::Assign { target, value } => {
                    let source = self.source_info(value, &st);
                    if !self.defining.contains(&(s as *const Stmt)) {
                        if let Some(t) = st.scope.types.get(target) {
                            if let Err(e) = check_assignment(target, t, &source, self.registry) {
                                self.report(s, e);
                            }
                        }
                    }
                    match source {
                        SourceInfo::Value { nullable: false, .. } => self.learn_non_null(&mut st, target),
                        _ => {
                            st.scope.known_non_null.remove(target);
                        }
                    }
                }
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.block(then_body, self.refine(cond, &st, true));
                    self.block(else_body, self.refine(cond, &st, false));
                    forget_assigned(&mut st, then_body.iter().chain(else_body));
                }
                StmtKind::While { cond, body } => {
                    // Later iterations see the body's own assignments.
                    forget_assigned(&mut st, body.iter());
                    self.block(body, self.refine(cond, &st, true));
                }
            }
        }
    }
}

/// Drops non-null knowledge about every variable assigned in `stmts`.
fn forget_assigned<'s>(st: &mut State, stmts: impl Iterator<Item = &'s Stmt>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { target, .. } => {
                st.scope.known_non_null.remove(target);
            }
            StmtKind::If {
                then_body, else_body, ..
            } => forget_assigned(st, then_body.iter().chain(else_body)),
            StmtKind::While { body, .. } => forget_assigned(st, body.iter()),
            _ => {}
        }
    }
}
