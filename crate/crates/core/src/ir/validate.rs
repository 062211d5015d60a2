//! Semantic checks over a parsed program.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::index::ProgramIndex;
use crate::diag::{sort_diagnostics, Diagnostic};

/// Returns one diagnostic per violated program invariant; empty iff the
/// program is well formed.
pub fn validate_program(p: &Program) -> Vec<Diagnostic> {
    let idx = ProgramIndex::new(p);
    let mut v = Validator {
        idx: &idx,
        diags: Vec::new(),
    };
    v.declarations();
    v.classifier_cycles();
    for m in &idx.methods {
        v.method(m);
    }
    sort_diagnostics(&mut v.diags);
    v.diags
}

struct Validator<'a, 'p> {
    idx: &'a ProgramIndex<'p>,
    diags: Vec<Diagnostic>,
}

impl Validator<'_, '_> {
    fn err(&mut self, kind: &str, scope: &str, pos: Pos, msg: String) {
        self.diags.push(Diagnostic::error(kind, scope, pos, msg));
    }

    fn check_classifier(&mut self, scope: &str, pos: Pos, name: &str) {
        if !self.idx.is_classifier(name) {
            self.err("unresolved", scope, pos, format!("unresolved classifier `{name}`"));
        }
    }

    fn check_params(&mut self, scope: &str, pos: Pos, params: &[Param]) {
        let mut seen = BTreeSet::new();
        for param in params {
            if !seen.insert(param.name.as_str()) {
                self.err("duplicate", scope, pos, format!("duplicate parameter `{}`", param.name));
            }
            if let Some(t) = param.type_name() {
                self.check_classifier(scope, pos, t);
            }
        }
    }

    fn declarations(&mut self) {
        let p = self.idx.program;
        let mut classifiers = BTreeSet::new();
        for c in p.classifiers() {
            if !classifiers.insert(c.name.as_str()) {
                self.err(
                    "duplicate",
                    &c.name,
                    c.pos,
                    format!("duplicate classifier `{}`", c.name),
                );
            }
            for parent in &c.parents {
                self.check_classifier(&c.name, c.pos, parent);
            }
        }
        let mut faces = BTreeSet::new();
        for f in p.faces() {
            if !faces.insert(f.name.as_str()) {
                self.err("duplicate", &f.name, f.pos, format!("duplicate face `{}`", f.name));
            }
            let mut sigs = BTreeSet::new();
            for sig in &f.signatures {
                self.check_params(&f.name, f.pos, &sig.params);
                if !sigs.insert(sig.key()) {
                    self.err(
                        "duplicate",
                        &f.name,
                        f.pos,
                        format!("duplicate signature {} in face `{}`", sig.key(), f.name),
                    );
                }
            }
        }
        let mut classes = BTreeSet::new();
        for c in p.classes() {
            if !classes.insert(c.name.as_str()) {
                self.err("duplicate", &c.name, c.pos, format!("duplicate class `{}`", c.name));
            }
            self.check_classifier(&c.name, c.pos, &c.classifier);
            let mut fields = BTreeSet::new();
            for f in &c.fields {
                if !fields.insert(f.name.as_str()) {
                    self.err("duplicate", &c.name, f.pos, format!("duplicate field `{}`", f.name));
                }
                self.check_classifier(&c.name, f.pos, &f.type_name);
            }
        }
        // Abstraction keys are unique per class and across free-standing methods.
        let mut scopes: BTreeMap<Option<&str>, BTreeSet<crate::key::AbstractionKey>> = BTreeMap::new();
        for m in &self.idx.methods {
            if !scopes.entry(m.owner.as_deref()).or_default().insert(m.key()) {
                let where_ = match &m.owner {
                    Some(o) => format!("class `{o}`"),
                    None => "global scope".to_string(),
                };
                self.err(
                    "duplicate",
                    m.name(),
                    m.pos,
                    format!("duplicate method {} in {where_}", m.key()),
                );
            }
        }
    }

    fn classifier_cycles(&mut self) {
        // Report each classifier that is its own ancestor.
        for c in self.idx.program.classifiers() {
            let mut stack: Vec<&str> = c.parents.iter().map(String::as_str).collect();
            let mut seen = BTreeSet::new();
            let mut cyclic = false;
            while let Some(n) = stack.pop() {
                if n == c.name {
                    cyclic = true;
                    break;
                }
                if seen.insert(n) {
                    stack.extend(self.idx.parents.get(n).into_iter().flatten().copied());
                }
            }
            if cyclic {
                self.err(
                    "cycle",
                    &c.name,
                    c.pos,
                    format!("cyclic classifier hierarchy through `{}`", c.name),
                );
            }
        }
    }

    fn method(&mut self, m: &MethodDecl) {
        self.check_params(m.name(), m.pos, m.params());
        let mut ctx = MethodCtx {
            scope: m.name().to_string(),
            values: m
                .params()
                .iter()
                .filter(|p| !p.is_reference())
                .map(|p| p.name.clone())
                .collect(),
            known: collect_assigned(&m.body),
        };
        ctx.known.extend(m.params().iter().map(|p| p.name.clone()));
        let assigned: BTreeSet<String> = m.params().iter().map(|p| p.name.clone()).collect();
        self.block(&ctx, &m.body, assigned);
    }

    fn use_var(&mut self, ctx: &MethodCtx, pos: Pos, var: &str, assigned: &BTreeSet<String>) {
        if !ctx.known.contains(var) {
            self.err("unresolved", &ctx.scope, pos, format!("unresolved variable `{var}`"));
        } else if !assigned.contains(var) {
            self.err(
                "unassigned",
                &ctx.scope,
                pos,
                format!("possibly-unassigned variable `{var}`"),
            );
        }
    }

    fn use_ref(&mut self, ctx: &MethodCtx, pos: Pos, var: &str, assigned: &BTreeSet<String>) {
        self.use_var(ctx, pos, var, assigned);
        if ctx.values.contains(var) {
            self.err(
                "value-use",
                &ctx.scope,
                pos,
                format!("`{var}` is a value parameter and cannot be dereferenced or null-tested"),
            );
        }
    }

    fn cond(&mut self, ctx: &MethodCtx, pos: Pos, c: &Cond, assigned: &BTreeSet<String>) {
        match c {
            Cond::IsNull(v) | Cond::NotNull(v) => self.use_ref(ctx, pos, v, assigned),
            Cond::Opaque => {}
        }
    }

    /// Walks a block with the set of variables definitely assigned on entry.
    /// Returns the set on normal exit, or `None` when every path leaves the
    /// block through `return` or `fail`.
    fn block(&mut self, ctx: &MethodCtx, stmts: &[Stmt], mut assigned: BTreeSet<String>) -> Option<BTreeSet<String>> {
        for s in stmts {
            match &s.kind {
                StmtKind::Deref(v) => self.use_ref(ctx, s.pos, v, &assigned),
                StmtKind::Call { callee, args } => {
                    for a in args {
                        if let Arg::Var(v) = a {
                            self.use_var(ctx, s.pos, v, &assigned);
                        }
                    }
                    if let Err(e) = self.idx.resolve_call(callee, args.len()) {
                        let kind = match e {
                            super::index::ResolveError::Unknown(_) => "unresolved",
                            super::index::ResolveError::Arity { .. } => "arity",
                            super::index::ResolveError::Ambiguous { .. } => "ambiguous",
                        };
                        self.err(kind, &ctx.scope, s.pos, e.to_string());
                    }
                }
                StmtKind::Assign { target, value } => {
                    match value {
                        Expr::Var(v) => self.use_var(ctx, s.pos, v, &assigned),
                        Expr::New(c) => self.check_classifier(&ctx.scope, s.pos, c),
                        Expr::Null | Expr::Opaque => {}
                    }
                    if ctx.values.contains(target) {
                        self.err(
                            "value-use",
                            &ctx.scope,
                            s.pos,
                            format!("cannot assign to value parameter `{target}`"),
                        );
                    }
                    assigned.insert(target.clone());
                }
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.cond(ctx, s.pos, cond, &assigned);
                    let a = self.block(ctx, then_body, assigned.clone());
                    let b = self.block(ctx, else_body, assigned.clone());
                    assigned = match (a, b) {
                        (Some(a), Some(b)) => a.intersection(&b).cloned().collect(),
                        (Some(x), None) | (None, Some(x)) => x,
                        (None, None) => return None,
                    };
                }
                StmtKind::While { cond, body } => {
                    self.cond(ctx, s.pos, cond, &assigned);
                    self.block(ctx, body, assigned.clone());
                }
                StmtKind::Return | StmtKind::Fail => return None,
            }
        }
        Some(assigned)
    }
}

struct MethodCtx {
    scope: String,
    values: BTreeSet<String>,
    known: BTreeSet<String>,
}

fn collect_assigned(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { target, .. } => {
                out.insert(target.clone());
            }
            StmtKind::If {
                then_body, else_body, ..
            } => {
                out.extend(collect_assigned(then_body));
                out.extend(collect_assigned(else_body));
            }
            StmtKind::While { body, .. } => out.extend(collect_assigned(body)),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_syntax;

    fn diags(src: &str) -> Vec<String> {
        validate_program(&parse_syntax(src).unwrap())
            .into_iter()
            .map(|d| d.message)
            .collect()
    }

    fn has(src: &str, needle: &str) {
        let d = diags(src);
        assert!(d.iter().any(|m| m.contains(needle)), "no `{needle}` in {d:?}");
    }

    #[test]
    fn well_formed_program_is_clean() {
        assert!(diags("classifier C; face F { m(req p: C); } method m(req p: C) { deref p; return; }").is_empty());
    }

    #[test]
    fn self_cycle() {
        has("classifier C extends C;", "cyclic classifier hierarchy");
    }

    #[test]
    fn longer_cycle() {
        has(
            "classifier A extends B; classifier B extends A;",
            "cyclic classifier hierarchy",
        );
    }

    #[test]
    fn unresolved_names() {
        has("classifier C extends D;", "unresolved classifier `D`");
        has("method m(req p: Q) { return; }", "unresolved classifier `Q`");
        has(
            "classifier C; method m(req p: C) { call nope(p); }",
            "unresolved method `nope`",
        );
        has(
            "classifier C; method m(req p: C) { deref q; }",
            "unresolved variable `q`",
        );
        has("classifier C; face F { m(req p: Z); }", "unresolved classifier `Z`");
        has("classifier C; class K is Z { }", "unresolved classifier `Z`");
        has("method m() { x = new Nope; }", "unresolved classifier `Nope`");
    }

    #[test]
    fn duplicates() {
        has("classifier C; classifier C;", "duplicate classifier");
        has("classifier C; face F { } face F { }", "duplicate face");
        has(
            "classifier C; face F { m(req a: C); m(opt b: C); }",
            "duplicate signature",
        );
        has(
            "classifier C; method m(req p: C) { return; } method m(opt q: C) { return; }",
            "duplicate method m(C) in global scope",
        );
        has(
            "classifier C; class K is C { method m(req p: C) { } method m(req p: C) { } }",
            "duplicate method m(C) in class `K`",
        );
        has("classifier C; method m(req p: C, req p: C) { }", "duplicate parameter");
    }

    #[test]
    fn same_key_in_two_classes_is_fine() {
        assert!(
            diags("classifier C; class A is C { method m(req p: C) { } } class B is C { method m(req p: C) { } }")
                .is_empty()
        );
    }

    #[test]
    fn arity_mismatch() {
        has(
            "classifier C; method m(req p: C) { return; } method n(req p: C) { call m(p, p); }",
            "arity mismatch at call m(...)",
        );
    }

    #[test]
    fn ambiguous_overload() {
        has(
            "classifier C; classifier D; method m(req p: C) { } method m(req p: D) { } method n(req p: C) { call m(p); }",
            "ambiguous call m(...)",
        );
    }

    #[test]
    fn possibly_unassigned() {
        // Path enumeration: the else path of `if opaque` skips the assignment,
        // so the deref after the join sees an unassigned `x` on that path.
        let src = "classifier C; method m() { if opaque { x = new C; } deref x; }";
        has(src, "possibly-unassigned variable `x`");
        // Assigned on both branches: fine.
        assert!(diags("classifier C; method m() { if opaque { x = new C; } else { x = null; } deref x; }").is_empty());
        // The branch that returns does not reach the join.
        assert!(diags("classifier C; method m() { if opaque { return; } else { x = new C; } deref x; }").is_empty());
        // Loop bodies may run zero times.
        has(
            "classifier C; method m() { while opaque { x = new C; } deref x; }",
            "possibly-unassigned",
        );
    }

    #[test]
    fn value_parameters_cannot_be_dereferenced() {
        has("method m(val v) { deref v; }", "value parameter");
        has("method m(val v) { if v == null { } }", "value parameter");
        has(
            "classifier C; method m(val v) { v = new C; }",
            "cannot assign to value parameter",
        );
    }
}
