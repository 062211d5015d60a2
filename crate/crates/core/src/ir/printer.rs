//! Canonical MOL text.
//!
//! Four-space indentation, one statement per line, one blank line between
//! top-level items, explicit qualifiers on every parameter and field.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, item) in p.items.iter().enumerate() {
        let prev_is_classifier = i > 0 && matches!(p.items[i - 1], Item::Classifier(_));
        if i > 0 && !(prev_is_classifier && matches!(item, Item::Classifier(_))) {
            out.push('\n');
        }
        match item {
            Item::Classifier(c) => {
                out.push_str("classifier ");
                out.push_str(&c.name);
                if !c.parents.is_empty() {
                    out.push_str(" extends ");
                    out.push_str(&c.parents.join(", "));
                }
                out.push_str(";\n");
            }
            Item::Face(f) => {
                let _ = writeln!(out, "face {} {{", f.name);
                for sig in &f.signatures {
                    let _ = writeln!(out, "    {}({});", sig.name, params(&sig.params));
                }
                out.push_str("}\n");
            }
            Item::Class(c) => {
                let _ = writeln!(out, "class {} is {} {{", c.name, c.classifier);
                for field in &c.fields {
                    let _ = writeln!(
                        out,
                        "    {} {}: {};",
                        field.nullability.keyword(),
                        field.name,
                        field.type_name
                    );
                }
                for (j, m) in c.methods.iter().enumerate() {
                    if j > 0 || !c.fields.is_empty() {
                        out.push('\n');
                    }
                    method(&mut out, m, 1);
                }
                out.push_str("}\n");
            }
            Item::Method(m) => method(&mut out, m, 0),
        }
    }
    out
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| match &p.ty {
            ParamType::Reference { type_name, nullability } => {
                format!("{} {}: {}", nullability.keyword(), p.name, type_name)
            }
            ParamType::Value => format!("val {}", p.name),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn method(out: &mut String, m: &MethodDecl, level: usize) {
    indent(out, level);
    let _ = write!(out, "method {}({}) ", m.name(), params(m.params()));
    block(out, &m.body, level);
    out.push('\n');
}

fn block(out: &mut String, stmts: &[Stmt], level: usize) {
    if stmts.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for s in stmts {
        stmt(out, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn cond(c: &Cond) -> String {
    match c {
        Cond::IsNull(v) => format!("{v} == null"),
        Cond::NotNull(v) => format!("{v} != null"),
        Cond::Opaque => "opaque".to_string(),
    }
}

fn stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Deref(v) => {
            let _ = writeln!(out, "deref {v};");
        }
        StmtKind::Call { callee, args } => {
            let args: Vec<&str> = args
                .iter()
                .map(|a| match a {
                    Arg::Var(v) => v.as_str(),
                    Arg::Null => "null",
                })
                .collect();
            let _ = writeln!(out, "call {callee}({});", args.join(", "));
        }
        StmtKind::Assign { target, value } => {
            let value = match value {
                Expr::Null => "null".to_string(),
                Expr::New(c) => format!("new {c}"),
                Expr::Var(v) => v.clone(),
                Expr::Opaque => "opaque".to_string(),
            };
            let _ = writeln!(out, "{target} = {value};");
        }
        StmtKind::If {
            cond: c,
            then_body,
            else_body,
        } => {
            let _ = write!(out, "if {} ", cond(c));
            block(out, then_body, level);
            if !else_body.is_empty() {
                out.push_str(" else ");
                block(out, else_body, level);
            }
            out.push('\n');
        }
        StmtKind::While { cond: c, body } => {
            let _ = write!(out, "while {} ", cond(c));
            block(out, body, level);
            out.push('\n');
        }
        StmtKind::Return => out.push_str("return;\n"),
        StmtKind::Fail => out.push_str("fail;\n"),
    }
}
