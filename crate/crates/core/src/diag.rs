//! Diagnostics shared by the parser, validator and checker.

use std::fmt;

use serde::Serialize;

use crate::ir::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// One finding. Serializes as `SEVERITY kind scope:line:col message`, where
/// `scope` is the enclosing method or declaration name (`-` when none).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: String,
    pub scope: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: &str, scope: impl Into<String>, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind: kind.to_string(),
            scope: scope.into(),
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    pub fn warning(kind: &str, scope: impl Into<String>, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(kind, scope, pos, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    fn sort_key(&self) -> (u32, u32, Severity, &str, &str, &str) {
        (
            self.line,
            self.col,
            self.severity,
            &self.kind,
            &self.scope,
            &self.message,
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scope = if self.scope.is_empty() { "-" } else { &self.scope };
        write!(
            f,
            "{} {} {}:{}:{} {}",
            self.severity, self.kind, scope, self.line, self.col, self.message
        )
    }
}

/// Orders diagnostics by source position so merged output is deterministic.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
