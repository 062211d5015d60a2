//! Text forms of [`StaticResult`].
//!
//! CSV:
//!
//! ```text
//! # loop_bound=1 max_paths=4096 sweeps=3
//! method,param_index,class
//! "display(Window,Clock)",0,definitely_required
//! ```
//!
//! The structured-text form carries the same header values as `key: value`
//! lines followed by an aligned table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::fixpoint::{Env, StaticResult};
use super::lattice::NullabilityClass;
use super::summary::AnalysisOptions;
use crate::key::AbstractionKey;

#[derive(Debug, Error)]
pub enum ResultFormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn static_result_to_csv(r: &StaticResult) -> String {
    let mut out = format!(
        "# loop_bound={} max_paths={} sweeps={}\n",
        r.options.loop_bound, r.options.max_paths, r.iterations
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "param_index", "class"])
        .expect("in-memory write");
    for ((key, idx), class) in &r.classes {
        w.write_record([key.to_string(), idx.to_string(), class.to_string()])
            .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
    out
}

pub fn static_result_to_text(r: &StaticResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "loop_bound: {}", r.options.loop_bound);
    let _ = writeln!(out, "max_paths: {}", r.options.max_paths);
    let _ = writeln!(out, "sweeps: {}", r.iterations);
    let exceeded: Vec<String> = r.path_budget_exceeded.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(out, "budget_exceeded: [{}]", exceeded.join(", "));
    let width = r
        .classes
        .keys()
        .map(|(k, _)| k.to_string().len())
        .max()
        .unwrap_or(0)
        .max("method".len());
    let _ = writeln!(out, "{:<width$}  {:>5}  class", "method", "param");
    for ((key, idx), class) in &r.classes {
        let _ = writeln!(out, "{:<width$}  {:>5}  {}", key.to_string(), idx, class);
    }
    out
}

fn header_value(header: &str, name: &str) -> Option<usize> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(name)?.strip_prefix('='))
        .and_then(|v| v.parse().ok())
}

/// Reads the CSV form back. The budget-exceeded set is not part of the CSV
/// and comes back empty.
pub fn static_result_from_csv(text: &str) -> Result<StaticResult, ResultFormatError> {
    let header = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or(ResultFormatError::Malformed {
            line: 1,
            message: "missing `# loop_bound=.. max_paths=.. sweeps=..` header".into(),
        })?;
    let field = |name: &str| {
        header_value(header, name).ok_or_else(|| ResultFormatError::Malformed {
            line: 1,
            message: format!("header lacks `{name}`"),
        })
    };
    let options = AnalysisOptions {
        loop_bound: field("loop_bound")?,
        max_paths: field("max_paths")?,
    };
    let iterations = field("sweeps")?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut classes = Env::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 3;
        let bad = |message: String| ResultFormatError::Malformed { line, message };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let key: AbstractionKey = rec[0].parse().map_err(|e| bad(format!("{e}")))?;
        let idx: usize = rec[1]
            .parse()
            .map_err(|_| bad(format!("bad param_index `{}`", &rec[1])))?;
        let class: NullabilityClass = rec[2].parse().map_err(bad)?;
        if !key.is_reference_position(idx) {
            return Err(bad(format!("{key} has no reference parameter {idx}")));
        }
        classes.insert((key, idx), class);
    }
    Ok(StaticResult {
        classes,
        iterations,
        path_budget_exceeded: BTreeSet::new(),
        options,
    })
}
