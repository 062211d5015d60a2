//! Line format for execution traces.
//!
//! ```text
//! display(Window,Clock)\tClock.display\t01
//! # outcome=completed seed=7 total_calls=1
//! ```
//!
//! Each record line holds the abstraction key, the implementation and one
//! `0`/`1` per reference parameter (`1` = null). The trailer's outcome is
//! `completed`, `step_limit`, `null_deref@impl:line:col` or
//! `explicit_failure@impl:line:col`.

use std::fmt::Write as _;

use thiserror::Error;

use super::interp::{CallRecord, ExecutionTrace, Location, Outcome};
use crate::ir::Pos;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

pub fn bits(flags: &[bool]) -> String {
    flags.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Completed => "completed".into(),
        Outcome::StepLimit => "step_limit".into(),
        Outcome::NullDerefFailure(l) => format!("null_deref@{l}"),
        Outcome::ExplicitFailure(l) => format!("explicit_failure@{l}"),
    }
}

fn parse_location(s: &str) -> Option<Location> {
    let mut parts = s.rsplitn(3, ':');
    let col = parts.next()?.parse().ok()?;
    let line = parts.next()?.parse().ok()?;
    Some(Location {
        implementation: parts.next()?.to_string(),
        pos: Pos::new(line, col),
    })
}

fn parse_outcome(s: &str) -> Option<Outcome> {
    match s {
        "completed" => Some(Outcome::Completed),
        "step_limit" => Some(Outcome::StepLimit),
        _ => {
            let (kind, loc) = s.split_once('@')?;
            let loc = parse_location(loc)?;
            match kind {
                "null_deref" => Some(Outcome::NullDerefFailure(loc)),
                "explicit_failure" => Some(Outcome::ExplicitFailure(loc)),
                _ => None,
            }
        }
    }
}

pub fn write_trace(t: &ExecutionTrace) -> String {
    let mut out = String::new();
    for r in &t.records {
        let _ = writeln!(out, "{}\t{}\t{}", r.abstraction, r.implementation, bits(&r.arg_null));
    }
    let _ = writeln!(
        out,
        "# outcome={} seed={} total_calls={}",
        outcome_text(&t.outcome),
        t.seed,
        t.total_calls()
    );
    out
}

/// Parses a text holding one or more traces, each ended by its trailer.
pub fn read_traces(text: &str) -> Result<Vec<ExecutionTrace>, TraceParseError> {
    let mut traces = Vec::new();
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: &str| TraceParseError {
            line,
            message: message.to_string(),
        };
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(trailer) = raw.strip_prefix('#') {
            let mut outcome = None;
            let mut seed = None;
            let mut total = None;
            for kv in trailer.split_whitespace() {
                match kv.split_once('=') {
                    Some(("outcome", v)) => outcome = parse_outcome(v),
                    Some(("seed", v)) => seed = v.parse::<u64>().ok(),
                    Some(("total_calls", v)) => total = v.parse::<usize>().ok(),
                    _ => return Err(err(&format!("unexpected trailer field `{kv}`"))),
                }
            }
            let (Some(outcome), Some(seed), Some(total)) = (outcome, seed, total) else {
                return Err(err("trailer needs outcome, seed and total_calls"));
            };
            if total != records.len() {
                return Err(err(&format!("total_calls={total} but {} records", records.len())));
            }
            traces.push(ExecutionTrace {
                records: std::mem::take(&mut records),
                outcome,
                seed,
            });
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let [key, implementation, flags] = fields[..] else {
            return Err(err("expected three tab-separated fields"));
        };
        let abstraction = key.parse().map_err(|e| err(&format!("{e}")))?;
        let arg_null = parse_bits(flags).ok_or_else(|| err("bad null bitstring"))?;
        records.push(CallRecord {
            abstraction,
            implementation: implementation.to_string(),
            arg_null,
        });
    }
    if !records.is_empty() {
        return Err(TraceParseError {
            line: text.lines().count(),
            message: "records after the last trailer".into(),
        });
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(outcome: Outcome) -> ExecutionTrace {
        ExecutionTrace {
            records: vec![
                CallRecord {
                    abstraction: "display(Window,Clock)".parse().unwrap(),
                    implementation: "Clock.display".into(),
                    arg_null: vec![false, true],
                },
                CallRecord {
                    abstraction: "tick(val)".parse().unwrap(),
                    implementation: "tick".into(),
                    arg_null: vec![],
                },
            ],
            outcome,
            seed: 7,
        }
    }

    #[test]
    fn layout() {
        assert_eq!(
            write_trace(&sample(Outcome::Completed)),
            "display(Window,Clock)\tClock.display\t01\ntick(val)\ttick\t\n# outcome=completed seed=7 total_calls=2\n"
        );
    }

    #[test]
    fn round_trip_all_outcomes() {
        let loc = Location {
            implementation: "Clock.display".into(),
            pos: Pos::new(3, 9),
        };
        let traces = [
            sample(Outcome::Completed),
            sample(Outcome::StepLimit),
            sample(Outcome::NullDerefFailure(loc.clone())),
            sample(Outcome::ExplicitFailure(loc)),
        ];
        let text: String = traces.iter().map(write_trace).collect();
        let back = read_traces(&text).unwrap();
        assert_eq!(back, traces);
        for (a, b) in back.iter().zip(&traces) {
            if let (Outcome::NullDerefFailure(x), Outcome::NullDerefFailure(y)) = (&a.outcome, &b.outcome) {
                assert_eq!((x.pos.line, x.pos.col), (y.pos.line, y.pos.col));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_traces("m(C)\tm\t0\n").is_err());
        assert!(read_traces("m(C)\tm\t2\n# outcome=completed seed=1 total_calls=1\n").is_err());
        assert!(read_traces("m(C)\tm\t0\n# outcome=completed seed=1 total_calls=2\n").is_err());
        assert!(read_traces("# outcome=exploded seed=1 total_calls=0\n").is_err());
    }
}
