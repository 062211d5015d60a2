//! Per-abstraction summary of call records.
//!
//! A reference position stays "never null" only while every call of the
//! abstraction, through any implementation, passed a non-null value there;
//! one null observation anywhere makes it nullable.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::interp::{CallRecord, ExecutionTrace};
use super::trace_io::{bits, parse_bits};
use crate::diag::Diagnostic;
use crate::ir::{Pos, Program, ProgramIndex};
use crate::key::AbstractionKey;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractionProfile {
    pub call_count: u64,
    /// One flag per reference parameter; `true` = never observed null.
    pub never_null: Vec<bool>,
    pub implementations_seen: BTreeSet<String>,
}

impl AbstractionProfile {
    fn new(ref_count: usize) -> Self {
        AbstractionProfile {
            call_count: 0,
            never_null: vec![true; ref_count],
            implementations_seen: BTreeSet::new(),
        }
    }

    fn absorb(&mut self, other: &AbstractionProfile) {
        self.call_count += other.call_count;
        for (mine, theirs) in self.never_null.iter_mut().zip(&other.never_null) {
            *mine &= *theirs;
        }
        self.implementations_seen
            .extend(other.implementations_seen.iter().cloned());
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicProfile {
    pub per_abstraction: BTreeMap<AbstractionKey, AbstractionProfile>,
}

impl DynamicProfile {
    /// Adds one record. The caller is responsible for the record matching
    /// its abstraction's shape; see [`aggregate_traces`] for the checked path.
    pub fn record(&mut self, r: &CallRecord) {
        let entry = self
            .per_abstraction
            .entry(r.abstraction.clone())
            .or_insert_with(|| AbstractionProfile::new(r.arg_null.len()));
        entry.call_count += 1;
        for (flag, &was_null) in entry.never_null.iter_mut().zip(&r.arg_null) {
            *flag &= !was_null;
        }
        if !entry.implementations_seen.contains(&r.implementation) {
            entry.implementations_seen.insert(r.implementation.clone());
        }
    }

    /// Commutative, associative merge of two profiles.
    pub fn merge(&mut self, other: &DynamicProfile) {
        for (k, v) in &other.per_abstraction {
            match self.per_abstraction.get_mut(k) {
                Some(mine) => mine.absorb(v),
                None => {
                    self.per_abstraction.insert(k.clone(), v.clone());
                }
            }
        }
    }
}

/// Folds traces of `p` into a profile. Records that name an abstraction or
/// implementation `p` does not have, or carry the wrong number of flags, are
/// reported and skipped.
pub fn aggregate_traces(traces: &[ExecutionTrace], p: &Program) -> (DynamicProfile, Vec<Diagnostic>) {
    let idx = ProgramIndex::new(p);
    let mut profile = DynamicProfile::default();
    let mut diags = Vec::new();
    let mut reported = BTreeSet::new();
    for t in traces {
        for r in &t.records {
            let problem = match idx.implementations.get(&r.abstraction) {
                None => Some(format!("abstraction {} is not declared", r.abstraction)),
                Some(impls)
                    if !impls
                        .iter()
                        .any(|&i| idx.methods[i].implementation_name() == r.implementation) =>
                {
                    Some(format!("{} does not implement {}", r.implementation, r.abstraction))
                }
                Some(_) if r.arg_null.len() != r.abstraction.reference_count() => Some(format!(
                    "{} has {} reference parameters but the record has {} flags",
                    r.abstraction,
                    r.abstraction.reference_count(),
                    r.arg_null.len()
                )),
                Some(_) => None,
            };
            match problem {
                Some(msg) => {
                    if reported.insert(msg.clone()) {
                        diags.push(Diagnostic::error(
                            "unknown-abstraction",
                            r.abstraction.to_string(),
                            Pos::new(0, 0),
                            msg,
                        ));
                    }
                }
                None => profile.record(r),
            }
        }
    }
    (profile, diags)
}

#[derive(Debug, Error)]
pub enum ProfileFormatError {
    #[error("profile row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    abstraction: String,
    ref_param_count: usize,
    call_count: u64,
    /// `1` = never observed null.
    never_null: String,
}

/// CSV with columns `abstraction,ref_param_count,call_count,never_null`;
/// `never_null` is a bitstring with `1` for never-null positions.
/// Implementation names are not part of the format.
pub fn profile_to_csv(profile: &DynamicProfile) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, v) in &profile.per_abstraction {
        w.serialize(ProfileRow {
            abstraction: k.to_string(),
            ref_param_count: v.never_null.len(),
            call_count: v.call_count,
            never_null: bits(&v.never_null),
        })
        .expect("in-memory write");
    }
    let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    if profile.per_abstraction.is_empty() {
        out = "abstraction,ref_param_count,call_count,never_null\n".into();
    }
    out
}

pub fn profile_from_csv(text: &str) -> Result<DynamicProfile, ProfileFormatError> {
    let mut profile = DynamicProfile::default();
    for (i, row) in csv::Reader::from_reader(text.as_bytes()).deserialize().enumerate() {
        let row: ProfileRow = row?;
        let bad = |message: String| ProfileFormatError::Malformed { row: i + 1, message };
        let key: AbstractionKey = row.abstraction.parse().map_err(|e| bad(format!("{e}")))?;
        let never_null = parse_bits(&row.never_null).ok_or_else(|| bad("bad never_null bitstring".into()))?;
        if never_null.len() != row.ref_param_count || never_null.len() != key.reference_count() {
            return Err(bad(format!(
                "{key}: flag count does not match its reference parameters"
            )));
        }
        profile.per_abstraction.insert(
            key,
            AbstractionProfile {
                call_count: row.call_count,
                never_null,
                implementations_seen: BTreeSet::new(),
            },
        );
    }
    Ok(profile)
}
