//! Declared types, faces, the implementation registry and the call and
//! assignment rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ir::{Arg, MethodDecl, Nullability, Program, ProgramIndex};
use crate::key::AbstractionKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckMode {
    /// Any non-null participant may prove an abstraction available; proven
    /// abstractions pool across participants.
    Continuum,
    /// The first participant is the target; it alone proves availability,
    /// and the implementation must belong to its classifier's lineage.
    Conventional,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Continuum => "continuum",
            CheckMode::Conventional => "conventional",
        })
    }
}

/// Classifier and face of a reference declaration, plus its nullability.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeclType {
    pub classifier: String,
    pub face: String,
    pub nullability: Nullability,
}

impl DeclType {
    /// A single type name denotes both the classifier and the face.
    pub fn named(name: &str, nullability: Nullability) -> Self {
        DeclType {
            classifier: name.to_string(),
            face: name.to_string(),
            nullability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub name: String,
    pub signatures: BTreeSet<AbstractionKey>,
}

/// `sub` is a subtype of `sup` when it offers every signature of `sup`.
pub fn face_subtype(sub: &Face, sup: &Face) -> bool {
    sup.signatures.is_subset(&sub.signatures)
}

/// Every implementation known to the dispatcher, together with the
/// classifier hierarchy and faces needed to reason about them.
pub struct Registry<'p> {
    pub idx: ProgramIndex<'p>,
}

impl<'p> Registry<'p> {
    pub fn new(p: &'p Program) -> Self {
        Registry {
            idx: ProgramIndex::new(p),
        }
    }

    pub fn face(&self, name: &str) -> Face {
        Face {
            name: name.to_string(),
            signatures: self.idx.face(name),
        }
    }

    pub fn implementations(&self, key: &AbstractionKey) -> Vec<&'p MethodDecl> {
        self.idx
            .implementations
            .get(key)
            .map(|v| v.iter().map(|&i| self.idx.methods[i]).collect())
            .unwrap_or_default()
    }

    pub fn has_implementation(&self, key: &AbstractionKey) -> bool {
        self.idx.implementations.contains_key(key)
    }

    /// Whether some class whose classifier is `classifier` or one of its
    /// ancestors owns an implementation of `key`.
    pub fn owned_in_lineage(&self, key: &AbstractionKey, classifier: &str) -> bool {
        self.implementations(key).into_iter().any(|m| {
            self.idx
                .owner_classifier(m)
                .is_some_and(|c| self.idx.is_descendant_or_self(classifier, c))
        })
    }

    /// Abstractions an object of `classifier` provably supports through its
    /// own class lineage.
    pub fn lineage_keys(&self, classifier: &str) -> BTreeSet<AbstractionKey> {
        self.idx
            .abstraction_keys()
            .filter(|k| self.owned_in_lineage(k, classifier))
            .cloned()
            .collect()
    }

    /// An abstraction no face lists and no class implements is a plain
    /// procedure: calling it needs no participant's assurance.
    pub fn is_procedure(&self, key: &AbstractionKey) -> bool {
        self.has_implementation(key)
            && !self.idx.faces.values().any(|f| f.contains(key))
            && self.implementations(key).iter().all(|m| m.owner.is_none())
    }

    pub fn all_keys(&self) -> BTreeSet<AbstractionKey> {
        self.idx.abstraction_keys().cloned().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssurancePool {
    pub proven: BTreeSet<AbstractionKey>,
}

/// Union of the faces of the method's required reference parameters.
pub fn entry_pool(m: &MethodDecl, registry: &Registry<'_>) -> AssurancePool {
    let mut proven = BTreeSet::new();
    for p in m.params() {
        if let (Some(t), Some(Nullability::Required)) = (p.type_name(), p.nullability()) {
            proven.extend(registry.idx.face_signatures(t).cloned());
        }
    }
    AssurancePool { proven }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("no non-null participant proves {0} available")]
    NoAssurance(AbstractionKey),
    #[error("{0} is proven available but nothing implements it")]
    NoImplementation(AbstractionKey),
    #[error("{0} is not implemented by the target's class lineage")]
    WrongOwner(AbstractionKey),
    #[error("{0} may not hold null")]
    NullToRequired(String),
    #[error("{found} is not {expected} or a descendant of it")]
    ClassifierMismatch { expected: String, found: String },
    #[error("face {face} needs unproven {}", list(missing))]
    FaceUnproven {
        face: String,
        missing: BTreeSet<AbstractionKey>,
    },
}

fn list(keys: &BTreeSet<AbstractionKey>) -> String {
    keys.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl CheckError {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckError::NoAssurance(_) => "no-assurance",
            CheckError::NoImplementation(_) => "no-implementation",
            CheckError::WrongOwner(_) => "wrong-owner",
            CheckError::NullToRequired(_) => "null-to-required",
            CheckError::ClassifierMismatch { .. } => "classifier-mismatch",
            CheckError::FaceUnproven { .. } => "face-unproven",
        }
    }
}

/// What the checker knows about the variables in scope at a statement.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub types: BTreeMap<String, DeclType>,
    pub known_non_null: BTreeSet<String>,
}

impl Scope {
    /// Declared type of `v` if it is a typed, provably non-null reference.
    pub fn non_null_type(&self, v: &str) -> Option<&DeclType> {
        let t = self.types.get(v)?;
        (t.nullability == Nullability::Required || self.known_non_null.contains(v)).then_some(t)
    }
}

pub fn check_call(
    pool: &AssurancePool,
    key: &AbstractionKey,
    args: &[Arg],
    mode: CheckMode,
    registry: &Registry<'_>,
    scope: &Scope,
) -> Result<(), CheckError> {
    if registry.is_procedure(key) {
        return Ok(());
    }
    let non_null_arg = |a: &Arg| match a {
        Arg::Var(v) => scope.non_null_type(v),
        Arg::Null => None,
    };
    match mode {
        CheckMode::Continuum => {
            let proven = pool.proven.contains(key)
                || args
                    .iter()
                    .filter_map(non_null_arg)
                    .any(|t| registry.idx.face_contains(&t.face, key));
            if !proven {
                Err(CheckError::NoAssurance(key.clone()))
            } else if !registry.has_implementation(key) {
                Err(CheckError::NoImplementation(key.clone()))
            } else {
                Ok(())
            }
        }
        CheckMode::Conventional => {
            let target = args
                .first()
                .and_then(non_null_arg)
                .filter(|t| registry.idx.face_contains(&t.face, key))
                .ok_or_else(|| CheckError::NoAssurance(key.clone()))?;
            if !registry.has_implementation(key) {
                Err(CheckError::NoImplementation(key.clone()))
            } else if !registry.owned_in_lineage(key, &target.classifier) {
                Err(CheckError::WrongOwner(key.clone()))
            } else {
                Ok(())
            }
        }
    }
}

/// Right-hand side of an assignment as seen by the checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceInfo {
    NullLiteral,
    Value {
        /// `None` when the source's classifier is unknown (`opaque`).
        classifier: Option<String>,
        proven: BTreeSet<AbstractionKey>,
        nullable: bool,
    },
}

pub fn check_assignment(
    target_name: &str,
    target: &DeclType,
    source: &SourceInfo,
    registry: &Registry<'_>,
) -> Result<(), CheckError> {
    let (classifier, proven, nullable) = match source {
        SourceInfo::NullLiteral => {
            return match target.nullability {
                Nullability::Optional => Ok(()),
                Nullability::Required => Err(CheckError::NullToRequired(target_name.to_string())),
            }
        }
        SourceInfo::Value {
            classifier,
            proven,
            nullable,
        } => (classifier, proven, *nullable),
    };
    if nullable && target.nullability == Nullability::Required {
        return Err(CheckError::NullToRequired(target_name.to_string()));
    }
    match classifier {
        Some(c) if registry.idx.is_descendant_or_self(c, &target.classifier) => {}
        other => {
            return Err(CheckError::ClassifierMismatch {
                expected: target.classifier.clone(),
                found: other.clone().unwrap_or_else(|| "an unknown classifier".into()),
            })
        }
    }
    let missing: BTreeSet<AbstractionKey> = registry
        .idx
        .face_signatures(&target.face)
        .filter(|k| !proven.contains(k))
        .cloned()
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CheckError::FaceUnproven {
            face: target.face.clone(),
            missing,
        })
    }
}
