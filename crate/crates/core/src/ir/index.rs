//! Name resolution tables over a parsed program: classifier ancestry, face
//! signature sets, abstraction → implementation lists, call resolution and
//! the dispatch rule shared by the interpreter and the oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::ast::*;
use crate::key::AbstractionKey;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveError {
    Unknown(String),
    Arity {
        name: String,
        found: usize,
        expected: Vec<usize>,
    },
    Ambiguous {
        name: String,
        candidates: Vec<AbstractionKey>,
    },
}

impl std::fmt::Display for ResolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolveError::Unknown(n) => write!(f, "unresolved method `{n}`"),
            ResolveError::Arity { name, found, expected } => {
                let exp: Vec<String> = expected.iter().map(|e| e.to_string()).collect();
                write!(
                    f,
                    "arity mismatch at call {name}(...): {found} argument(s), expected {}",
                    exp.join(" or ")
                )
            }
            ResolveError::Ambiguous { name, candidates } => {
                let c: Vec<String> = candidates.iter().map(|k| k.to_string()).collect();
                write!(f, "ambiguous call {name}(...): candidates {}", c.join(", "))
            }
        }
    }
}

#[derive(Debug)]
pub struct ProgramIndex<'p> {
    pub program: &'p Program,
    /// Every method in declaration order.
    pub methods: Vec<&'p MethodDecl>,
    pub parents: BTreeMap<&'p str, Vec<&'p str>>,
    pub faces: BTreeMap<&'p str, BTreeSet<AbstractionKey>>,
    pub class_classifier: BTreeMap<&'p str, &'p str>,
    /// Abstraction → indices into `methods`, in declaration order.
    pub implementations: BTreeMap<AbstractionKey, Vec<usize>>,
    by_name: HashMap<&'p str, BTreeMap<usize, Vec<AbstractionKey>>>,
}

impl<'p> ProgramIndex<'p> {
    pub fn new(program: &'p Program) -> Self {
        let methods: Vec<&MethodDecl> = program.methods().collect();
        let mut parents = BTreeMap::new();
        for c in program.classifiers() {
            parents
                .entry(c.name.as_str())
                .or_insert_with(Vec::new)
                .extend(c.parents.iter().map(String::as_str));
        }
        let mut faces: BTreeMap<&str, BTreeSet<AbstractionKey>> = BTreeMap::new();
        for f in program.faces() {
            faces
                .entry(f.name.as_str())
                .or_default()
                .extend(f.signatures.iter().map(MethodSignature::key));
        }
        let class_classifier = program
            .classes()
            .map(|c| (c.name.as_str(), c.classifier.as_str()))
            .collect();
        let mut implementations: BTreeMap<AbstractionKey, Vec<usize>> = BTreeMap::new();
        let mut by_name: HashMap<&str, BTreeMap<usize, Vec<AbstractionKey>>> = HashMap::new();
        for (i, m) in methods.iter().enumerate() {
            let key = m.key();
            let slot = by_name.entry(m.name()).or_default().entry(key.arity()).or_default();
            if !slot.contains(&key) {
                slot.push(key.clone());
            }
            implementations.entry(key).or_default().push(i);
        }
        ProgramIndex {
            program,
            methods,
            parents,
            faces,
            class_classifier,
            implementations,
            by_name,
        }
    }

    pub fn is_classifier(&self, name: &str) -> bool {
        self.parents.contains_key(name)
    }

    /// Distance from `sub` up to `sup` in the classifier DAG (0 when equal),
    /// or `None` when `sup` is not an ancestor of `sub`.
    pub fn ancestor_distance(&self, sub: &str, sup: &str) -> Option<usize> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(sub, 0usize)]);
        while let Some((c, d)) = queue.pop_front() {
            if c == sup {
                return Some(d);
            }
            if !seen.insert(c) {
                continue;
            }
            for p in self.parents.get(c).into_iter().flatten() {
                queue.push_back((p, d + 1));
            }
        }
        None
    }

    pub fn is_descendant_or_self(&self, sub: &str, sup: &str) -> bool {
        self.ancestor_distance(sub, sup).is_some()
    }

    /// Signatures of the face named `name`; an undeclared face is empty.
    pub fn face(&self, name: &str) -> BTreeSet<AbstractionKey> {
        self.faces.get(name).cloned().unwrap_or_default()
    }

    /// Borrowing form of [`face`](Self::face).
    pub fn face_signatures(&self, name: &str) -> impl Iterator<Item = &AbstractionKey> {
        self.faces.get(name).into_iter().flatten()
    }

    pub fn face_contains(&self, name: &str, key: &AbstractionKey) -> bool {
        self.faces.get(name).is_some_and(|f| f.contains(key))
    }

    pub fn resolve_call(&self, name: &str, arity: usize) -> Result<&AbstractionKey, ResolveError> {
        let Some(by_arity) = self.by_name.get(name) else {
            return Err(ResolveError::Unknown(name.to_string()));
        };
        match by_arity.get(&arity) {
            Some(keys) if keys.len() == 1 => Ok(&keys[0]),
            Some(keys) => Err(ResolveError::Ambiguous {
                name: name.to_string(),
                candidates: keys.clone(),
            }),
            None => Err(ResolveError::Arity {
                name: name.to_string(),
                found: arity,
                expected: by_arity.keys().copied().collect(),
            }),
        }
    }

    pub fn abstraction_keys(&self) -> impl Iterator<Item = &AbstractionKey> {
        self.implementations.keys()
    }

    /// Abstractions in order of their first implementation's declaration.
    pub fn abstractions_in_declaration_order(&self) -> Vec<&AbstractionKey> {
        let mut keys: Vec<&AbstractionKey> = self.implementations.keys().collect();
        keys.sort_by_key(|k| self.implementations[*k][0]);
        keys
    }

    pub fn owner_classifier(&self, m: &MethodDecl) -> Option<&'p str> {
        m.owner.as_deref().and_then(|o| self.class_classifier.get(o).copied())
    }

    /// Selects the implementation of `key` to run when the first argument's
    /// runtime classifier is `first_arg`.
    ///
    /// Class-owned implementations whose classifier is the argument's
    /// classifier or one of its ancestors are candidates; the nearest one
    /// wins, with declaration order breaking ties. Without a candidate a
    /// free-standing implementation is used, and failing that the first
    /// declared one.
    pub fn dispatch(&self, key: &AbstractionKey, first_arg: Option<&str>) -> Option<usize> {
        let impls = self.implementations.get(key)?;
        if let Some(arg) = first_arg {
            let best = impls
                .iter()
                .filter_map(|&i| {
                    let cls = self.owner_classifier(self.methods[i])?;
                    self.ancestor_distance(arg, cls).map(|d| (d, i))
                })
                .min();
            if let Some((_, i)) = best {
                return Some(i);
            }
        }
        impls
            .iter()
            .copied()
            .find(|&i| self.methods[i].owner.is_none())
            .or_else(|| impls.first().copied())
    }

    /// Pairs of class-owned implementations of one abstraction that share a
    /// classifier, where dispatch falls back to declaration order.
    pub fn dispatch_ties(&self) -> Vec<(AbstractionKey, usize, usize)> {
        let mut ties = Vec::new();
        for (key, impls) in &self.implementations {
            for (a_pos, &a) in impls.iter().enumerate() {
                for &b in &impls[a_pos + 1..] {
                    let ca = self.owner_classifier(self.methods[a]);
                    let cb = self.owner_classifier(self.methods[b]);
                    if ca.is_some() && ca == cb {
                        ties.push((key.clone(), a, b));
                    }
                }
            }
        }
        ties
    }
}
