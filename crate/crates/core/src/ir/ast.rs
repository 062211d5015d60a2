//! Syntax tree for MOL programs.
//!
//! Source positions ride along on statements and declarations so that
//! diagnostics can point at them, but they are not part of a node's
//! structural identity: two trees that differ only in positions compare
//! equal.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::key::AbstractionKey;

/// 1-based line/column of a token in the source text.
#[derive(Debug, Clone, Copy, Default, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

// Positions never participate in structural equality.
impl PartialEq for Pos {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Hash for Pos {
    fn hash<H: Hasher>(&self, _state: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nullability {
    Required,
    Optional,
}

impl Nullability {
    pub fn keyword(self) -> &'static str {
        match self {
            Nullability::Required => "req",
            Nullability::Optional => "opt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamType {
    /// A reference parameter. The single type name names both the classifier
    /// and (when one is declared under that name) the face.
    Reference {
        type_name: String,
        nullability: Nullability,
    },
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub ty: ParamType,
}

impl Param {
    pub fn is_reference(&self) -> bool {
        matches!(self.ty, ParamType::Reference { .. })
    }

    pub fn type_name(&self) -> Option<&str> {
        match &self.ty {
            ParamType::Reference { type_name, .. } => Some(type_name),
            ParamType::Value => None,
        }
    }

    pub fn nullability(&self) -> Option<Nullability> {
        match &self.ty {
            ParamType::Reference { nullability, .. } => Some(*nullability),
            ParamType::Value => None,
        }
    }
}

/// A method name together with its explicit parameter list. There is no
/// implicit target: every participant is an ordinary parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSignature {
    pub name: String,
    pub params: Vec<Param>,
}

impl MethodSignature {
    pub fn key(&self) -> AbstractionKey {
        AbstractionKey::new(
            self.name.clone(),
            self.params
                .iter()
                .map(|p| match &p.ty {
                    ParamType::Reference { type_name, .. } => type_name.clone(),
                    ParamType::Value => AbstractionKey::VALUE_TYPE.to_string(),
                })
                .collect(),
        )
    }

    pub fn reference_positions(&self) -> Vec<usize> {
        self.params
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_reference())
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassifierDecl {
    pub name: String,
    pub parents: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaceDecl {
    pub name: String,
    pub signatures: Vec<MethodSignature>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldDecl {
    pub name: String,
    pub type_name: String,
    pub nullability: Nullability,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassDecl {
    pub name: String,
    pub classifier: String,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDecl {
    /// Owning class; `None` for free-standing (static-style) methods.
    pub owner: Option<String>,
    pub signature: MethodSignature,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

impl MethodDecl {
    pub fn name(&self) -> &str {
        &self.signature.name
    }

    pub fn params(&self) -> &[Param] {
        &self.signature.params
    }

    pub fn key(&self) -> AbstractionKey {
        self.signature.key()
    }

    /// Owner-qualified implementation name, e.g. `Clock.display` or `setColor`.
    pub fn implementation_name(&self) -> String {
        match &self.owner {
            Some(owner) => format!("{owner}.{}", self.signature.name),
            None => self.signature.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    Var(String),
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Null,
    New(String),
    Var(String),
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cond {
    IsNull(String),
    NotNull(String),
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Deref(String),
    Call {
        callee: String,
        args: Vec<Arg>,
    },
    Assign {
        target: String,
        value: Expr,
    },
    If {
        cond: Cond,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Cond,
        body: Vec<Stmt>,
    },
    Return,
    Fail,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            kind,
            pos: Pos::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Classifier(ClassifierDecl),
    Face(FaceDecl),
    Class(ClassDecl),
    Method(MethodDecl),
}

/// A whole MOL program. Items are kept in source order so that printing
/// and "declaration order" are well defined.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub items: Vec<Item>,
}

impl Program {
    pub fn classifiers(&self) -> impl Iterator<Item = &ClassifierDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Classifier(c) => Some(c),
            _ => None,
        })
    }

    pub fn faces(&self) -> impl Iterator<Item = &FaceDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Face(f) => Some(f),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Class(c) => Some(c),
            _ => None,
        })
    }

    /// Every method, class-owned or free-standing, in declaration order.
    pub fn methods(&self) -> impl Iterator<Item = &MethodDecl> {
        self.items
            .iter()
            .flat_map(|i| -> Box<dyn Iterator<Item = &MethodDecl>> {
                match i {
                    Item::Class(c) => Box::new(c.methods.iter()),
                    Item::Method(m) => Box::new(std::iter::once(m)),
                    _ => Box::new(std::iter::empty()),
                }
            })
    }

    /// Free-standing methods without parameters; these are the programs'
    /// entry points.
    pub fn entry_points(&self) -> Vec<String> {
        self.methods()
            .filter(|m| m.owner.is_none() && m.params().is_empty())
            .map(|m| m.name().to_string())
            .collect()
    }

    pub fn find_method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods().find(|m| m.name() == name)
    }
}
