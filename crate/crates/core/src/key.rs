//! Method abstraction keys.
//!
//! An abstraction is identified by its name and the declared type names of
//! its parameters. Nullability qualifiers and the owning class are not part
//! of the key, so every implementation of `m(A,B)` shares one abstraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractionKey {
    pub name: String,
    /// One entry per parameter; value parameters are spelled [`Self::VALUE_TYPE`].
    pub param_types: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed abstraction key `{0}`")]
pub struct KeyParseError(pub String);

impl AbstractionKey {
    pub const VALUE_TYPE: &'static str = "val";

    pub fn new(name: impl Into<String>, param_types: Vec<String>) -> Self {
        AbstractionKey {
            name: name.into(),
            param_types,
        }
    }

    pub fn arity(&self) -> usize {
        self.param_types.len()
    }

    pub fn is_reference_position(&self, index: usize) -> bool {
        self.param_types.get(index).is_some_and(|t| t != Self::VALUE_TYPE)
    }

    pub fn reference_positions(&self) -> Vec<usize> {
        (0..self.arity()).filter(|&i| self.is_reference_position(i)).collect()
    }

    pub fn reference_count(&self) -> usize {
        self.reference_positions().len()
    }
}

impl fmt::Display for AbstractionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.param_types.join(","))
    }
}

impl FromStr for AbstractionKey {
    type Err = KeyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || KeyParseError(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(err)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(err)?;
        let name = &s[..open];
        let is_ident = |t: &str| {
            !t.is_empty()
                && t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && t.chars().all(|c| c.is_alphanumeric() || c == '_')
        };
        if !is_ident(name) {
            return Err(err());
        }
        let param_types: Vec<String> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|t| t.trim().to_string()).collect()
        };
        if !param_types.iter().all(|t| is_ident(t)) {
            return Err(err());
        }
        Ok(AbstractionKey::new(name, param_types))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_agree() {
        let key = AbstractionKey::new("display", vec!["Window".into(), "Clock".into()]);
        assert_eq!(key.to_string(), "display(Window,Clock)");
        assert_eq!("display(Window,Clock)".parse::<AbstractionKey>().unwrap(), key);
        let nullary: AbstractionKey = "main()".parse().unwrap();
        assert_eq!(nullary.arity(), 0);
    }

    #[test]
    fn value_positions_are_not_reference_positions() {
        let key: AbstractionKey = "m(C,val,D)".parse().unwrap();
        assert_eq!(key.reference_positions(), vec![0, 2]);
        assert_eq!(key.reference_count(), 2);
    }

    #[test]
    fn rejects_garbage() {
        assert!("m(".parse::<AbstractionKey>().is_err());
        assert!("(C)".parse::<AbstractionKey>().is_err());
        assert!("m(C,)".parse::<AbstractionKey>().is_err());
    }
}
