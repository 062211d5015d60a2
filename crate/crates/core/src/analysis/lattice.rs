use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// How strongly a method depends on a reference parameter being non-null.
///
/// Ordered as a chain, `NotLocallyRequired ⊑ PossiblyRequired ⊑
/// DefinitelyRequired`; the derived `Ord` follows the chain, so join is `max`
/// and meet is `min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NullabilityClass {
    /// The method never fails when the parameter is null.
    NotLocallyRequired,
    /// Some but not all executions fail when the parameter is null.
    PossiblyRequired,
    /// Every execution fails when the parameter is null.
    DefinitelyRequired,
}

impl NullabilityClass {
    pub const ALL: [NullabilityClass; 3] = [
        NullabilityClass::NotLocallyRequired,
        NullabilityClass::PossiblyRequired,
        NullabilityClass::DefinitelyRequired,
    ];

    pub fn join(self, other: Self) -> Self {
        self.max(other)
    }

    pub fn meet(self, other: Self) -> Self {
        self.min(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NullabilityClass::NotLocallyRequired => "not_locally_required",
            NullabilityClass::PossiblyRequired => "possibly_required",
            NullabilityClass::DefinitelyRequired => "definitely_required",
        }
    }
}

impl fmt::Display for NullabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NullabilityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NullabilityClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown nullability class `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn class() -> impl Strategy<Value = NullabilityClass> {
        prop::sample::select(NullabilityClass::ALL.to_vec())
    }

    #[test]
    fn chain_order() {
        use NullabilityClass::*;
        assert!(NotLocallyRequired < PossiblyRequired);
        assert!(PossiblyRequired < DefinitelyRequired);
        assert_eq!(NotLocallyRequired.join(DefinitelyRequired), DefinitelyRequired);
        assert_eq!(PossiblyRequired.meet(DefinitelyRequired), PossiblyRequired);
    }

    #[test]
    fn text_round_trip() {
        for c in NullabilityClass::ALL {
            assert_eq!(c.as_str().parse::<NullabilityClass>().unwrap(), c);
        }
        assert!("nope".parse::<NullabilityClass>().is_err());
    }

    proptest! {
        #[test]
        fn join_is_a_semilattice(a in class(), b in class(), c in class()) {
            prop_assert_eq!(a.join(b), b.join(a));
            prop_assert_eq!(a.join(b).join(c), a.join(b.join(c)));
            prop_assert_eq!(a.join(a), a);
            prop_assert!(a <= a.join(b));
        }
    }
}
