//! Methods tabulated by reference-parameter count (columns) and by how many
//! of those parameters are required (rows).

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis::{NullabilityClass, StaticResult};
use crate::dynamic::DynamicProfile;
use crate::key::AbstractionKey;

/// An exact ratio; rounding happens only when rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
}

impl Fraction {
    /// `None` for a zero denominator.
    pub fn new(numerator: u64, denominator: u64) -> Option<Self> {
        (denominator > 0).then_some(Fraction { numerator, denominator })
    }

    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn percent(self) -> f64 {
        100.0 * self.value()
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} = {:.1}%", self.numerator, self.denominator, self.percent())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossTab {
    /// (reference-parameter count, required count) → methods.
    cells: BTreeMap<(usize, usize), u64>,
    column_totals: BTreeMap<usize, u64>,
}

impl CrossTab {
    pub fn new() -> Self {
        CrossTab::default()
    }

    /// Adds `count` methods with `ref_params` reference parameters of which
    /// `required` are required. Methods without reference parameters are
    /// not tabulated.
    ///
    /// # Panics
    /// If `required > ref_params`.
    pub fn add(&mut self, ref_params: usize, required: usize, count: u64) {
        assert!(required <= ref_params, "{required} required of {ref_params} parameters");
        if ref_params == 0 || count == 0 {
            return;
        }
        *self.cells.entry((ref_params, required)).or_default() += count;
        *self.column_totals.entry(ref_params).or_default() += count;
    }

    pub fn cell(&self, ref_params: usize, required: usize) -> u64 {
        self.cells.get(&(ref_params, required)).copied().unwrap_or(0)
    }

    pub fn column_total(&self, ref_params: usize) -> u64 {
        self.column_totals.get(&ref_params).copied().unwrap_or(0)
    }

    pub fn column_totals(&self) -> &BTreeMap<usize, u64> {
        &self.column_totals
    }

    pub fn grand_total(&self) -> u64 {
        self.column_totals.values().sum()
    }

    pub fn max_arity(&self) -> usize {
        self.column_totals.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.column_totals.is_empty()
    }

    /// Non-zero cells ordered by (column, row).
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    /// The same table without columns wider than `max_ref_params`.
    pub fn restricted_to(&self, max_ref_params: usize) -> CrossTab {
        let mut t = CrossTab::new();
        for ((c, r), n) in self.cells() {
            if c <= max_ref_params {
                t.add(c, r, n);
            }
        }
        t
    }

    fn sum_where(&self, pred: impl Fn(usize, usize) -> bool) -> u64 {
        self.cells().filter(|&((c, r), _)| pred(c, r)).map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequiredLevel {
    /// Only definitely required parameters count as required.
    DefiniteOnly,
    /// Definitely or possibly required parameters count as required.
    DefiniteOrPossible,
}

impl RequiredLevel {
    fn admits(self, c: NullabilityClass) -> bool {
        match self {
            RequiredLevel::DefiniteOnly => c == NullabilityClass::DefinitelyRequired,
            RequiredLevel::DefiniteOrPossible => c >= NullabilityClass::PossiblyRequired,
        }
    }
}

/// One entry per abstraction classified in `r`, counting its reference
/// parameters and how many of them `level` treats as required.
pub fn build_static_crosstab(r: &StaticResult, level: RequiredLevel) -> CrossTab {
    let mut per_key: BTreeMap<&AbstractionKey, (usize, usize)> = BTreeMap::new();
    for ((key, _), &c) in &r.classes {
        let e = per_key.entry(key).or_default();
        e.0 += 1;
        e.1 += usize::from(level.admits(c));
    }
    let mut t = CrossTab::new();
    for (params, required) in per_key.into_values() {
        t.add(params, required, 1);
    }
    t
}

/// One entry per profiled abstraction; never-null positions count as required.
pub fn build_dynamic_crosstab(d: &DynamicProfile) -> CrossTab {
    let mut t = CrossTab::new();
    for v in d.per_abstraction.values() {
        t.add(v.never_null.len(), v.never_null.iter().filter(|&&b| b).count(), 1);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareKind {
    /// Methods with exactly one reference parameter, over all methods.
    SingleParamShare,
    /// Methods with at least two required reference parameters, over methods
    /// with at least two reference parameters.
    TrueRecombShare,
    /// Methods whose reference parameters (at least two) are all required,
    /// over methods with at least two reference parameters.
    AllRequiredShare,
}

pub fn recombination_share(t: &CrossTab, kind: ShareKind) -> Option<Fraction> {
    let multi = t.sum_where(|c, _| c >= 2);
    match kind {
        ShareKind::SingleParamShare => Fraction::new(t.column_total(1), t.grand_total()),
        ShareKind::TrueRecombShare => Fraction::new(t.sum_where(|c, r| c >= 2 && r >= 2), multi),
        ShareKind::AllRequiredShare => Fraction::new(t.sum_where(|c, r| c >= 2 && r == c), multi),
    }
}

/// Methods with at least one non-required reference parameter, over all methods.
pub fn optional_share(t: &CrossTab) -> Option<Fraction> {
    let all_required = t.sum_where(|c, r| c == r);
    Fraction::new(t.grand_total() - all_required, t.grand_total())
}
