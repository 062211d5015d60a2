//! Reference tables reconstructed from published aggregate figures.
//!
//! Only column totals and a few printed percentages are available, so cell
//! counts are rebuilt as `round(percentage × column total)`, with the
//! remainder of each column in row 1. Rows `0` and `1` are folded together
//! (row 1) because the source does not separate them.

use super::crosstab::CrossTab;
use super::stats::ProjectRow;

/// A column: arity, total, and the placed (required, count) cells.
type Column<'a> = (usize, u64, &'a [(usize, u64)]);

fn table(columns: &[Column<'_>]) -> CrossTab {
    let mut t = CrossTab::new();
    for &(arity, total, cells) in columns {
        let placed: u64 = cells.iter().map(|&(_, n)| n).sum();
        t.add(arity, 1.min(arity), total - placed);
        for &(required, n) in cells {
            t.add(arity, required, n);
        }
    }
    t
}

/// Static sample, definitely required parameters
/// (column totals 1969/920/397/168/44/16/4).
pub fn static_definite() -> CrossTab {
    table(&[
        (1, 1969, &[]),
        (2, 920, &[(2, 193)]),
        (3, 397, &[(2, 95), (3, 8)]),
        (4, 168, &[(2, 40), (3, 5)]),
        (5, 44, &[(2, 7), (3, 1)]),
        (6, 16, &[(2, 2), (6, 1)]),
        (7, 4, &[]),
    ])
}

/// Static sample, definitely or possibly required parameters.
pub fn static_possible() -> CrossTab {
    table(&[
        (1, 1969, &[]),
        (2, 920, &[(2, 221)]),
        (3, 397, &[(2, 95), (3, 16)]),
        (4, 168, &[(2, 40), (3, 7), (4, 2)]),
        (5, 44, &[(2, 9), (3, 1)]),
        (6, 16, &[(2, 2), (6, 1)]),
        (7, 4, &[]),
    ])
}

/// Dynamic profile: never-null parameters per method, column totals
/// 126/202/63/24/10/4/1 with all-required counts 126/184/59/24/9/2/0; the
/// rest of each column is in row 1.
///
/// The columns sum to 430, while the published summary row (429 methods,
/// 404 all-required, 5.8% optional) matches columns 1–6 alone; use
/// [`CrossTab::restricted_to`]`(6)` to reproduce that row.
pub fn dynamic_never_null() -> CrossTab {
    let mut t = CrossTab::new();
    for (c, r, n) in [
        (1, 1, 126),
        (2, 1, 18),
        (2, 2, 184),
        (3, 1, 4),
        (3, 3, 59),
        (4, 4, 24),
        (5, 1, 1),
        (5, 5, 9),
        (6, 1, 2),
        (6, 6, 2),
        (7, 1, 1),
    ] {
        t.add(c, r, n);
    }
    t
}

/// Per-project share of two-parameter methods with both parameters never null.
pub fn project_percentages() -> Vec<ProjectRow> {
    [
        ("999", 1, 100.0),
        ("201", 12, 60.0),
        ("209", 12, 100.0),
        ("200", 15, 67.0),
        ("202", 93, 98.0),
        ("228", 110, 89.0),
        ("213", 167, 89.0),
    ]
    .into_iter()
    .map(|(project, size, percentage)| ProjectRow {
        project: project.to_string(),
        size,
        percentage,
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_totals_and_conservation() {
        for t in [static_definite(), static_possible()] {
            let totals: Vec<u64> = t.column_totals().values().copied().collect();
            assert_eq!(totals, [1969, 920, 397, 168, 44, 16, 4]);
            assert_eq!(t.grand_total(), 3518);
        }
        let d = dynamic_never_null();
        let totals: Vec<u64> = d.column_totals().values().copied().collect();
        assert_eq!(totals, [126, 202, 63, 24, 10, 4, 1]);
        let all_required: Vec<u64> = (1..=7).map(|c| d.cell(c, c)).collect();
        assert_eq!(all_required, [126, 184, 59, 24, 9, 2, 0]);
        assert_eq!(d.restricted_to(6).grand_total(), 429);
    }

    #[test]
    fn possible_dominates_definite_rowwise() {
        let (d, p) = (static_definite(), static_possible());
        for c in 1..=7 {
            let at_least = |t: &CrossTab, k: usize| (k..=c).map(|r| t.cell(c, r)).sum::<u64>();
            for k in 0..=c {
                assert!(at_least(&p, k) >= at_least(&d, k), "column {c}, ≥{k}");
            }
        }
    }
}
