//! Report rendering.
//!
//! CSV: a cross-tab is `ref_params,required,count` with one row per
//! (column, row) pair of every non-empty column, including zero cells; a
//! project summary is `project,size,percentage` followed by `mean` and
//! `sample_stddev` rows with an empty size. Sections are separated by a
//! blank line.
//!
//! Text: a cross-tab is a grid of per-column percentages (columns =
//! reference-parameter count, rows = required count, plus an `all` column
//! over every method) closed by a totals row and the recombination and
//! optional shares. Percentages are rounded to integers only here.

use std::fmt::Write as _;

use super::crosstab::{optional_share, recombination_share, CrossTab, Fraction, ShareKind};
use super::stats::ProjectSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReportSection {
    CrossTab { title: String, tab: CrossTab },
    Projects(ProjectSummary),
}

pub fn emit_report(sections: &[ReportSection], format: ReportFormat) -> String {
    let parts: Vec<String> = sections
        .iter()
        .map(|s| match (s, format) {
            (ReportSection::CrossTab { tab, .. }, ReportFormat::Csv) => crosstab_csv(tab),
            (ReportSection::CrossTab { title, tab }, ReportFormat::Text) => crosstab_text(title, tab),
            (ReportSection::Projects(p), ReportFormat::Csv) => projects_csv(p),
            (ReportSection::Projects(p), ReportFormat::Text) => projects_text(p),
        })
        .collect();
    parts.join("\n")
}

fn percent(n: u64, d: u64) -> String {
    if d == 0 {
        "-".into()
    } else {
        format!("{}%", (100.0 * n as f64 / d as f64).round())
    }
}

fn crosstab_csv(t: &CrossTab) -> String {
    let mut out = String::from("ref_params,required,count\n");
    for &c in t.column_totals().keys() {
        for r in 0..=c {
            let _ = writeln!(out, "{c},{r},{}", t.cell(c, r));
        }
    }
    out
}

fn share_line(label: &str, f: Option<Fraction>) -> String {
    match f {
        Some(f) => format!("{label}: {f}\n"),
        None => format!("{label}: undefined\n"),
    }
}

fn crosstab_text(title: &str, t: &CrossTab) -> String {
    let mut out = format!("{title}\n");
    let columns: Vec<usize> = (1..=t.max_arity()).collect();
    let _ = write!(out, "{:<10}", "required");
    for c in &columns {
        let _ = write!(out, "{c:>7}");
    }
    let _ = writeln!(out, "{:>8}", "all");
    for r in 0..=t.max_arity() {
        let _ = write!(out, "{r:<10}");
        for &c in &columns {
            let cell = if r > c {
                String::new()
            } else {
                percent(t.cell(c, r), t.column_total(c))
            };
            let _ = write!(out, "{cell:>7}");
        }
        let row_total: u64 = columns.iter().map(|&c| t.cell(c, r)).sum();
        let _ = writeln!(out, "{:>8}", percent(row_total, t.grand_total()));
    }
    let _ = write!(out, "{:<10}", "total");
    for &c in &columns {
        let _ = write!(out, "{:>7}", t.column_total(c));
    }
    let _ = writeln!(out, "{:>8}", t.grand_total());
    out.push_str(&share_line(
        "single-parameter share",
        recombination_share(t, ShareKind::SingleParamShare),
    ));
    out.push_str(&share_line(
        "true recombination share",
        recombination_share(t, ShareKind::TrueRecombShare),
    ));
    out.push_str(&share_line(
        "all-required share (2+ parameters)",
        recombination_share(t, ShareKind::AllRequiredShare),
    ));
    out.push_str(&share_line("optional share", optional_share(t)));
    out
}

fn projects_csv(p: &ProjectSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["project", "size", "percentage"])
        .expect("in-memory write");
    for r in &p.rows {
        w.write_record([r.project.clone(), r.size.to_string(), r.percentage.to_string()])
            .expect("in-memory write");
    }
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    w.write_record(["mean".to_string(), String::new(), opt(p.mean)])
        .expect("in-memory write");
    w.write_record(["sample_stddev".to_string(), String::new(), opt(p.sample_stddev)])
        .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn projects_text(p: &ProjectSummary) -> String {
    let mut out = String::from("Projects: methods with two reference parameters, both required\n");
    let _ = writeln!(out, "{:<12}{:>8}{:>12}", "project", "size", "percentage");
    for r in &p.rows {
        let _ = writeln!(out, "{:<12}{:>8}{:>11}%", r.project, r.size, r.percentage.round());
    }
    match (p.mean, p.sample_stddev) {
        (Some(m), Some(s)) => {
            let _ = writeln!(
                out,
                "mean ± sample stddev: {}% ± {}% ({m:.1} ± {s:.1})",
                m.round(),
                s.round()
            );
        }
        (Some(m), None) => {
            let _ = writeln!(
                out,
                "mean: {}% ({m:.1}); stddev undefined for fewer than two projects",
                m.round()
            );
        }
        _ => out.push_str("no projects\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::stats::project_stats;
    use crate::report::tables;

    #[test]
    fn empty_crosstab_csv_is_header_only() {
        assert_eq!(
            emit_report(
                &[ReportSection::CrossTab {
                    title: "t".into(),
                    tab: CrossTab::new()
                }],
                ReportFormat::Csv
            ),
            "ref_params,required,count\n"
        );
    }

    #[test]
    fn csv_cells_in_column_row_order() {
        let mut t = CrossTab::new();
        t.add(2, 2, 3);
        t.add(1, 1, 1);
        let csv = emit_report(
            &[ReportSection::CrossTab {
                title: "t".into(),
                tab: t,
            }],
            ReportFormat::Csv,
        );
        assert_eq!(csv, "ref_params,required,count\n1,0,0\n1,1,1\n2,0,0\n2,1,0\n2,2,3\n");
    }

    #[test]
    fn dynamic_table_text() {
        let section = ReportSection::CrossTab {
            title: "Never-null parameters".into(),
            tab: tables::dynamic_never_null(),
        };
        let text = emit_report(std::slice::from_ref(&section), ReportFormat::Text);
        let totals = text.lines().find(|l| l.starts_with("total")).unwrap();
        let fields: Vec<&str> = totals.split_whitespace().skip(1).collect();
        assert_eq!(fields, ["126", "202", "63", "24", "10", "4", "1", "430"]);
        let row2 = text.lines().find(|l| l.starts_with("2 ")).unwrap();
        assert_eq!(
            row2.split_whitespace().collect::<Vec<_>>(),
            ["2", "91%", "0%", "0%", "0%", "0%", "0%", "43%"]
        );
        assert_eq!(text, emit_report(&[section], ReportFormat::Text));
    }

    #[test]
    fn projects_render() {
        let s = project_stats(tables::project_percentages());
        let text = emit_report(&[ReportSection::Projects(s.clone())], ReportFormat::Text);
        assert!(text.contains("mean ± sample stddev: 86% ± 16% (86.1 ± 16.3)"), "{text}");
        let csv = emit_report(&[ReportSection::Projects(s)], ReportFormat::Csv);
        assert!(csv.starts_with("project,size,percentage\n999,1,100\n"));
        assert!(csv.contains("\nsample_stddev,,16.28"));
    }
}
