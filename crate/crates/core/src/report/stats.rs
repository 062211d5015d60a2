//! Per-project summary: unweighted mean and sample standard deviation of
//! per-project percentages.

use std::collections::BTreeMap;

use crate::dynamic::DynamicProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectRow {
    pub project: String,
    pub size: u64,
    /// Percentage in [0, 100].
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectSummary {
    pub rows: Vec<ProjectRow>,
    /// `None` without any project.
    pub mean: Option<f64>,
    /// Sample (n − 1) standard deviation; `None` with fewer than two projects.
    pub sample_stddev: Option<f64>,
}

/// Welford's single-pass mean and variance.
pub fn project_stats(rows: Vec<ProjectRow>) -> ProjectSummary {
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for r in &rows {
        n += 1.0;
        let delta = r.percentage - mean;
        mean += delta / n;
        m2 += delta * (r.percentage - mean);
    }
    ProjectSummary {
        mean: (n > 0.0).then_some(mean),
        sample_stddev: (n > 1.0).then(|| (m2 / (n - 1.0)).sqrt()),
        rows,
    }
}

/// Project label of a method name: the part before the first `__`, or
/// `default` without one.
pub fn project_of(method_name: &str) -> &str {
    method_name.split_once("__").map_or("default", |(p, _)| p)
}

/// Per project, the share of two-reference-parameter abstractions whose
/// parameters were both never null. Projects without such abstractions are
/// left out.
pub fn project_rows(d: &DynamicProfile) -> Vec<ProjectRow> {
    let mut by_project: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for (k, v) in &d.per_abstraction {
        if v.never_null.len() != 2 {
            continue;
        }
        let e = by_project.entry(project_of(&k.name)).or_default();
        e.0 += 1;
        e.1 += u64::from(v.never_null.iter().all(|&b| b));
    }
    by_project
        .into_iter()
        .map(|(p, (size, both))| ProjectRow {
            project: p.to_string(),
            size,
            percentage: 100.0 * both as f64 / size as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(ps: &[f64]) -> Vec<ProjectRow> {
        ps.iter()
            .enumerate()
            .map(|(i, &p)| ProjectRow {
                project: format!("p{i}"),
                size: 1,
                percentage: p,
            })
            .collect()
    }

    #[test]
    fn small_cases() {
        let s = project_stats(rows(&[50.0, 50.0]));
        assert_eq!((s.mean, s.sample_stddev), (Some(50.0), Some(0.0)));
        let s = project_stats(rows(&[0.0, 100.0]));
        assert_eq!(s.mean, Some(50.0));
        assert!((s.sample_stddev.unwrap() - 5000f64.sqrt()).abs() < 1e-12);
        let s = project_stats(rows(&[42.0]));
        assert_eq!((s.mean, s.sample_stddev), (Some(42.0), None));
        assert_eq!(project_stats(vec![]).mean, None);
    }

    #[test]
    fn project_labels() {
        assert_eq!(project_of("pr3__m0042"), "pr3");
        assert_eq!(project_of("display"), "default");
    }

    fn two_pass(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(0.0f64..=100.0, 2..40)) {
            let s = project_stats(rows(&xs));
            let (mean, sd) = two_pass(&xs);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
            prop_assert!(close(s.mean.unwrap(), mean));
            prop_assert!(close(s.sample_stddev.unwrap(), sd));
        }
    }
}
