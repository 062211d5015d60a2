//! Cross-tabulations, headline shares and per-project statistics.

mod crosstab;
mod emit;
mod stats;
pub mod tables;

pub use crosstab::{
    build_dynamic_crosstab, build_static_crosstab, optional_share, recombination_share, CrossTab, Fraction,
    RequiredLevel, ShareKind,
};
pub use emit::{emit_report, ReportFormat, ReportSection};
pub use stats::{project_of, project_rows, project_stats, ProjectRow, ProjectSummary};
