//! Nullability analysis workbench for MOL, a small object language whose
//! methods list every participant (including the would-be target) as an
//! explicit parameter.
//!
//! * [`ir`]: the language, its text format and validator.
//! * [`analysis`]: static classification of reference parameters as
//!   definitely / possibly / not-locally required, with a brute-force oracle.
//! * [`dynamic`]: a seeded interpreter that records null arguments per call,
//!   and the per-abstraction profile built from its traces.
//! * [`checker`]: faces, classifiers and the recombinant call model, with a
//!   conventional target-based comparator.
//! * [`report`]: cross-tabulations and summary statistics.
//! * [`corpus`]: fixture programs and a seeded corpus generator with ground
//!   truth.

pub mod analysis;
pub mod checker;
pub mod corpus;
pub mod diag;
pub mod dynamic;
pub mod ir;
pub mod key;
pub mod report;

pub use diag::{Diagnostic, Severity};
pub use key::AbstractionKey;
