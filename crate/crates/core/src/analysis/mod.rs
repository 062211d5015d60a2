//! Static classification of reference parameters.

mod fixpoint;
mod lattice;
pub mod oracle;
pub mod result_io;
mod summary;

pub use fixpoint::{
    abstraction_count, evaluate_transfer, fixpoint_analyze, solve, solve_in_order, summarize_program, Env, Solution,
    StaticResult,
};
pub use lattice::NullabilityClass;
pub use oracle::{oracle_classify, OracleError, OracleLimits};
pub use summary::{summarize_method, AnalysisOptions, MethodTransfer, ParamSummary, Path, PathEvent};
