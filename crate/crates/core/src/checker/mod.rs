//! Faces, classifiers and the recombinant call model.
//!
//! In continuum mode every non-null participant of a call may prove the
//! callee available, and what one participant proves is pooled for the
//! rest of the method. Conventional mode is the target-based comparator:
//! only the first participant counts, and the implementation must belong to
//! its classifier lineage. Every call or assignment conventional mode
//! accepts, continuum mode accepts too.

mod model;
mod program;

pub use model::{
    check_assignment, check_call, entry_pool, face_subtype, AssurancePool, CheckError, CheckMode, DeclType, Face,
    Registry, Scope, SourceInfo,
};
pub use program::check_program;
