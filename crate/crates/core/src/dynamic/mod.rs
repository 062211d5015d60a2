//! Seeded execution of MOL programs and the per-abstraction null profile.

mod interp;
mod profile;
mod rng;
mod trace_io;

pub use interp::{
    run_program, CallRecord, ExecutionTrace, Location, Outcome, RunOptions, RuntimeValue, Tracer, DEFAULT_STEP_LIMIT,
};
pub use profile::{
    aggregate_traces, profile_from_csv, profile_to_csv, AbstractionProfile, DynamicProfile, ProfileFormatError,
};
pub use rng::SplitMix64;
pub use trace_io::{read_traces, write_trace, TraceParseError};
