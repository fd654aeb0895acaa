//! Boolean encodings of programs: bit-blasting, trace formulas,
//! selector-augmented MAX-SAT instances and WCNF serialization.

pub mod circuit;
pub mod instance;
pub mod symbolic;
pub mod trace;
pub mod wcnf;

use thiserror::Error;

use crate::exec::InputError;

pub use circuit::{bv_value, Bv, Circuit};
pub(crate) use instance::decode_inputs;
pub use instance::{assign_loop_weights, build_instance, ClauseGroup, MaxSatInstance, SoftUnit, SourceLoc};
pub use symbolic::{encode_program, Check, CheckKind, GroupKey, Granularity, InputBits, ProgramEncoding, Selectors};
pub use trace::{build_trace_formula, build_trace_formula_with, StepBits, TraceFormula};
pub use wcnf::{export_wcnf, import_wcnf, WcnfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("the test does not fail the given assertion")]
    NotAFailingTest,
    #[error("trace is disconnected at step {step}")]
    DisconnectedTrace { step: usize },
    #[error("instance was not built at iteration granularity")]
    Granularity,
    #[error(transparent)]
    Input(#[from] InputError),
}
