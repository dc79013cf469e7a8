//! Timing verification for embedded MiniC programs.
//!
//! Source files carry `//@` comments that declare timers, give functions a
//! worst-case execution time, reset timers and assert bounds on them. The
//! [`instrument`] pass turns those into ordinary integer code, [`emit_c`]
//! prints it as C, and the [`verifier`] explores every bounded execution of
//! the result looking for a violated assertion.

pub mod emit;
pub mod frontend;
pub mod instrument;
pub mod pipeline;
pub mod scenarios;
pub mod timed_model;
pub mod verifier;

pub use emit::emit_c;
pub use frontend::{
    load_annotated, load_ast, AnnotatedProgram, Annotation, AnnotationKind, Ast, Diagnostic,
    FrontendError, LoadError, LoadOptions, Loc,
};
pub use instrument::{instrument, InstrumentError};
pub use timed_model::{
    apply_event, event_duration, path_duration, DurationMap, ExecutionPath, TimedEvent, TimerId,
    TimerValuation, TimerWidth,
};
pub use verifier::{
    explore, format_counterexample, lower, min_path_value, replay, Bounds, Counterexample,
    Exploration, Program, Verdict, VerdictReport, VerifyError,
};
pub use pipeline::{prepare, translate, verify_source, PipelineError, Translation, Verification, VerifyOptions};
pub use scenarios::{
    default_rates, gen_bridge, gen_oximeter, run_bridge, run_bridge_pair, run_matrix, BridgeReport, BridgeSpec,
    Comparison, ErrorModel, OximeterSpec, Rate, RunOptions, ScenarioError, ScenarioReport, Strategy,
};
