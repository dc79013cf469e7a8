//! Bounded verification of instrumented programs.
//!
//! [`lower`] turns an instrumented [`Ast`](crate::Ast) into a [`Program`];
//! [`explore`] enumerates its executions and returns a [`Verdict`].

mod explore;
pub mod interp;
pub mod lower;

use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::frontend::source::Loc;
use crate::timed_model::{TimedEvent, TimerWidth};

pub use explore::{counterexample, explore, min_path_value, replay, Exploration, Replay};
pub use interp::{Interp, InterpreterState, Step, Stop};
pub use lower::{lower, Program};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    /// Iterations allowed per loop entry.
    pub unwind: u64,
    /// Largest domain a single `nondet_int` may have.
    pub nondet_width: u64,
    /// Completed paths allowed before giving up.
    pub max_paths: u64,
    pub max_depth: usize,
    pub timer_width: TimerWidth,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            unwind: 128,
            nondet_width: 1024,
            max_paths: 10_000_000,
            max_depth: 64,
            timer_width: TimerWidth::W64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Unwind,
    NondetWidth,
    CallDepth,
    MaxPaths,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Unwind => "unwind",
            Resource::NondetWidth => "nondet_width",
            Resource::CallDepth => "call_depth",
            Resource::MaxPaths => "max_paths",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundLocation {
    pub file: String,
    pub line: u32,
    pub function: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolatedProperty {
    pub file: String,
    pub line: u32,
    pub function: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimerValue {
    pub name: String,
    pub value: u64,
}

/// One state of a counterexample: s₀, then one per timed event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSnapshot {
    pub index: usize,
    pub function: String,
    pub line: u32,
    /// The event that produced this state; `None` for s₀.
    pub event: Option<TimedEvent>,
    pub timers: Vec<TimerValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub states: Vec<StateSnapshot>,
    pub violated: ViolatedProperty,
    pub nondet_choices: Vec<i64>,
}

impl Counterexample {
    pub fn final_timer(&self, name: &str) -> Option<u64> {
        self.states
            .last()?
            .timers
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuntimeFault {
    pub file: String,
    pub line: u32,
    pub function: String,
    pub message: String,
    pub nondet_choices: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Successful,
    Failed(Counterexample),
    BoundExceeded {
        resource: Resource,
        location: Option<BoundLocation>,
    },
    /// Array index out of bounds, division by zero, timer overflow.
    Fault(RuntimeFault),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Successful => "successful",
            Verdict::Failed(_) => "failed",
            Verdict::BoundExceeded { .. } => "bound_exceeded",
            Verdict::Fault(_) => "runtime_fault",
        }
    }

    pub fn status_line(&self) -> &'static str {
        match self {
            Verdict::Successful => "VERIFICATION SUCCESSFUL",
            Verdict::Failed(_) | Verdict::Fault(_) => "VERIFICATION FAILED",
            Verdict::BoundExceeded { .. } => "VERIFICATION BOUND EXCEEDED",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Successful => 0,
            Verdict::Failed(_) | Verdict::Fault(_) => 1,
            Verdict::BoundExceeded { .. } => 3,
        }
    }

    pub fn is_successful(&self) -> bool {
        matches!(self, Verdict::Successful)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Failed(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Successful => f.write_str("successful"),
            Verdict::Failed(c) => write!(
                f,
                "assertion `{}` violated at {} line {}",
                c.violated.expr, c.violated.file, c.violated.line
            ),
            Verdict::BoundExceeded {
                resource,
                location: Some(l),
            } => write!(f, "{resource} bound exceeded at {} line {}", l.file, l.line),
            Verdict::BoundExceeded {
                resource,
                location: None,
            } => write!(f, "{resource} bound exceeded"),
            Verdict::Fault(x) => write!(f, "{} at {} line {}", x.message, x.file, x.line),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{loc}: {message}")]
    Lower { loc: Loc, message: String },
    #[error("counterexample replay failed: {0}")]
    Replay(String),
    #[error("cannot start workers: {0}")]
    Workers(String),
    #[error("unknown timer `{0}`")]
    UnknownTimer(String),
    #[error("no path runs to completion")]
    NoCompletePath,
    #[error("exploration stopped: {0}")]
    Aborted(Box<Verdict>),
}

impl VerifyError {
    pub fn loc(&self) -> Option<Loc> {
        match self {
            VerifyError::Lower { loc, .. } => Some(*loc),
            _ => None,
        }
    }
}

/// Text report in the style of a bounded model checker's error trace.
pub fn format_counterexample(c: &Counterexample) -> String {
    let mut out = String::from("Counterexample:\n");
    for s in &c.states {
        let _ = writeln!(
            out,
            "\nState {} file {} line {} function {}",
            s.index, c.violated.file, s.line, s.function
        );
        if let Some(e) = &s.event {
            let _ = writeln!(out, "  {e}");
        }
        out.push_str("----------------------------------------------------\n");
        if s.timers.is_empty() {
            out.push_str("  (no timers)\n");
        }
        for t in &s.timers {
            let _ = writeln!(out, "  {} = {}", t.name, t.value);
        }
    }
    let choices: Vec<String> = c.nondet_choices.iter().map(i64::to_string).collect();
    let _ = writeln!(out, "\nNondet choices: [{}]", choices.join(", "));
    let v = &c.violated;
    let _ = write!(
        out,
        "\nViolated property:\n  file {} line {} function {}\n  assertion\n  {}\n",
        v.file, v.line, v.function, v.expr
    );
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyRef {
    pub file: String,
    pub line: Option<u32>,
    pub expr: String,
}

/// Machine-readable verdict; field names are fixed by the JSON schema in
/// `docs/verdict.schema.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub verdict: String,
    pub violated_property: Option<PropertyRef>,
    pub nondet_choices: Vec<i64>,
    pub timer_trace: Vec<StateSnapshot>,
    pub paths_explored: u64,
    pub runtime_ms: u64,
}

impl VerdictReport {
    pub fn new(file: &str, e: &Exploration, runtime_ms: u64) -> Self {
        let (violated_property, nondet_choices, timer_trace) = match &e.verdict {
            Verdict::Successful => (None, Vec::new(), Vec::new()),
            Verdict::Failed(c) => (
                Some(PropertyRef {
                    file: c.violated.file.clone(),
                    line: Some(c.violated.line),
                    expr: c.violated.expr.clone(),
                }),
                c.nondet_choices.clone(),
                c.states.clone(),
            ),
            Verdict::BoundExceeded { resource, location } => (
                Some(PropertyRef {
                    file: location.as_ref().map_or(file, |l| &l.file).to_string(),
                    line: location.as_ref().map(|l| l.line),
                    expr: format!("{resource} bound exceeded"),
                }),
                Vec::new(),
                Vec::new(),
            ),
            Verdict::Fault(x) => (
                Some(PropertyRef {
                    file: x.file.clone(),
                    line: Some(x.line),
                    expr: format!("runtime fault: {}", x.message),
                }),
                x.nondet_choices.clone(),
                Vec::new(),
            ),
        };
        Self {
            verdict: e.verdict.name().to_string(),
            violated_property,
            nondet_choices,
            timer_trace,
            paths_explored: e.paths_explored,
            runtime_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_ast, LoadOptions};
    use crate::timed_model::TimerWidth;

    fn program(src: &str) -> Program {
        let ast = load_ast("t.c", src, &LoadOptions::default()).unwrap();
        lower(&ast, "t.c", TimerWidth::W64).unwrap()
    }

    fn verdict(src: &str) -> Exploration {
        explore(&program(src), &Bounds::default(), 1).unwrap()
    }

    #[test]
    fn assert_false_at_entry_has_single_state() {
        let e = verdict("int main(void) {\n  assert (0);\n  return 0;\n}");
        let Verdict::Failed(c) = &e.verdict else {
            panic!("{:?}", e.verdict)
        };
        assert_eq!(c.nondet_choices, Vec::<i64>::new());
        assert_eq!(c.states.len(), 2, "s0 plus the failing check");
        let text = format_counterexample(c);
        assert!(text.contains("Violated property:"));
        assert!(text.contains("file t.c line 2 function main"));
        assert!(text.contains("assertion\n  0\n"));
    }

    #[test]
    fn lex_least_violation() {
        let e = verdict(
            "int main(void) { int a; int b; a = nondet_int(0, 3); b = nondet_int(0, 3);\n\
             assert (a + b < 5); return 0; }",
        );
        assert_eq!(e.verdict.counterexample().unwrap().nondet_choices, [2, 3]);
    }

    #[test]
    fn assume_prunes_paths() {
        let e = verdict(
            "int main(void) { int a; a = nondet_int(0, 9); assume (a < 3); assert (a < 3); return 0; }",
        );
        assert_eq!(e.verdict, Verdict::Successful);
        assert_eq!(e.paths_explored, 10);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let src = "int main(void) { int i; int s; s = 0; for (i = 0; i < 8; i++) s = s + nondet_int(0, 2);\n\
                   assert (s != 13); return 0; }";
        let p = program(src);
        let b = Bounds::default();
        let one = explore(&p, &b, 1).unwrap();
        for w in [2, 3, 8] {
            assert_eq!(explore(&p, &b, w).unwrap(), one);
        }
        assert_eq!(one.verdict.name(), "failed");
    }

    #[test]
    fn path_budget() {
        let p = program("int main(void) { int a; int b; a = nondet_int(0, 9); b = nondet_int(0, 9); return 0; }");
        let b = Bounds {
            max_paths: 50,
            ..Bounds::default()
        };
        let e = explore(&p, &b, 1).unwrap();
        assert!(matches!(
            e.verdict,
            Verdict::BoundExceeded {
                resource: Resource::MaxPaths,
                ..
            }
        ));
        assert_eq!(e.verdict.exit_code(), 3);
    }

    #[test]
    fn nondet_width_bound() {
        let p = program("int main(void) { int a; a = nondet_int(0, 5000); return 0; }");
        let e = explore(&p, &Bounds::default(), 1).unwrap();
        assert!(matches!(
            e.verdict,
            Verdict::BoundExceeded {
                resource: Resource::NondetWidth,
                location: Some(_),
            }
        ));
    }

    #[test]
    fn fault_is_distinct() {
        let e = verdict("int a[2];\nint main(void) { int i; i = nondet_int(0, 2); a[i] = 1; return 0; }");
        let Verdict::Fault(f) = &e.verdict else {
            panic!("{:?}", e.verdict)
        };
        assert_eq!(f.nondet_choices, [2]);
        assert_eq!(e.verdict.exit_code(), 1);
        let report = VerdictReport::new("t.c", &e, 0);
        assert_eq!(report.verdict, "runtime_fault");
    }

    #[test]
    fn min_over_paths() {
        let src = "// DEFINE-TIMER T;\nunsigned int T;\nvoid a(void) { T += 7; }\nvoid b(void) { T += 4; }\n\
                   int main(void) { int c; c = nondet_int(0, 2); if (c == 0) a(); if (c == 1) { b(); b(); }\n\
                   if (c == 2) { assume (0); } return 0; }";
        let p = program(src);
        assert_eq!(min_path_value(&p, &Bounds::default(), 0).unwrap(), 7);
    }

    #[test]
    fn json_report_fields() {
        let e = verdict("int main(void) { assert (1); return 0; }");
        let v: serde_json::Value = serde_json::from_str(&VerdictReport::new("t.c", &e, 5).to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            [
                "nondet_choices",
                "paths_explored",
                "runtime_ms",
                "timer_trace",
                "verdict",
                "violated_property"
            ]
        );
        assert_eq!(v["verdict"], "successful");
    }
}
