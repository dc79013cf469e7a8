//! Source text in, C text or verdict out.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::emit::emit_c;
use crate::frontend::{load_annotated, AnnotatedProgram, Diagnostic, LoadError, LoadOptions};
use crate::instrument::{instrument, InstrumentError};
use crate::timed_model::TimerWidth;
use crate::verifier::{explore, lower, Bounds, Exploration, Program, VerifyError};

#[derive(Debug, Clone, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Load(#[from] LoadError),
    #[error("{file}:{}: {error}", error.loc())]
    Instrument { file: String, error: InstrumentError },
    #[error("{file}: {error}")]
    Verify { file: String, error: VerifyError },
}

impl PipelineError {
    /// Errors rendered as `file:line:col: error: message`.
    pub fn render(&self) -> String {
        match self {
            PipelineError::Load(e) => e.to_string(),
            PipelineError::Instrument { file, error } => {
                Diagnostic::error(error.loc(), error.to_string()).render(file)
            }
            PipelineError::Verify { file, error } => match error {
                VerifyError::Lower { loc, message } => Diagnostic::error(*loc, message.clone()).render(file),
                other => format!("{file}: error: {other}"),
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub defines: BTreeSet<String>,
    pub bounds: Bounds,
    /// Worker threads; 0 uses every CPU.
    pub workers: usize,
}

/// Instrumented C plus any frontend warnings.
#[derive(Debug, Clone)]
pub struct Translation {
    pub c: String,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub program: Program,
    pub exploration: Exploration,
    pub warnings: Vec<Diagnostic>,
}

fn annotated(path: &str, text: &str, defines: &BTreeSet<String>) -> Result<AnnotatedProgram, PipelineError> {
    let opts = LoadOptions {
        defines: defines.clone(),
    };
    Ok(load_annotated(path, text, &opts)?)
}

pub fn translate(path: &str, text: &str, defines: &BTreeSet<String>) -> Result<Translation, PipelineError> {
    let p = annotated(path, text, defines)?;
    let ast = instrument(&p).map_err(|error| PipelineError::Instrument {
        file: path.to_string(),
        error,
    })?;
    Ok(Translation {
        c: emit_c(&ast),
        warnings: p.warnings,
    })
}

/// Loads, instruments and lowers `text`. Works on annotated sources and on
/// already-instrumented ones alike.
pub fn prepare(
    path: &str,
    text: &str,
    defines: &BTreeSet<String>,
    width: TimerWidth,
) -> Result<(Program, Vec<Diagnostic>), PipelineError> {
    let p = annotated(path, text, defines)?;
    let ast = instrument(&p).map_err(|error| PipelineError::Instrument {
        file: path.to_string(),
        error,
    })?;
    let program = lower(&ast, path, width).map_err(|error| PipelineError::Verify {
        file: path.to_string(),
        error,
    })?;
    Ok((program, p.warnings))
}

pub fn verify_source(path: &str, text: &str, opts: &VerifyOptions) -> Result<Verification, PipelineError> {
    let (program, warnings) = prepare(path, text, &opts.defines, opts.bounds.timer_width)?;
    let exploration = explore(&program, &opts.bounds, opts.workers).map_err(|error| PipelineError::Verify {
        file: path.to_string(),
        error,
    })?;
    Ok(Verification {
        program,
        exploration,
        warnings,
    })
}
