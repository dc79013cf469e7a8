//! MiniC frontend: preprocessing, lexing, parsing and annotation binding.

pub mod annotation;
pub mod ast;
pub mod bind;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod preprocess;
pub mod source;

use std::collections::BTreeSet;
use std::fmt;

pub use annotation::{parse_annotation, Annotation, AnnotationKind};
pub use ast::Ast;
pub use bind::{annotate, bind_annotations, AnnotatedProgram};
pub use error::FrontendError;
pub use lexer::{tokenize, LexOptions, Token, TokenKind};
pub use parser::parse;
pub use source::{Diagnostic, Loc, Severity, SourceUnit};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Flags considered defined by `#if`/`#ifdef`.
    pub defines: BTreeSet<String>,
}

/// One or more frontend errors for a file.
#[derive(Debug, Clone)]
pub struct LoadError {
    pub file: String,
    pub errors: Vec<FrontendError>,
}

impl LoadError {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.errors.iter().map(FrontendError::to_diagnostic).collect()
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str(&d.render(&self.file))?;
        }
        Ok(())
    }
}

impl std::error::Error for LoadError {}

/// Preprocesses, tokenizes (keeping comments) and parses `text`.
pub fn load_ast(path: &str, text: &str, opts: &LoadOptions) -> Result<Ast, LoadError> {
    let fail = |e: FrontendError| LoadError {
        file: path.to_string(),
        errors: vec![e],
    };
    let text = preprocess::preprocess(text, &opts.defines).map_err(fail)?;
    let src = SourceUnit::new(path, text);
    let tokens = tokenize(&src, LexOptions::default()).map_err(fail)?;
    parse(&tokens).map_err(fail)
}

/// [`load_ast`] followed by annotation parsing and binding.
pub fn load_annotated(
    path: &str,
    text: &str,
    opts: &LoadOptions,
) -> Result<AnnotatedProgram, LoadError> {
    let ast = load_ast(path, text, opts)?;
    annotate(ast).map_err(|errors| LoadError {
        file: path.to_string(),
        errors,
    })
}
