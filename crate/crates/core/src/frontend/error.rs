use thiserror::Error;

use super::source::{Diagnostic, Loc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{loc}: preprocessor: {reason}")]
    Preprocess { loc: Loc, reason: String },

    #[error("{loc}: {reason}")]
    Lex { loc: Loc, reason: String },

    #[error("{loc}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        loc: Loc,
        expected: Vec<String>,
        found: String,
    },

    #[error("{loc}: {reason}")]
    Unsupported { loc: Loc, reason: String },

    #[error("{loc}: recursion is not supported: {}", cycle.join(" -> "))]
    Recursion { loc: Loc, cycle: Vec<String> },

    #[error("{loc}: {reason}")]
    Resolve { loc: Loc, reason: String },

    #[error("{loc}: malformed annotation: {reason}")]
    AnnotationSyntax { loc: Loc, reason: String },

    #[error("{loc}: {reason}")]
    Bind { loc: Loc, reason: String },
}

impl FrontendError {
    pub fn loc(&self) -> Loc {
        match self {
            FrontendError::Preprocess { loc, .. }
            | FrontendError::Lex { loc, .. }
            | FrontendError::Parse { loc, .. }
            | FrontendError::Unsupported { loc, .. }
            | FrontendError::Recursion { loc, .. }
            | FrontendError::Resolve { loc, .. }
            | FrontendError::AnnotationSyntax { loc, .. }
            | FrontendError::Bind { loc, .. } => *loc,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let full = self.to_string();
        let prefix = format!("{}: ", self.loc());
        let message = full.strip_prefix(&prefix).unwrap_or(&full).to_string();
        Diagnostic::error(self.loc(), message)
    }
}
