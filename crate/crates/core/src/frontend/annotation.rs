//! The four `//@` timing annotations.
//!
//! ```text
//! //@ DEFINE-TIMER <name>
//! //@ RESET-TIMER <name>
//! //@ ASSERT-TIMER (<logic-expr>)
//! //@ WCET-FUNCTION [<int-expr>]
//! ```
//!
//! Keywords match case-insensitively, a trailing `;` is optional and
//! `RESET-TIMER T=0` is read as `RESET-TIMER T`.

use super::ast::{BinaryOp, Expr, UnaryOp};
use super::error::FrontendError;
use super::lexer::{tokenize, LexOptions, Token, TokenKind};
use super::parser::parse_expr;
use super::source::{Loc, SourceUnit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotationKind {
    DefineTimer(String),
    ResetTimer(String),
    AssertTimer(Expr),
    /// Duration expression: an integer literal or a constant expression over
    /// `const` globals, resolved when annotations are bound.
    WcetFunction(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub kind: AnnotationKind,
    /// Comment text after the `//@` marker, trimmed.
    pub text: String,
    pub loc: Loc,
}

impl Annotation {
    /// The plain-comment form that replaces the annotation in translated code.
    pub fn echo(&self) -> String {
        format!("// {}", self.text)
    }

    /// The WCET value when it is written as a literal.
    pub fn wcet_literal(&self) -> Option<u64> {
        match &self.kind {
            AnnotationKind::WcetFunction(e) => const_fold(e, &|_| None)
                .and_then(|v| u64::try_from(v).ok()),
            _ => None,
        }
    }
}

pub fn parse_annotation(tok: &Token) -> Result<Annotation, FrontendError> {
    let loc = tok.loc;
    let err = |reason: String| FrontendError::AnnotationSyntax { loc, reason };
    if tok.kind != TokenKind::AnnotationComment {
        return Err(err("not an annotation comment".into()));
    }
    let body = tok
        .lexeme
        .strip_prefix("//@")
        .ok_or_else(|| err("missing `//@` prefix".into()))?;
    // A trailing `// note` after the annotation is ignored.
    let body = body.split("//").next().unwrap_or("").trim();
    let text = tok.lexeme[3..].trim().to_string();

    let kw_end = body
        .find(|c: char| c.is_whitespace() || c == '(' || c == '[')
        .unwrap_or(body.len());
    let keyword = body[..kw_end].to_ascii_uppercase();
    let rest = body[kw_end..].trim();
    let rest = rest.strip_suffix(';').unwrap_or(rest).trim_end();

    let kind = match keyword.as_str() {
        "DEFINE-TIMER" => {
            if !is_identifier(rest) {
                return Err(err(format!("`{rest}` is not a valid timer name")));
            }
            AnnotationKind::DefineTimer(rest.to_string())
        }
        "RESET-TIMER" => {
            let (name, value) = match rest.split_once('=') {
                Some((n, v)) => (n.trim(), Some(v.trim())),
                None => (rest, None),
            };
            if !is_identifier(name) {
                return Err(err(format!("`{name}` is not a valid timer name")));
            }
            if let Some(v) = value {
                if v.parse::<u64>() != Ok(0) {
                    return Err(err(format!("timers can only be reset to 0, not `{v}`")));
                }
            }
            AnnotationKind::ResetTimer(name.to_string())
        }
        "ASSERT-TIMER" => {
            if rest.is_empty() {
                return Err(err("missing assertion expression".into()));
            }
            let expr = payload_expr(rest, loc)?;
            check_logic_expr(&expr).map_err(err)?;
            AnnotationKind::AssertTimer(expr)
        }
        "WCET-FUNCTION" => {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err("expected `[<int-expr>]`".into()))?
                .trim();
            if inner.is_empty() {
                return Err(err("empty WCET".into()));
            }
            let expr = payload_expr(inner, loc)?;
            check_int_expr(&expr).map_err(err)?;
            if let Some(v) = const_fold(&expr, &|_| None) {
                if v < 0 {
                    return Err(err(format!("negative WCET {v}")));
                }
            }
            AnnotationKind::WcetFunction(expr)
        }
        "" => return Err(err("empty annotation".into())),
        other => return Err(err(format!("unknown annotation keyword `{other}`"))),
    };
    Ok(Annotation { kind, text, loc })
}

fn payload_expr(text: &str, loc: Loc) -> Result<Expr, FrontendError> {
    let reloc = |e: FrontendError| FrontendError::AnnotationSyntax {
        loc,
        reason: e.to_string(),
    };
    let toks = tokenize(
        &SourceUnit::new("<annotation>", text),
        LexOptions {
            keep_comments: false,
        },
    )
    .map_err(reloc)?;
    parse_expr(&toks).map_err(reloc)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_logic_expr(e: &Expr) -> Result<(), String> {
    use BinaryOp::*;
    match e {
        Expr::Int { .. } | Expr::Var(_) => Ok(()),
        Expr::Unary(UnaryOp::Not | UnaryOp::Neg, inner) => check_logic_expr(inner),
        Expr::Binary(op, l, r) => match op {
            Add | Sub | Mul | Lt | Le | Gt | Ge | Eq | Ne | And | Or => {
                check_logic_expr(l)?;
                check_logic_expr(r)
            }
            other => Err(format!(
                "operator `{}` is not allowed in timing assertions",
                other.symbol()
            )),
        },
        Expr::Unary(op, _) => Err(format!(
            "operator `{}` is not allowed in timing assertions",
            op.symbol()
        )),
        Expr::Call(name, _) => Err(format!("call to `{name}` in timing assertion")),
        Expr::Index(name, _) => Err(format!("array access `{name}[...]` in timing assertion")),
        Expr::Str(_) => Err("string literal in timing assertion".into()),
    }
}

fn check_int_expr(e: &Expr) -> Result<(), String> {
    match e {
        Expr::Int { .. } | Expr::Var(_) => Ok(()),
        Expr::Unary(UnaryOp::Neg, inner) => check_int_expr(inner),
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul, l, r) => {
            check_int_expr(l)?;
            check_int_expr(r)
        }
        _ => Err("WCET must be an integer constant expression".into()),
    }
}

/// Evaluates an integer constant expression; identifiers go through `lookup`.
pub fn const_fold(e: &Expr, lookup: &dyn Fn(&str) -> Option<i128>) -> Option<i128> {
    match e {
        Expr::Int { value, .. } => Some(*value),
        Expr::Var(n) => lookup(n),
        Expr::Unary(op, inner) => {
            let v = const_fold(inner, lookup)?;
            Some(match op {
                UnaryOp::Neg => v.checked_neg()?,
                UnaryOp::Not => (v == 0) as i128,
                UnaryOp::BitNot => !v,
            })
        }
        Expr::Binary(op, l, r) => {
            let a = const_fold(l, lookup)?;
            let b = const_fold(r, lookup)?;
            Some(match op {
                BinaryOp::Add => a.checked_add(b)?,
                BinaryOp::Sub => a.checked_sub(b)?,
                BinaryOp::Mul => a.checked_mul(b)?,
                BinaryOp::Div => a.checked_div(b)?,
                BinaryOp::Rem => a.checked_rem(b)?,
                BinaryOp::Lt => (a < b) as i128,
                BinaryOp::Le => (a <= b) as i128,
                BinaryOp::Gt => (a > b) as i128,
                BinaryOp::Ge => (a >= b) as i128,
                BinaryOp::Eq => (a == b) as i128,
                BinaryOp::Ne => (a != b) as i128,
                BinaryOp::And => (a != 0 && b != 0) as i128,
                BinaryOp::Or => (a != 0 || b != 0) as i128,
                _ => return None,
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(text: &str) -> Result<Annotation, FrontendError> {
        let tok = Token {
            kind: TokenKind::AnnotationComment,
            lexeme: text.to_string(),
            loc: Loc::new(4, 1),
            span: (0, text.len()),
        };
        parse_annotation(&tok)
    }

    #[test]
    fn wcet_literal() {
        let a = ann("//@ WCET-FUNCTION [5000]").unwrap();
        assert!(matches!(a.kind, AnnotationKind::WcetFunction(_)));
        assert_eq!(a.wcet_literal(), Some(5000));
    }

    #[test]
    fn wcet_symbolic_and_lowercase_keyword() {
        let a = ann("//@ WCET-function [d2]").unwrap();
        assert_eq!(a.kind, AnnotationKind::WcetFunction(Expr::var("d2")));
        assert_eq!(a.wcet_literal(), None);
        assert_eq!(a.echo(), "// WCET-function [d2]");
    }

    #[test]
    fn assert_timer() {
        let a = ann("//@ ASSERT-TIMER (TIMER1 <= alpha);").unwrap();
        assert_eq!(
            a.kind,
            AnnotationKind::AssertTimer(Expr::binary(
                BinaryOp::Le,
                Expr::var("TIMER1"),
                Expr::var("alpha")
            ))
        );
    }

    #[test]
    fn reset_tolerates_zero_suffix() {
        let a = ann("//@ RESET-TIMER TIMER2=0;").unwrap();
        assert_eq!(a.kind, AnnotationKind::ResetTimer("TIMER2".into()));
        assert!(ann("//@ RESET-TIMER TIMER2 = 5").is_err());
    }

    #[test]
    fn define_timer() {
        let a = ann("//@ define-timer __timing__").unwrap();
        assert_eq!(a.kind, AnnotationKind::DefineTimer("__timing__".into()));
        assert!(ann("//@ DEFINE-TIMER 9abc").is_err());
    }

    #[test]
    fn trailing_note_is_ignored() {
        let a = ann("//@ ASSERT-TIMER (TIMER < 1000000)   // one second;").unwrap();
        assert!(matches!(a.kind, AnnotationKind::AssertTimer(_)));
    }

    #[test]
    fn rejects_bad_annotations() {
        for bad in [
            "//@ WCET-FUNCTION [-5]",
            "//@ WCET-FUNCTION 5",
            "//@ WCET-FUNCTION [f(1)]",
            "//@ TICK-TIMER T",
            "//@",
            "//@ ASSERT-TIMER (T <= )",
            "//@ ASSERT-TIMER (T / 2 < 3)",
            "//@ ASSERT-TIMER (g(T))",
        ] {
            let e = ann(bad).unwrap_err();
            assert!(
                matches!(e, FrontendError::AnnotationSyntax { loc, .. } if loc == Loc::new(4, 1)),
                "{bad}: {e:?}"
            );
        }
    }
}
