//! Rewrites an annotated program into an untimed one with explicit timers.
//!
//! * `DEFINE-TIMER t` becomes a global `unsigned int t;`
//! * a function with `WCET-FUNCTION [d]` starts with `t += d;` for every timer
//! * `RESET-TIMER t` becomes `t = 0;`
//! * `ASSERT-TIMER (e)` becomes `assert (e);`
//!
//! Each consumed annotation is kept as a `// ...` comment in front of its
//! replacement.

use thiserror::Error;

use crate::frontend::annotation::AnnotationKind;
use crate::frontend::ast::*;
use crate::frontend::bind::AnnotatedProgram;
use crate::frontend::source::Loc;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstrumentError {
    #[error("timer `{name}` clashes with a program identifier")]
    NameClash { name: String, loc: Loc },
    #[error("annotation site {site} was not bound")]
    Unbound { site: usize, loc: Loc },
}

impl InstrumentError {
    pub fn loc(&self) -> Loc {
        match self {
            InstrumentError::NameClash { loc, .. } | InstrumentError::Unbound { loc, .. } => *loc,
        }
    }
}

pub fn instrument(p: &AnnotatedProgram) -> Result<Ast, InstrumentError> {
    let declared = p.ast.declared_names();
    for (i, t) in p.timers.iter().enumerate() {
        if declared.iter().any(|(n, _)| n == t) {
            return Err(InstrumentError::NameClash {
                name: t.clone(),
                loc: p.annotations[p.timer_sites[i]].loc,
            });
        }
    }

    let mut items = Vec::with_capacity(p.ast.items.len() + p.timers.len());
    for item in &p.ast.items {
        match item {
            Item::Annotation(site) => {
                let ann = &p.annotations[site.id];
                items.push(Item::Comment(ann.echo(), site.loc));
                if let AnnotationKind::DefineTimer(name) = &ann.kind {
                    items.push(Item::Global(timer_decl(name, site.loc)));
                }
            }
            Item::Function(f) => {
                let mut body = Vec::new();
                if let Some(expr) = p.wcet.get(f.name()).and_then(|w| w.expr.as_ref()) {
                    for t in &p.timers {
                        body.push(Stmt::new(
                            StmtKind::Assign {
                                target: LValue::Var(t.clone()),
                                op: AssignOp::Add,
                                value: expr.clone(),
                            },
                            f.loc,
                        ));
                    }
                }
                for s in &f.body {
                    rewrite_into(p, s, &mut body)?;
                }
                items.push(Item::Function(FunctionDef {
                    sig: f.sig.clone(),
                    body,
                    loc: f.loc,
                }));
            }
            other => items.push(other.clone()),
        }
    }
    Ok(Ast { items })
}

pub fn timer_decl(name: &str, loc: Loc) -> VarDecl {
    VarDecl {
        ty: ScalarType::UnsignedInt,
        is_const: false,
        name: name.to_string(),
        array_len: None,
        init: None,
        loc,
    }
}

/// Timers declared by an instrumented program: each `// DEFINE-TIMER t`
/// comment directly followed by the global `unsigned int t;`.
pub fn echoed_timers(ast: &Ast) -> Vec<String> {
    let mut out = Vec::new();
    for pair in ast.items.windows(2) {
        let (Item::Comment(text, _), Item::Global(g)) = (&pair[0], &pair[1]) else {
            continue;
        };
        let Some(body) = text.strip_prefix("//") else {
            continue;
        };
        let body = body.trim();
        let Some((kw, rest)) = body.split_once(char::is_whitespace) else {
            continue;
        };
        let rest = rest.trim();
        let name = rest.strip_suffix(';').unwrap_or(rest).trim();
        if kw.eq_ignore_ascii_case("DEFINE-TIMER")
            && name == g.name
            && g.ty == ScalarType::UnsignedInt
            && g.array_len.is_none()
            && g.init.is_none()
            && !g.is_const
        {
            out.push(g.name.clone());
        }
    }
    out
}

fn rewrite_into(
    p: &AnnotatedProgram,
    s: &Stmt,
    out: &mut Vec<Stmt>,
) -> Result<(), InstrumentError> {
    match &s.kind {
        StmtKind::Annotation(site) => {
            let bound = p
                .stmt_annotation(site.id)
                .ok_or(InstrumentError::Unbound {
                    site: site.id,
                    loc: site.loc,
                })?;
            let ann = &bound.annotation;
            out.push(Stmt::new(StmtKind::Comment(ann.echo()), s.loc));
            match &ann.kind {
                AnnotationKind::ResetTimer(name) => out.push(Stmt::new(
                    StmtKind::Assign {
                        target: LValue::Var(name.clone()),
                        op: AssignOp::Set,
                        value: Expr::int(0),
                    },
                    s.loc,
                )),
                AnnotationKind::AssertTimer(e) => {
                    out.push(Stmt::new(StmtKind::Assert(e.clone()), s.loc))
                }
                AnnotationKind::DefineTimer(_) | AnnotationKind::WcetFunction(_) => {
                    return Err(InstrumentError::Unbound {
                        site: site.id,
                        loc: site.loc,
                    })
                }
            }
        }
        _ => out.push(rewrite(p, s)?),
    }
    Ok(())
}

/// Rewrites a statement in a single-statement position; an annotation there
/// turns into a block holding the echo comment and its replacement.
fn rewrite(p: &AnnotatedProgram, s: &Stmt) -> Result<Stmt, InstrumentError> {
    let one = |inner: &Stmt| -> Result<Box<Stmt>, InstrumentError> {
        if matches!(inner.kind, StmtKind::Annotation(_)) {
            let mut v = Vec::new();
            rewrite_into(p, inner, &mut v)?;
            Ok(Box::new(Stmt::new(StmtKind::Block(v), inner.loc)))
        } else {
            Ok(Box::new(rewrite(p, inner)?))
        }
    };
    let kind = match &s.kind {
        StmtKind::Block(body) => {
            let mut v = Vec::with_capacity(body.len());
            for b in body {
                rewrite_into(p, b, &mut v)?;
            }
            StmtKind::Block(v)
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => StmtKind::If {
            cond: cond.clone(),
            then_branch: one(then_branch)?,
            else_branch: else_branch.as_deref().map(one).transpose()?,
        },
        StmtKind::While { cond, body } => StmtKind::While {
            cond: cond.clone(),
            body: one(body)?,
        },
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => StmtKind::For {
            init: init.clone(),
            cond: cond.clone(),
            step: step.clone(),
            body: one(body)?,
        },
        StmtKind::Annotation(_) => {
            let mut v = Vec::new();
            rewrite_into(p, s, &mut v)?;
            StmtKind::Block(v)
        }
        other => other.clone(),
    };
    Ok(Stmt::new(kind, s.loc))
}
