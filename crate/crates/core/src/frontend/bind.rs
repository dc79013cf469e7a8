use std::collections::BTreeMap;

use super::annotation::{const_fold, parse_annotation, Annotation, AnnotationKind};
use super::ast::{walk_stmt, Ast, Expr, Initializer, Item, StmtKind};
use super::error::FrontendError;
use super::lexer::{Token, TokenKind};
use super::source::{Diagnostic, Loc};

/// A function's bound WCET. `expr` is `None` for unannotated functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcet {
    pub expr: Option<Expr>,
    pub value: u64,
    pub annotation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StmtAnnotation {
    pub function: String,
    pub site: usize,
    pub annotation: Annotation,
}

#[derive(Debug, Clone)]
pub struct AnnotatedProgram {
    pub ast: Ast,
    /// Timer names in definition order.
    pub timers: Vec<String>,
    /// Annotation site id of each timer definition.
    pub timer_sites: Vec<usize>,
    /// Every defined function, annotated or not.
    pub wcet: BTreeMap<String, Wcet>,
    pub stmt_annotations: Vec<StmtAnnotation>,
    /// Parsed annotations indexed by site id.
    pub annotations: Vec<Annotation>,
    pub warnings: Vec<Diagnostic>,
}

impl AnnotatedProgram {
    pub fn annotated_functions(&self) -> impl Iterator<Item = (&str, &Wcet)> {
        self.wcet
            .iter()
            .filter(|(_, w)| w.annotation.is_some())
            .map(|(n, w)| (n.as_str(), w))
    }

    pub fn stmt_annotation(&self, site: usize) -> Option<&StmtAnnotation> {
        self.stmt_annotations.iter().find(|s| s.site == site)
    }
}

/// `const` globals whose initializers fold to integers, in declaration order.
pub fn constant_globals(ast: &Ast) -> BTreeMap<String, i128> {
    let mut consts = BTreeMap::new();
    for g in ast.globals() {
        if !g.is_const || g.array_len.is_some() {
            continue;
        }
        if let Some(Initializer::Expr(e)) = &g.init {
            if let Some(v) = const_fold(e, &|n| consts.get(n).copied()) {
                consts.insert(g.name.clone(), v);
            }
        }
    }
    consts
}

/// Parses every `//@` site of `ast` and binds the results.
///
/// Each site yields either one annotation or one error.
pub fn annotate(ast: Ast) -> Result<AnnotatedProgram, Vec<FrontendError>> {
    let mut anns = Vec::new();
    let mut errors = Vec::new();
    for site in ast.annotation_sites() {
        let tok = Token {
            kind: TokenKind::AnnotationComment,
            lexeme: site.text.clone(),
            loc: site.loc,
            span: (0, site.text.len()),
        };
        match parse_annotation(&tok) {
            Ok(a) => anns.push(a),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    bind_annotations(ast, anns)
}

pub fn bind_annotations(
    ast: Ast,
    anns: Vec<Annotation>,
) -> Result<AnnotatedProgram, Vec<FrontendError>> {
    let sites: Vec<(usize, Loc)> = ast.annotation_sites().iter().map(|s| (s.id, s.loc)).collect();
    if sites.len() != anns.len() {
        let loc = sites.first().map(|s| s.1).unwrap_or_default();
        return Err(vec![FrontendError::Bind {
            loc,
            reason: format!(
                "{} annotation sites but {} annotations supplied",
                sites.len(),
                anns.len()
            ),
        }]);
    }
    let consts = constant_globals(&ast);
    let lookup = |n: &str| consts.get(n).copied();

    let mut errors = Vec::new();
    let mut timers: Vec<String> = Vec::new();
    let mut timer_sites = Vec::new();
    let mut wcet: BTreeMap<String, Wcet> = BTreeMap::new();
    let mut stmt_annotations = Vec::new();
    let mut pending: Option<(usize, &Annotation)> = None;

    for item in &ast.items {
        match item {
            Item::Annotation(site) => {
                let ann = &anns[site.id];
                match &ann.kind {
                    AnnotationKind::DefineTimer(name) => {
                        if timers.contains(name) {
                            errors.push(bind_err(ann.loc, format!("timer `{name}` is defined twice")));
                        } else {
                            timers.push(name.clone());
                            timer_sites.push(site.id);
                        }
                    }
                    AnnotationKind::WcetFunction(_) => {
                        if pending.is_some() {
                            errors.push(bind_err(
                                ann.loc,
                                "two WCET annotations target the same function".into(),
                            ));
                        }
                        pending = Some((site.id, ann));
                    }
                    AnnotationKind::ResetTimer(_) | AnnotationKind::AssertTimer(_) => {
                        errors.push(bind_err(
                            ann.loc,
                            "RESET-TIMER and ASSERT-TIMER must appear inside a function body"
                                .into(),
                        ));
                    }
                }
            }
            Item::Function(f) => {
                let entry = match pending.take() {
                    Some((id, ann)) => {
                        let AnnotationKind::WcetFunction(expr) = &ann.kind else {
                            unreachable!()
                        };
                        match const_fold(expr, &lookup) {
                            Some(v) if (0..=u64::MAX as i128).contains(&v) => Wcet {
                                expr: Some(expr.clone()),
                                value: v as u64,
                                annotation: Some(id),
                            },
                            Some(v) => {
                                errors.push(bind_err(ann.loc, format!("WCET of `{}` is out of range ({v})", f.name())));
                                continue;
                            }
                            None => {
                                errors.push(bind_err(
                                    ann.loc,
                                    format!("WCET `{}` does not resolve to an integer constant", ann.text),
                                ));
                                continue;
                            }
                        }
                    }
                    None => Wcet {
                        expr: None,
                        value: 0,
                        annotation: None,
                    },
                };
                wcet.insert(f.name().to_string(), entry);

                for stmt in &f.body {
                    walk_stmt(stmt, &mut |s| {
                        let StmtKind::Annotation(site) = &s.kind else {
                            return;
                        };
                        let ann = &anns[site.id];
                        let check = match &ann.kind {
                            AnnotationKind::ResetTimer(name) => {
                                if timers.contains(name) {
                                    Ok(())
                                } else {
                                    Err(format!("timer `{name}` is reset before it is defined"))
                                }
                            }
                            AnnotationKind::AssertTimer(expr) => {
                                check_assert_names(expr, &timers, &consts)
                            }
                            AnnotationKind::DefineTimer(_) => {
                                Err("DEFINE-TIMER must appear at file scope".into())
                            }
                            AnnotationKind::WcetFunction(_) => {
                                Err("WCET annotation is not followed by a function definition"
                                    .into())
                            }
                        };
                        match check {
                            Ok(()) => stmt_annotations.push(StmtAnnotation {
                                function: f.name().to_string(),
                                site: site.id,
                                annotation: ann.clone(),
                            }),
                            Err(reason) => errors.push(bind_err(ann.loc, reason)),
                        }
                    });
                }
            }
            Item::Global(_) | Item::Prototype(_) | Item::Comment(..) => {}
        }
    }
    if let Some((_, ann)) = pending {
        errors.push(bind_err(
            ann.loc,
            "WCET annotation is not followed by a function definition".into(),
        ));
    }

    let declared = ast.declared_names();
    for (i, t) in timers.iter().enumerate() {
        if declared.iter().any(|(n, _)| n == t) {
            errors.push(bind_err(
                anns[timer_sites[i]].loc,
                format!("timer `{t}` clashes with a program identifier"),
            ));
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.loc());
        return Err(errors);
    }

    let mut warnings = Vec::new();
    if !anns.is_empty() {
        for f in ast.functions() {
            if f.name() != "main" && wcet[f.name()].annotation.is_none() {
                warnings.push(Diagnostic::warning(
                    f.loc,
                    format!("function `{}` has no WCET annotation; assuming 0", f.name()),
                ));
            }
        }
    }

    Ok(AnnotatedProgram {
        ast,
        timers,
        timer_sites,
        wcet,
        stmt_annotations,
        annotations: anns,
        warnings,
    })
}

fn bind_err(loc: Loc, reason: String) -> FrontendError {
    FrontendError::Bind { loc, reason }
}

fn check_assert_names(
    expr: &Expr,
    timers: &[String],
    consts: &BTreeMap<String, i128>,
) -> Result<(), String> {
    let mut bad = None;
    expr.for_each_name(&mut |n| {
        if bad.is_none() && !timers.iter().any(|t| t == n) && !consts.contains_key(n) {
            bad = Some(n.to_string());
        }
    });
    match bad {
        None => Ok(()),
        Some(n) => Err(format!(
            "`{n}` in timing assertion is neither a defined timer nor an integer constant"
        )),
    }
}
