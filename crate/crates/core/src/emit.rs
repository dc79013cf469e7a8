//! Deterministic C text emitter: one statement per line, 2-space indent.

use std::fmt::Write;

use crate::frontend::ast::*;

const INDENT: &str = "  ";

pub fn emit_c(ast: &Ast) -> String {
    let uses = Uses::scan(ast);
    let mut out = String::new();
    if uses.assert {
        out.push_str("#include <assert.h>\n");
    }
    if uses.nondet {
        out.push_str("extern int nondet_int(int lo, int hi);\n");
    }
    if uses.assume {
        out.push_str("extern void assume(int cond);\n");
    }
    if !out.is_empty() && !ast.items.is_empty() {
        out.push('\n');
    }

    let mut prev_was_function = false;
    for item in &ast.items {
        if prev_was_function {
            out.push('\n');
        }
        prev_was_function = false;
        match item {
            Item::Comment(text, _) => push_line(&mut out, 0, text),
            Item::Annotation(site) => push_line(&mut out, 0, &site.text),
            Item::Global(d) => push_line(&mut out, 0, &format!("{};", decl(d))),
            Item::Prototype(p) => {
                let ext = if p.is_extern { "extern " } else { "" };
                push_line(&mut out, 0, &format!("{ext}{};", signature(&p.sig)));
            }
            Item::Function(f) => {
                push_line(&mut out, 0, &format!("{} {{", signature(&f.sig)));
                for s in &f.body {
                    stmt(&mut out, 1, s);
                }
                push_line(&mut out, 0, "}");
                prev_was_function = true;
            }
        }
    }
    out
}

#[derive(Default)]
struct Uses {
    assert: bool,
    assume: bool,
    nondet: bool,
}

impl Uses {
    fn scan(ast: &Ast) -> Self {
        let mut u = Uses::default();
        let calls = |e: &Expr, u: &mut Uses| {
            e.for_each_call(&mut |n| {
                if n == "nondet_int" {
                    u.nondet = true;
                }
            })
        };
        for f in ast.functions() {
            for s in &f.body {
                walk_stmt(s, &mut |st| match &st.kind {
                    StmtKind::Assert(e) => {
                        u.assert = true;
                        calls(e, &mut u);
                    }
                    StmtKind::Assume(e) => {
                        u.assume = true;
                        calls(e, &mut u);
                    }
                    StmtKind::Decl(d) => match &d.init {
                        Some(Initializer::Expr(e)) => calls(e, &mut u),
                        Some(Initializer::List(es)) => es.iter().for_each(|e| calls(e, &mut u)),
                        None => {}
                    },
                    StmtKind::Assign { target, value, .. } => {
                        if let LValue::Index(_, i) = target {
                            calls(i, &mut u);
                        }
                        calls(value, &mut u);
                    }
                    StmtKind::Expr(e)
                    | StmtKind::If { cond: e, .. }
                    | StmtKind::While { cond: e, .. }
                    | StmtKind::For { cond: Some(e), .. }
                    | StmtKind::Return(Some(e)) => calls(e, &mut u),
                    _ => {}
                });
            }
        }
        u
    }
}

fn push_line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn signature(sig: &Signature) -> String {
    let mut params: Vec<String> = sig
        .params
        .iter()
        .map(|p| {
            let ty = p.ty.c_name();
            let sep = if p.name.is_empty() { "" } else { " " };
            match p.kind {
                ParamKind::Scalar => format!("{ty}{sep}{}", p.name),
                ParamKind::Array => format!("{ty}{sep}{}[]", p.name),
                ParamKind::Pointer => format!("{ty} *{}", p.name),
                ParamKind::PointerArray => format!("{ty} *{}[]", p.name),
            }
        })
        .collect();
    if sig.variadic {
        params.push("...".into());
    }
    let params = if params.is_empty() {
        "void".to_string()
    } else {
        params.join(", ")
    };
    format!("{} {}({})", sig.ret.c_name(), sig.name, params)
}

fn decl(d: &VarDecl) -> String {
    let mut s = String::new();
    if d.is_const {
        s.push_str("const ");
    }
    let _ = write!(s, "{} {}", d.ty.c_name(), d.name);
    if let Some(n) = d.array_len {
        let _ = write!(s, "[{n}]");
    }
    match &d.init {
        Some(Initializer::Expr(e)) => {
            let _ = write!(s, " = {}", expr(e));
        }
        Some(Initializer::List(es)) => {
            let items: Vec<String> = es.iter().map(expr).collect();
            let _ = write!(s, " = {{{}}}", items.join(", "));
        }
        None => {}
    }
    s
}

fn lvalue(l: &LValue) -> String {
    match l {
        LValue::Var(n) => n.clone(),
        LValue::Index(n, i) => format!("{n}[{}]", expr(i)),
    }
}

/// Statements that fit on one line without the trailing `;`.
fn simple(s: &Stmt) -> Option<String> {
    Some(match &s.kind {
        StmtKind::Decl(d) => decl(d),
        StmtKind::Assign { target, op, value } => {
            format!("{} {} {}", lvalue(target), op.symbol(), expr(value))
        }
        StmtKind::Step { target, increment } => {
            format!("{}{}", lvalue(target), if *increment { "++" } else { "--" })
        }
        StmtKind::Expr(e) => expr(e),
        _ => return None,
    })
}

fn stmt(out: &mut String, depth: usize, s: &Stmt) {
    if let Some(line) = simple(s) {
        push_line(out, depth, &format!("{line};"));
        return;
    }
    match &s.kind {
        StmtKind::Block(body) => {
            push_line(out, depth, "{");
            body.iter().for_each(|b| stmt(out, depth + 1, b));
            push_line(out, depth, "}");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let head = format!("if ({})", expr(cond));
            let closed = branch(out, depth, &head, then_branch);
            if let Some(e) = else_branch {
                if closed {
                    // Rewrite the closing `}` line into `} else`.
                    out.truncate(out.len() - 2);
                    out.push_str("} else");
                    tail(out, depth, e);
                } else {
                    branch(out, depth, "else", e);
                }
            }
        }
        StmtKind::While { cond, body } => {
            branch(out, depth, &format!("while ({})", expr(cond)), body);
        }
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            let init = init.as_deref().and_then(simple).unwrap_or_default();
            let cond = cond.as_ref().map(expr).unwrap_or_default();
            let step = step.as_deref().and_then(simple).unwrap_or_default();
            let cond = if cond.is_empty() { cond } else { format!(" {cond}") };
            let step = if step.is_empty() { step } else { format!(" {step}") };
            branch(out, depth, &format!("for ({init};{cond};{step})"), body);
        }
        StmtKind::Return(None) => push_line(out, depth, "return;"),
        StmtKind::Return(Some(e)) => push_line(out, depth, &format!("return {};", expr(e))),
        StmtKind::Assert(e) => push_line(out, depth, &format!("assert ({});", expr(e))),
        StmtKind::Assume(e) => push_line(out, depth, &format!("assume ({});", expr(e))),
        StmtKind::Empty => push_line(out, depth, ";"),
        StmtKind::Comment(c) => push_line(out, depth, c),
        StmtKind::Annotation(a) => push_line(out, depth, &a.text),
        StmtKind::Decl(_) | StmtKind::Assign { .. } | StmtKind::Step { .. } | StmtKind::Expr(_) => {
            unreachable!("handled by simple()")
        }
    }
}

/// Emits `head` followed by a body. Returns whether the body was a braced
/// block (so the last line is `}`).
fn branch(out: &mut String, depth: usize, head: &str, body: &Stmt) -> bool {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(head);
    tail(out, depth, body)
}

fn tail(out: &mut String, depth: usize, body: &Stmt) -> bool {
    match &body.kind {
        StmtKind::Block(stmts) => {
            out.push_str(" {\n");
            stmts.iter().for_each(|b| stmt(out, depth + 1, b));
            push_line(out, depth, "}");
            true
        }
        StmtKind::If { .. } if head_is_else(out) => {
            // `else if` stays on one line.
            out.push(' ');
            let mut inner = String::new();
            stmt(&mut inner, depth, body);
            out.push_str(inner.trim_start());
            inner.trim_end().ends_with('}')
        }
        _ => {
            out.push('\n');
            stmt(out, depth + 1, body);
            false
        }
    }
}

fn head_is_else(out: &str) -> bool {
    out.ends_with("else")
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0, false);
    s
}

fn write_expr(out: &mut String, e: &Expr, parent: u8, right: bool) {
    match e {
        Expr::Int { text, .. } => out.push_str(text),
        Expr::Str(s) => out.push_str(s),
        Expr::Var(n) => out.push_str(n),
        Expr::Index(n, i) => {
            out.push_str(n);
            out.push('[');
            write_expr(out, i, 0, false);
            out.push(']');
        }
        Expr::Call(n, args) => {
            out.push_str(n);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0, false);
            }
            out.push(')');
        }
        Expr::Unary(op, inner) => {
            out.push_str(op.symbol());
            let wrap = matches!(**inner, Expr::Binary(..) | Expr::Unary(..));
            if wrap {
                out.push('(');
            }
            write_expr(out, inner, u8::MAX, false);
            if wrap {
                out.push(')');
            }
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let wrap = prec < parent || (prec == parent && right);
            if wrap {
                out.push('(');
            }
            write_expr(out, l, prec, false);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, r, prec, true);
            if wrap {
                out.push(')');
            }
        }
    }
}
