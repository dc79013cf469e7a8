//! Recursive-descent parser for MiniC.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::error::FrontendError;
use super::lexer::{char_literal_value, parse_int_literal, Keyword, Token, TokenKind};
use super::source::Loc;

/// Calls that are built into the verifier rather than resolved to a function.
pub const INTRINSICS: &[&str] = &["nondet_int"];

pub fn is_intrinsic(name: &str) -> bool {
    INTRINSICS.contains(&name)
}

pub fn parse(tokens: &[Token]) -> Result<Ast, FrontendError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        next_site: 0,
    };
    let ast = p.unit()?;
    check_calls(&ast)?;
    check_acyclic(&ast)?;
    Ok(ast)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    next_site: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl<'a> Parser<'a> {
    // --- token cursor -------------------------------------------------------

    fn raw(&self) -> &'a Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn skip_comments(&mut self) {
        while self.raw().kind == TokenKind::PlainComment {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> &'a Token {
        self.skip_comments();
        self.raw()
    }

    fn peek_nth(&mut self, n: usize) -> &'a Token {
        self.skip_comments();
        let mut i = self.pos;
        let mut seen = 0;
        while i < self.toks.len() - 1 {
            if self.toks[i].kind != TokenKind::PlainComment {
                if seen == n {
                    return &self.toks[i];
                }
                seen += 1;
            }
            i += 1;
        }
        &self.toks[self.toks.len() - 1]
    }

    fn bump(&mut self) -> &'a Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.peek().is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<&'a Token> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&format!("`{p}`")]))
        }
    }

    fn expect_ident(&mut self) -> PResult<&'a Token> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&["identifier"]))
        }
    }

    fn unexpected(&mut self, expected: &[&str]) -> FrontendError {
        let t = self.peek();
        FrontendError::Parse {
            loc: t.loc,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.to_string(),
        }
    }

    fn site(&mut self, tok: &Token) -> AnnotationSite {
        let id = self.next_site;
        self.next_site += 1;
        AnnotationSite {
            id,
            text: tok.lexeme.clone(),
            loc: tok.loc,
        }
    }

    // --- items --------------------------------------------------------------

    fn unit(&mut self) -> PResult<Ast> {
        let mut items = Vec::new();
        loop {
            let t = self.raw();
            match t.kind {
                TokenKind::Eof => break,
                TokenKind::PlainComment => {
                    self.pos += 1;
                    items.push(Item::Comment(t.lexeme.clone(), t.loc));
                }
                TokenKind::AnnotationComment => {
                    self.pos += 1;
                    let site = self.site(t);
                    items.push(Item::Annotation(site));
                }
                _ => self.item(&mut items)?,
            }
        }
        Ok(Ast { items })
    }

    fn is_type_start(&mut self) -> bool {
        let t = self.peek();
        [
            Keyword::Void,
            Keyword::Int,
            Keyword::Unsigned,
            Keyword::Signed,
            Keyword::Char,
            Keyword::Const,
        ]
        .iter()
        .any(|&k| t.is_keyword(k))
    }

    /// `[const] (void | [un]signed [int|char] | int | char)`
    fn type_spec(&mut self) -> PResult<(bool, ReturnType)> {
        let is_const = self.eat_keyword(Keyword::Const);
        let ty = if self.eat_keyword(Keyword::Void) {
            ReturnType::Void
        } else if self.eat_keyword(Keyword::Unsigned) {
            if self.eat_keyword(Keyword::Char) {
                ReturnType::Scalar(ScalarType::UnsignedChar)
            } else {
                self.eat_keyword(Keyword::Int);
                ReturnType::Scalar(ScalarType::UnsignedInt)
            }
        } else if self.eat_keyword(Keyword::Signed) {
            if self.eat_keyword(Keyword::Char) {
                ReturnType::Scalar(ScalarType::Char)
            } else {
                self.eat_keyword(Keyword::Int);
                ReturnType::Scalar(ScalarType::Int)
            }
        } else if self.eat_keyword(Keyword::Int) {
            ReturnType::Scalar(ScalarType::Int)
        } else if self.eat_keyword(Keyword::Char) {
            ReturnType::Scalar(ScalarType::Char)
        } else {
            return Err(self.unexpected(&["type"]));
        };
        let is_const = is_const | self.eat_keyword(Keyword::Const);
        Ok((is_const, ty))
    }

    fn item(&mut self, items: &mut Vec<Item>) -> PResult<()> {
        let start = self.peek().loc;
        let is_extern = self.eat_keyword(Keyword::Extern);
        if !self.is_type_start() {
            return Err(self.unexpected(&["declaration"]));
        }
        let (is_const, ty) = self.type_spec()?;
        if self.peek().is_keyword(Keyword::Assume) {
            // Prototype for the built-in path guard, emitted for external checkers.
            let name = self.bump().lexeme.clone();
            self.signature(ty, name)?;
            self.expect_punct(";")?;
            return Ok(());
        }
        let name_tok = self.expect_ident()?;

        if self.peek().is_punct("(") {
            let sig = self.signature(ty, name_tok.lexeme.clone())?;
            if !is_extern && self.peek().is_punct("{") {
                let body = self.block_body()?;
                items.push(Item::Function(FunctionDef {
                    sig,
                    body,
                    loc: start,
                }));
            } else {
                self.expect_punct(";")?;
                if !is_intrinsic(&sig.name) {
                    items.push(Item::Prototype(Prototype {
                        sig,
                        is_extern,
                        loc: start,
                    }));
                }
            }
            return Ok(());
        }

        if is_extern {
            return Err(FrontendError::Unsupported {
                loc: start,
                reason: "extern variables are not supported".into(),
            });
        }
        let ReturnType::Scalar(scalar) = ty else {
            return Err(FrontendError::Parse {
                loc: name_tok.loc,
                expected: vec!["`(`".into()],
                found: "variable of type void".into(),
            });
        };
        for decl in self.declarators(scalar, is_const, name_tok, start)? {
            items.push(Item::Global(decl));
        }
        Ok(())
    }

    fn signature(&mut self, ret: ReturnType, name: String) -> PResult<Signature> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        let mut variadic = false;
        let only_void =
            self.peek().is_keyword(Keyword::Void) && self.peek_nth(1).is_punct(")");
        if only_void {
            self.bump();
        } else if !self.peek().is_punct(")") {
            loop {
                if self.eat_punct("...") {
                    variadic = true;
                    break;
                }
                let (_, ty) = self.type_spec()?;
                let ReturnType::Scalar(ty) = ty else {
                    return Err(self.unexpected(&["parameter type"]));
                };
                let mut kind = ParamKind::Scalar;
                if self.eat_punct("*") {
                    kind = ParamKind::Pointer;
                }
                let pname = if self.peek().kind == TokenKind::Ident {
                    self.bump().lexeme.clone()
                } else {
                    String::new()
                };
                if self.eat_punct("[") {
                    if self.peek().kind == TokenKind::IntLit {
                        self.bump();
                    }
                    self.expect_punct("]")?;
                    kind = if kind == ParamKind::Pointer {
                        ParamKind::PointerArray
                    } else {
                        ParamKind::Array
                    };
                }
                params.push(Param {
                    ty,
                    name: pname,
                    kind,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(Signature {
            ret,
            name,
            params,
            variadic,
        })
    }

    fn declarators(
        &mut self,
        ty: ScalarType,
        is_const: bool,
        first: &Token,
        loc: Loc,
    ) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        let mut name_tok = first;
        loop {
            let mut array_len = None;
            if self.eat_punct("[") {
                let t = self.peek();
                let len = match t.kind {
                    TokenKind::IntLit => parse_int_literal(&t.lexeme),
                    _ => None,
                }
                .filter(|&n| n > 0 && n <= u32::MAX as i128)
                .ok_or_else(|| self.unexpected(&["positive array length"]))?;
                self.bump();
                self.expect_punct("]")?;
                array_len = Some(len as u32);
            }
            let init = if self.eat_punct("=") {
                if self.eat_punct("{") {
                    let mut list = Vec::new();
                    if !self.peek().is_punct("}") {
                        loop {
                            list.push(self.expr()?);
                            if !self.eat_punct(",") || self.peek().is_punct("}") {
                                break;
                            }
                        }
                    }
                    self.expect_punct("}")?;
                    Some(Initializer::List(list))
                } else {
                    Some(Initializer::Expr(self.expr()?))
                }
            } else {
                None
            };
            out.push(VarDecl {
                ty,
                is_const,
                name: name_tok.lexeme.clone(),
                array_len,
                init,
                loc: if out.is_empty() { loc } else { name_tok.loc },
            });
            if self.eat_punct(",") {
                name_tok = self.expect_ident()?;
                continue;
            }
            self.expect_punct(";")?;
            return Ok(out);
        }
    }

    // --- statements ---------------------------------------------------------

    fn block_body(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        loop {
            let t = self.raw();
            match t.kind {
                TokenKind::PlainComment => {
                    self.pos += 1;
                    body.push(Stmt::new(StmtKind::Comment(t.lexeme.clone()), t.loc));
                }
                TokenKind::Punct if t.lexeme == "}" => {
                    self.pos += 1;
                    return Ok(body);
                }
                TokenKind::Eof => return Err(self.unexpected(&["`}`"])),
                _ if self.is_type_start() => {
                    let loc = self.peek().loc;
                    let (is_const, ty) = self.type_spec()?;
                    let ReturnType::Scalar(ty) = ty else {
                        return Err(FrontendError::Parse {
                            loc,
                            expected: vec!["scalar type".into()],
                            found: "`void`".into(),
                        });
                    };
                    let name = self.expect_ident()?;
                    for d in self.declarators(ty, is_const, name, loc)? {
                        let l = d.loc;
                        body.push(Stmt::new(StmtKind::Decl(d), l));
                    }
                }
                _ => body.push(self.stmt()?),
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let t = self.peek();
        let loc = t.loc;
        if t.kind == TokenKind::AnnotationComment {
            self.pos += 1;
            let site = self.site(t);
            return Ok(Stmt::new(StmtKind::Annotation(site), loc));
        }
        if t.is_punct("{") {
            return Ok(Stmt::new(StmtKind::Block(self.block_body()?), loc));
        }
        if t.is_punct(";") {
            self.bump();
            return Ok(Stmt::new(StmtKind::Empty, loc));
        }
        if let TokenKind::Keyword(kw) = t.kind {
            match kw {
                Keyword::If => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then_branch = Box::new(self.stmt()?);
                    let else_branch = if self.eat_keyword(Keyword::Else) {
                        Some(Box::new(self.stmt()?))
                    } else {
                        None
                    };
                    return Ok(Stmt::new(
                        StmtKind::If {
                            cond,
                            then_branch,
                            else_branch,
                        },
                        loc,
                    ));
                }
                Keyword::While => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.stmt()?);
                    return Ok(Stmt::new(StmtKind::While { cond, body }, loc));
                }
                Keyword::For => return self.for_stmt(loc),
                Keyword::Return => {
                    self.bump();
                    let value = if self.peek().is_punct(";") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect_punct(";")?;
                    return Ok(Stmt::new(StmtKind::Return(value), loc));
                }
                Keyword::Assert | Keyword::Assume => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    let kind = if kw == Keyword::Assert {
                        StmtKind::Assert(cond)
                    } else {
                        StmtKind::Assume(cond)
                    };
                    return Ok(Stmt::new(kind, loc));
                }
                _ => {}
            }
        }
        let s = self.simple_stmt()?;
        self.expect_punct(";")?;
        Ok(s)
    }

    fn for_stmt(&mut self, loc: Loc) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let init = if self.peek().is_punct(";") {
            None
        } else if self.is_type_start() {
            let dloc = self.peek().loc;
            let (is_const, ty) = self.type_spec()?;
            let ReturnType::Scalar(ty) = ty else {
                return Err(self.unexpected(&["scalar type"]));
            };
            let name = self.expect_ident()?;
            let mut decls = self.declarators(ty, is_const, name, dloc)?;
            if decls.len() != 1 {
                return Err(FrontendError::Unsupported {
                    loc: dloc,
                    reason: "only one declarator is allowed in a for initializer".into(),
                });
            }
            let d = decls.remove(0);
            // `declarators` consumed the `;`.
            self.pos -= 1;
            Some(Box::new(Stmt::new(StmtKind::Decl(d), dloc)))
        } else {
            Some(Box::new(self.simple_stmt()?))
        };
        self.expect_punct(";")?;
        let cond = if self.peek().is_punct(";") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(";")?;
        let step = if self.peek().is_punct(")") {
            None
        } else {
            Some(Box::new(self.simple_stmt()?))
        };
        self.expect_punct(")")?;
        let body = Box::new(self.stmt()?);
        Ok(Stmt::new(
            StmtKind::For {
                init,
                cond,
                step,
                body,
            },
            loc,
        ))
    }

    /// Assignment, increment/decrement or call, without the trailing `;`.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let loc = self.peek().loc;
        for (p, increment) in [("++", true), ("--", false)] {
            if self.eat_punct(p) {
                let target = self.lvalue()?;
                return Ok(Stmt::new(StmtKind::Step { target, increment }, loc));
            }
        }
        if self.peek().kind != TokenKind::Ident {
            return Err(self.unexpected(&["statement"]));
        }
        if self.peek_nth(1).is_punct("(") {
            let call = self.expr()?;
            if !matches!(call, Expr::Call(..)) {
                return Err(FrontendError::Unsupported {
                    loc,
                    reason: "expression statements must be calls".into(),
                });
            }
            return Ok(Stmt::new(StmtKind::Expr(call), loc));
        }
        let target = self.lvalue()?;
        for (p, increment) in [("++", true), ("--", false)] {
            if self.eat_punct(p) {
                return Ok(Stmt::new(StmtKind::Step { target, increment }, loc));
            }
        }
        let op = match self.peek().lexeme.as_str() {
            "=" => AssignOp::Set,
            "+=" => AssignOp::Add,
            "-=" => AssignOp::Sub,
            "*=" => AssignOp::Mul,
            "/=" => AssignOp::Div,
            "%=" => AssignOp::Rem,
            "&=" => AssignOp::And,
            "|=" => AssignOp::Or,
            "^=" => AssignOp::Xor,
            _ => return Err(self.unexpected(&["assignment operator"])),
        };
        self.bump();
        let value = self.expr()?;
        Ok(Stmt::new(StmtKind::Assign { target, op, value }, loc))
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let name = self.expect_ident()?.lexeme.clone();
        if self.eat_punct("[") {
            let idx = self.expr()?;
            self.expect_punct("]")?;
            Ok(LValue::Index(name, idx))
        } else {
            Ok(LValue::Var(name))
        }
    }

    // --- expressions --------------------------------------------------------

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            let Some(op) = (t.kind == TokenKind::Punct)
                .then(|| BinaryOp::from_symbol(&t.lexeme))
                .flatten()
            else {
                break;
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        if t.kind == TokenKind::Punct {
            let op = match t.lexeme.as_str() {
                "-" => Some(UnaryOp::Neg),
                "!" => Some(UnaryOp::Not),
                "~" => Some(UnaryOp::BitNot),
                "+" => {
                    self.bump();
                    return self.unary();
                }
                _ => None,
            };
            if let Some(op) = op {
                self.bump();
                return Ok(Expr::Unary(op, Box::new(self.unary()?)));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        match t.kind {
            TokenKind::IntLit => {
                self.bump();
                let value = parse_int_literal(&t.lexeme).ok_or_else(|| FrontendError::Lex {
                    loc: t.loc,
                    reason: "malformed integer literal".into(),
                })?;
                Ok(Expr::Int {
                    value,
                    text: t.lexeme.clone(),
                })
            }
            TokenKind::CharLit => {
                self.bump();
                let value = char_literal_value(&t.lexeme).unwrap_or(0);
                Ok(Expr::Int {
                    value,
                    text: t.lexeme.clone(),
                })
            }
            TokenKind::StrLit => {
                self.bump();
                Ok(Expr::Str(t.lexeme.clone()))
            }
            TokenKind::Ident => {
                self.bump();
                let name = t.lexeme.clone();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.peek().is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    Ok(Expr::Call(name, args))
                } else if self.eat_punct("[") {
                    let idx = self.expr()?;
                    self.expect_punct("]")?;
                    Ok(Expr::Index(name, Box::new(idx)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}

/// Parses a standalone expression (used for annotation payloads).
pub fn parse_expr(tokens: &[Token]) -> Result<Expr, FrontendError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        next_site: 0,
    };
    let e = p.expr()?;
    if p.peek().kind != TokenKind::Eof {
        return Err(p.unexpected(&["end of expression"]));
    }
    Ok(e)
}

fn function_calls(f: &FunctionDef) -> Vec<(String, Loc)> {
    let mut out = Vec::new();
    for s in &f.body {
        walk_stmt(s, &mut |st| {
            let loc = st.loc;
            let mut push = |e: &Expr| e.for_each_call(&mut |n| out.push((n.to_string(), loc)));
            match &st.kind {
                StmtKind::Decl(VarDecl {
                    init: Some(Initializer::Expr(e)),
                    ..
                }) => push(e),
                StmtKind::Decl(VarDecl {
                    init: Some(Initializer::List(es)),
                    ..
                }) => es.iter().for_each(&mut push),
                StmtKind::Assign { target, value, .. } => {
                    if let LValue::Index(_, i) = target {
                        push(i);
                    }
                    push(value);
                }
                StmtKind::Step {
                    target: LValue::Index(_, i),
                    ..
                } => push(i),
                StmtKind::Expr(e)
                | StmtKind::If { cond: e, .. }
                | StmtKind::While { cond: e, .. }
                | StmtKind::For { cond: Some(e), .. }
                | StmtKind::Return(Some(e))
                | StmtKind::Assert(e)
                | StmtKind::Assume(e) => push(e),
                _ => {}
            }
        });
    }
    out
}

fn check_calls(ast: &Ast) -> Result<(), FrontendError> {
    let mut seen = BTreeSet::new();
    for f in ast.functions() {
        if !seen.insert(f.name()) {
            return Err(FrontendError::Resolve {
                loc: f.loc,
                reason: format!("function `{}` is defined more than once", f.name()),
            });
        }
    }
    for f in ast.functions() {
        for (callee, loc) in function_calls(f) {
            let known = is_intrinsic(&callee)
                || ast.function(&callee).is_some()
                || ast
                    .prototypes()
                    .any(|p| p.is_extern && p.sig.name == callee);
            if !known {
                return Err(FrontendError::Resolve {
                    loc,
                    reason: format!("call to undefined function `{callee}`"),
                });
            }
        }
    }
    Ok(())
}

fn check_acyclic(ast: &Ast) -> Result<(), FrontendError> {
    let graph: BTreeMap<&str, Vec<(String, Loc)>> = ast
        .functions()
        .map(|f| {
            let calls = function_calls(f)
                .into_iter()
                .filter(|(c, _)| ast.function(c).is_some())
                .collect();
            (f.name(), calls)
        })
        .collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        node: &'a str,
        graph: &'a BTreeMap<&'a str, Vec<(String, Loc)>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Result<(), FrontendError> {
        marks.insert(node, Mark::Active);
        stack.push(node);
        for (callee, loc) in &graph[node] {
            match marks.get(callee.as_str()) {
                Some(Mark::Active) => {
                    let start = stack.iter().position(|n| n == callee).unwrap_or(0);
                    let mut cycle: Vec<String> =
                        stack[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(callee.clone());
                    return Err(FrontendError::Recursion { loc: *loc, cycle });
                }
                Some(Mark::Done) => {}
                None => {
                    let (key, _) = graph.get_key_value(callee.as_str()).expect("defined");
                    visit(key, graph, marks, stack)?;
                }
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    for &name in graph.keys() {
        if !marks.contains_key(name) {
            visit(name, &graph, &mut marks, &mut Vec::new())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::{tokenize, LexOptions};
    use crate::frontend::source::SourceUnit;

    fn parse_src(text: &str) -> Result<Ast, FrontendError> {
        let toks = tokenize(&SourceUnit::new("t.c", text), LexOptions::default())?;
        parse(&toks)
    }

    #[test]
    fn level_skeleton_functions() {
        let src = "void f1(void) {}\nvoid f2(void) {}\nvoid f3(void) {}\n\
                   void f4(void) {}\nvoid f5(void) {}\n\
                   int main(int argc, char *argv[]) { f1(); f2(); f3(); f4(); f5(); return 0; }\n";
        let ast = parse_src(src).unwrap();
        let names: Vec<_> = ast.functions().map(|f| f.name().to_string()).collect();
        assert_eq!(names, ["f1", "f2", "f3", "f4", "f5", "main"]);
        let main = ast.main().unwrap();
        assert_eq!(main.sig.params[1].kind, ParamKind::PointerArray);
    }

    #[test]
    fn direct_recursion_rejected() {
        let err = parse_src("void f(void) { f(); }").unwrap_err();
        assert!(matches!(err, FrontendError::Recursion { ref cycle, .. } if cycle == &["f", "f"]));
    }

    #[test]
    fn mutual_recursion_rejected() {
        let err = parse_src("void a(void); void b(void) { a(); } void a(void) { b(); }")
            .unwrap_err();
        assert!(matches!(err, FrontendError::Recursion { .. }));
    }

    #[test]
    fn assert_statement() {
        let ast = parse_src("void g(void) { assert(1); }").unwrap();
        let g = ast.function("g").unwrap();
        assert_eq!(g.body.len(), 1);
        assert!(matches!(g.body[0].kind, StmtKind::Assert(Expr::Int { value: 1, .. })));
    }

    #[test]
    fn undefined_call_rejected() {
        let err = parse_src("int main(void) { foo(); return 0; }").unwrap_err();
        assert!(matches!(err, FrontendError::Resolve { .. }));
        assert!(parse_src("extern void foo(int x); int main(void) { foo(1); return 0; }").is_ok());
    }

    #[test]
    fn parse_error_has_location_and_expected() {
        let err = parse_src("int main(void) {\n  x = ;\n}").unwrap_err();
        match err {
            FrontendError::Parse { loc, expected, .. } => {
                assert_eq!(loc, Loc::new(2, 7));
                assert_eq!(expected, ["expression"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_short_circuit_shape() {
        let ast = parse_src("int f(int i) { return (i == 1) && i + 2 * 3 < 9 || !i; }").unwrap();
        let StmtKind::Return(Some(e)) = &ast.function("f").unwrap().body[0].kind else {
            panic!()
        };
        assert!(matches!(e, Expr::Binary(BinaryOp::Or, l, _)
            if matches!(**l, Expr::Binary(BinaryOp::And, _, _))));
    }

    #[test]
    fn annotations_become_sites_in_order() {
        let ast = parse_src(
            "//@ DEFINE-TIMER T;\n//@ WCET-FUNCTION [3]\nvoid f(void) {}\n\
             int main(void) {\n//@ RESET-TIMER T\n f();\n//@ ASSERT-TIMER (T <= 3)\n return 0; }",
        )
        .unwrap();
        let sites = ast.annotation_sites();
        assert_eq!(sites.len(), 4);
        assert!(sites.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(sites[3].loc, Loc::new(7, 1));
    }

    #[test]
    fn intrinsic_prototype_is_dropped() {
        let ast = parse_src("extern int nondet_int(int lo, int hi);\nint x;").unwrap();
        assert_eq!(ast.items.len(), 1);
    }

    #[test]
    fn for_with_declaration() {
        let ast = parse_src("int main(void) { for (int i = 0; i < 3; i++) {} return 0; }").unwrap();
        assert!(matches!(
            ast.main().unwrap().body[0].kind,
            StmtKind::For { init: Some(_), .. }
        ));
    }
}
