//! MiniC syntax tree.
//!
//! Every statement and item carries a [`Loc`]; [`Ast::without_locations`]
//! zeroes them for structural comparison.

use super::source::Loc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    Int,
    UnsignedInt,
    Char,
    UnsignedChar,
}

impl ScalarType {
    pub fn c_name(self) -> &'static str {
        match self {
            ScalarType::Int => "int",
            ScalarType::UnsignedInt => "unsigned int",
            ScalarType::Char => "char",
            ScalarType::UnsignedChar => "unsigned char",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnType {
    Void,
    Scalar(ScalarType),
}

impl ReturnType {
    pub fn c_name(self) -> &'static str {
        match self {
            ReturnType::Void => "void",
            ReturnType::Scalar(s) => s.c_name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Initializer {
    Expr(Expr),
    List(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub ty: ScalarType,
    pub is_const: bool,
    pub name: String,
    pub array_len: Option<u32>,
    pub init: Option<Initializer>,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Scalar,
    /// `T name[]`
    Array,
    /// `T *name`
    Pointer,
    /// `T *name[]`
    PointerArray,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: ScalarType,
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub ret: ReturnType,
    pub name: String,
    pub params: Vec<Param>,
    pub variadic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub sig: Signature,
    pub body: Vec<Stmt>,
    pub loc: Loc,
}

impl FunctionDef {
    pub fn name(&self) -> &str {
        &self.sig.name
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prototype {
    pub sig: Signature,
    pub is_extern: bool,
    pub loc: Loc,
}

/// A `//@` comment left in place by the parser; `id` indexes the parse-order
/// list returned by [`Ast::annotation_sites`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSite {
    pub id: usize,
    /// Full comment text including the `//@` prefix.
    pub text: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Global(VarDecl),
    Function(FunctionDef),
    Prototype(Prototype),
    Comment(String, Loc),
    Annotation(AnnotationSite),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Index(n, _) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Rem => "%=",
            AssignOp::And => "&=",
            AssignOp::Or => "|=",
            AssignOp::Xor => "^=",
        }
    }

    pub fn binary(self) -> Option<BinaryOp> {
        Some(match self {
            AssignOp::Set => return None,
            AssignOp::Add => BinaryOp::Add,
            AssignOp::Sub => BinaryOp::Sub,
            AssignOp::Mul => BinaryOp::Mul,
            AssignOp::Div => BinaryOp::Div,
            AssignOp::Rem => BinaryOp::Rem,
            AssignOp::And => BinaryOp::BitAnd,
            AssignOp::Or => BinaryOp::BitOr,
            AssignOp::Xor => BinaryOp::BitXor,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl(VarDecl),
    Assign {
        target: LValue,
        op: AssignOp,
        value: Expr,
    },
    /// `x++` / `x--` in statement position.
    Step { target: LValue, increment: bool },
    /// Expression statement; the parser only admits calls here.
    Expr(Expr),
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Box<Stmt>>,
        body: Box<Stmt>,
    },
    Return(Option<Expr>),
    Assert(Expr),
    /// Path guard: execution stops silently when the condition is false.
    Assume(Expr),
    Empty,
    Comment(String),
    Annotation(AnnotationSite),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
}

impl Stmt {
    pub fn new(kind: StmtKind, loc: Loc) -> Self {
        Self { kind, loc }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
    BitNot,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitXor => "^",
            BinaryOp::BitOr => "|",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// C binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 10,
            BinaryOp::Add | BinaryOp::Sub => 9,
            BinaryOp::Shl | BinaryOp::Shr => 8,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Eq | BinaryOp::Ne => 6,
            BinaryOp::BitAnd => 5,
            BinaryOp::BitXor => 4,
            BinaryOp::BitOr => 3,
            BinaryOp::And => 2,
            BinaryOp::Or => 1,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "%" => BinaryOp::Rem,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "<<" => BinaryOp::Shl,
            ">>" => BinaryOp::Shr,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "&" => BinaryOp::BitAnd,
            "^" => BinaryOp::BitXor,
            "|" => BinaryOp::BitOr,
            "&&" => BinaryOp::And,
            "||" => BinaryOp::Or,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Integer literal; `text` keeps the source spelling (`0x10`, `'a'`).
    Int { value: i128, text: String },
    Str(String),
    Var(String),
    Index(String, Box<Expr>),
    Call(String, Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(value: i128) -> Self {
        Expr::Int {
            value,
            text: value.to_string(),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn contains_call(&self) -> bool {
        match self {
            Expr::Call(..) => true,
            Expr::Int { .. } | Expr::Str(_) | Expr::Var(_) => false,
            Expr::Index(_, e) | Expr::Unary(_, e) => e.contains_call(),
            Expr::Binary(_, l, r) => l.contains_call() || r.contains_call(),
        }
    }

    /// Visits every identifier read by the expression (variables, array
    /// names, callees).
    pub fn for_each_name(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Int { .. } | Expr::Str(_) => {}
            Expr::Var(n) => f(n),
            Expr::Index(n, e) => {
                f(n);
                e.for_each_name(f);
            }
            Expr::Call(n, args) => {
                f(n);
                args.iter().for_each(|a| a.for_each_name(f));
            }
            Expr::Unary(_, e) => e.for_each_name(f),
            Expr::Binary(_, l, r) => {
                l.for_each_name(f);
                r.for_each_name(f);
            }
        }
    }

    pub fn for_each_call(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Int { .. } | Expr::Str(_) | Expr::Var(_) => {}
            Expr::Index(_, e) | Expr::Unary(_, e) => e.for_each_call(f),
            Expr::Call(n, args) => {
                f(n);
                args.iter().for_each(|a| a.for_each_call(f));
            }
            Expr::Binary(_, l, r) => {
                l.for_each_call(f);
                r.for_each_call(f);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ast {
    pub items: Vec<Item>,
}

impl Ast {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn globals(&self) -> impl Iterator<Item = &VarDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Global(g) => Some(g),
            _ => None,
        })
    }

    pub fn prototypes(&self) -> impl Iterator<Item = &Prototype> {
        self.items.iter().filter_map(|i| match i {
            Item::Prototype(p) => Some(p),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name() == name)
    }

    pub fn main(&self) -> Option<&FunctionDef> {
        self.function("main")
    }

    pub fn global(&self, name: &str) -> Option<&VarDecl> {
        self.globals().find(|g| g.name == name)
    }

    /// Whether `name` is declared `extern` and has no definition.
    pub fn is_extern_stub(&self, name: &str) -> bool {
        self.function(name).is_none() && self.prototypes().any(|p| p.sig.name == name)
    }

    /// All `//@` sites in parse order.
    pub fn annotation_sites(&self) -> Vec<&AnnotationSite> {
        let mut out = Vec::new();
        for item in &self.items {
            match item {
                Item::Annotation(site) => out.push(site),
                Item::Function(f) => {
                    for s in &f.body {
                        collect_stmt_sites(s, &mut out);
                    }
                }
                _ => {}
            }
        }
        out.sort_by_key(|s| s.id);
        out
    }

    /// Every identifier the program declares: globals, functions,
    /// prototypes, parameters and locals.
    pub fn declared_names(&self) -> Vec<(String, Loc)> {
        let mut out = Vec::new();
        for item in &self.items {
            match item {
                Item::Global(g) => out.push((g.name.clone(), g.loc)),
                Item::Prototype(p) => out.push((p.sig.name.clone(), p.loc)),
                Item::Function(f) => {
                    out.push((f.sig.name.clone(), f.loc));
                    out.extend(f.sig.params.iter().map(|p| (p.name.clone(), f.loc)));
                    for s in &f.body {
                        collect_decls(s, &mut out);
                    }
                }
                Item::Comment(..) | Item::Annotation(_) => {}
            }
        }
        out
    }

    pub fn without_locations(&self) -> Ast {
        let zero = Loc::default();
        let items = self
            .items
            .iter()
            .map(|item| match item {
                Item::Global(g) => Item::Global(VarDecl { loc: zero, ..g.clone() }),
                Item::Function(f) => Item::Function(FunctionDef {
                    sig: f.sig.clone(),
                    body: f.body.iter().map(strip_stmt).collect(),
                    loc: zero,
                }),
                Item::Prototype(p) => Item::Prototype(Prototype { loc: zero, ..p.clone() }),
                Item::Comment(c, _) => Item::Comment(c.clone(), zero),
                Item::Annotation(a) => Item::Annotation(AnnotationSite {
                    loc: zero,
                    ..a.clone()
                }),
            })
            .collect();
        Ast { items }
    }
}

fn collect_stmt_sites<'a>(stmt: &'a Stmt, out: &mut Vec<&'a AnnotationSite>) {
    walk_stmt(stmt, &mut |s| {
        if let StmtKind::Annotation(site) = &s.kind {
            out.push(site);
        }
    });
}

fn collect_decls(stmt: &Stmt, out: &mut Vec<(String, Loc)>) {
    walk_stmt(stmt, &mut |s| {
        if let StmtKind::Decl(d) = &s.kind {
            out.push((d.name.clone(), d.loc));
        }
    });
}

/// Pre-order traversal over a statement and all nested statements.
pub fn walk_stmt<'a>(stmt: &'a Stmt, f: &mut impl FnMut(&'a Stmt)) {
    f(stmt);
    match &stmt.kind {
        StmtKind::Block(body) => body.iter().for_each(|s| walk_stmt(s, f)),
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => {
            walk_stmt(then_branch, f);
            if let Some(e) = else_branch {
                walk_stmt(e, f);
            }
        }
        StmtKind::While { body, .. } => walk_stmt(body, f),
        StmtKind::For {
            init, step, body, ..
        } => {
            if let Some(i) = init {
                walk_stmt(i, f);
            }
            if let Some(s) = step {
                walk_stmt(s, f);
            }
            walk_stmt(body, f);
        }
        _ => {}
    }
}

fn strip_stmt(stmt: &Stmt) -> Stmt {
    let zero = Loc::default();
    let boxed = |s: &Stmt| Box::new(strip_stmt(s));
    let kind = match &stmt.kind {
        StmtKind::Decl(d) => StmtKind::Decl(VarDecl { loc: zero, ..d.clone() }),
        StmtKind::Block(body) => StmtKind::Block(body.iter().map(strip_stmt).collect()),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => StmtKind::If {
            cond: cond.clone(),
            then_branch: boxed(then_branch),
            else_branch: else_branch.as_deref().map(boxed),
        },
        StmtKind::While { cond, body } => StmtKind::While {
            cond: cond.clone(),
            body: boxed(body),
        },
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => StmtKind::For {
            init: init.as_deref().map(boxed),
            cond: cond.clone(),
            step: step.as_deref().map(boxed),
            body: boxed(body),
        },
        StmtKind::Annotation(a) => StmtKind::Annotation(AnnotationSite {
            loc: zero,
            ..a.clone()
        }),
        other => other.clone(),
    };
    Stmt::new(kind, zero)
}
