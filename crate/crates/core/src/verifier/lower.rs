//! Lowering of an instrumented [`Ast`] to a flat, jump-based program.
//!
//! Every variable gets a fixed slot: globals first, then one frame per
//! function. Recursion is rejected by the parser, so a function never has two
//! live activations and a static frame is enough. Calls nested in expressions
//! are hoisted into temporaries; `&&`/`||` with calls on the right become
//! branches so the call only runs when C would run it.

use std::collections::HashMap;

use crate::emit;
use crate::frontend::annotation::const_fold;
use crate::frontend::ast::*;
use crate::frontend::bind::constant_globals;
use crate::frontend::parser::is_intrinsic;
use crate::frontend::source::Loc;
use crate::instrument::echoed_timers;
use crate::timed_model::{TimedEvent, TimerId, TimerWidth};

use super::VerifyError;

/// Static value type. `char` is signed; timers use [`Ty::U64`] at 64-bit
/// width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    I8,
    U8,
    I32,
    U32,
    U64,
}

impl Ty {
    pub fn of(t: ScalarType) -> Ty {
        match t {
            ScalarType::Int => Ty::I32,
            ScalarType::UnsignedInt => Ty::U32,
            ScalarType::Char => Ty::I8,
            ScalarType::UnsignedChar => Ty::U8,
        }
    }

    pub fn promote(self) -> Ty {
        match self {
            Ty::I8 | Ty::U8 => Ty::I32,
            t => t,
        }
    }

    fn rank(self) -> u8 {
        match self.promote() {
            Ty::U64 => 2,
            Ty::U32 => 1,
            _ => 0,
        }
    }

    /// Usual arithmetic conversions.
    pub fn common(a: Ty, b: Ty) -> Ty {
        let (a, b) = (a.promote(), b.promote());
        if a.rank() >= b.rank() {
            a
        } else {
            b
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Ty::I8 | Ty::U8 => 8,
            Ty::I32 | Ty::U32 => 32,
            Ty::U64 => 64,
        }
    }

    pub fn wrap(self, v: i128) -> i128 {
        match self {
            Ty::I8 => v as i8 as i128,
            Ty::U8 => v as u8 as i128,
            Ty::I32 => v as i32 as i128,
            Ty::U32 => v as u32 as i128,
            Ty::U64 => v as u64 as i128,
        }
    }
}

/// Where an array lives: fixed, or read from a reference parameter whose
/// slot holds the base and the next slot the length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrayRef {
    Static { base: u32, len: u32 },
    Param { slot: u32 },
    /// `char *argv[]` of `main`; never backed by memory.
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RExpr {
    Const(i128, Ty),
    Load(u32, Ty),
    Elem(ArrayRef, Box<RExpr>, Ty),
    Timer(usize, Ty),
    Unary(UnaryOp, Box<RExpr>, Ty),
    /// `ty` is the type the operation is performed in.
    Binary(BinaryOp, Box<RExpr>, Box<RExpr>, Ty),
}

impl RExpr {
    pub fn ty(&self) -> Ty {
        match self {
            RExpr::Const(_, t)
            | RExpr::Load(_, t)
            | RExpr::Elem(_, _, t)
            | RExpr::Timer(_, t)
            | RExpr::Unary(_, _, t) => *t,
            RExpr::Binary(op, _, _, t) => {
                if is_boolean(*op) {
                    Ty::I32
                } else {
                    *t
                }
            }
        }
    }
}

fn is_boolean(op: BinaryOp) -> bool {
    use BinaryOp::*;
    matches!(op, Lt | Le | Gt | Ge | Eq | Ne | And | Or)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Place {
    Slot(u32, Ty),
    Elem(ArrayRef, RExpr, Ty),
}

impl Place {
    fn ty(&self) -> Ty {
        match self {
            Place::Slot(_, t) | Place::Elem(_, _, t) => *t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Scalar(RExpr, Ty),
    Array(ArrayRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    /// `place op= value`, computed in `ty`; `op` is `None` for plain stores.
    Store {
        place: Place,
        op: Option<BinaryOp>,
        value: RExpr,
        ty: Ty,
    },
    /// Zero-fills `len` slots starting at `base`.
    Zero { base: u32, len: u32 },
    /// Evaluates for faults only.
    Eval(RExpr),
    Nondet { place: Place, lo: RExpr, hi: RExpr },
    Call { func: usize, args: Vec<Arg>, ret: Option<(u32, Ty)> },
    /// Falls through when `cond` holds, jumps to `target` otherwise.
    Branch { cond: RExpr, target: u32 },
    Jump(u32),
    LoopInit(u32),
    LoopTick(u32),
    Assert { cond: RExpr, text: String },
    Assume(RExpr),
    /// A function's WCET, charged on entry.
    Charge(TimedEvent),
    Reset(TimedEvent),
    Return(Option<RExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instr {
    pub op: Op,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamSlot {
    Scalar(u32, Ty),
    Array(u32),
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<ParamSlot>,
    pub ret: Option<Ty>,
    pub frame_base: u32,
    pub frame_len: u32,
    pub code: Vec<Instr>,
    pub loc: Loc,
    pub wcet: u64,
}

/// A lowered program ready for interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub file: String,
    pub functions: Vec<Function>,
    pub main: usize,
    pub timers: Vec<TimerId>,
    pub timer_ty: Ty,
    pub memory_len: u32,
    /// Global initialisation, run once before `main`.
    pub init: Vec<(u32, i128)>,
}

impl Program {
    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }
}

#[derive(Debug, Clone)]
enum Sym {
    Scalar { slot: u32, ty: Ty, is_const: bool },
    Array { r: ArrayRef, ty: Ty },
    Timer(usize),
}

enum Callee {
    Defined(usize),
    Extern,
    Nondet,
}

struct Lowerer<'a> {
    ast: &'a Ast,
    file: String,
    globals: HashMap<String, Sym>,
    callees: HashMap<String, Callee>,
    signatures: Vec<&'a Signature>,
    consts: std::collections::BTreeMap<String, i128>,
    timers: Vec<TimerId>,
    timer_ty: Ty,
    next_slot: u32,
}

struct FnCx {
    code: Vec<Instr>,
    scopes: Vec<HashMap<String, Sym>>,
    ret: Option<Ty>,
}

type LResult<T> = Result<T, VerifyError>;

/// Lowers `ast` for verification. `width` sets the arithmetic type of timers
/// inside expressions.
pub fn lower(ast: &Ast, file: &str, width: TimerWidth) -> LResult<Program> {
    let timers: Vec<TimerId> = echoed_timers(ast)
        .into_iter()
        .enumerate()
        .map(|(i, n)| TimerId::new(n, i))
        .collect();
    let timer_ty = match width {
        TimerWidth::W32 => Ty::U32,
        TimerWidth::W64 => Ty::U64,
    };
    let mut lw = Lowerer {
        ast,
        file: file.to_string(),
        globals: HashMap::new(),
        callees: HashMap::new(),
        signatures: Vec::new(),
        consts: constant_globals(ast),
        timers,
        timer_ty,
        next_slot: 0,
    };
    for p in ast.prototypes() {
        if ast.function(&p.sig.name).is_none() {
            lw.callees.insert(p.sig.name.clone(), Callee::Extern);
        }
    }
    for f in ast.functions() {
        let id = lw.signatures.len();
        lw.signatures.push(&f.sig);
        lw.callees.insert(f.sig.name.clone(), Callee::Defined(id));
    }
    lw.callees.insert("nondet_int".into(), Callee::Nondet);

    let init = lw.globals_init()?;
    let mut functions = Vec::new();
    for f in ast.functions() {
        functions.push(lw.function(f)?);
    }
    let main = functions
        .iter()
        .position(|f| f.name == "main")
        .ok_or_else(|| VerifyError::Lower {
            loc: Loc::new(1, 1),
            message: "program has no `main` function".into(),
        })?;
    Ok(Program {
        file: lw.file,
        functions,
        main,
        timers: lw.timers,
        timer_ty,
        memory_len: lw.next_slot,
        init,
    })
}

fn err<T>(loc: Loc, message: impl Into<String>) -> LResult<T> {
    Err(VerifyError::Lower {
        loc,
        message: message.into(),
    })
}

impl<'a> Lowerer<'a> {
    fn alloc(&mut self, n: u32) -> u32 {
        let s = self.next_slot;
        self.next_slot += n;
        s
    }

    fn timer_index(&self, name: &str) -> Option<usize> {
        self.timers.iter().position(|t| t.name == name)
    }

    fn globals_init(&mut self) -> LResult<Vec<(u32, i128)>> {
        let mut init = Vec::new();
        let mut known: HashMap<String, i128> = HashMap::new();
        for g in self.ast.globals() {
            if self.globals.contains_key(&g.name) {
                return err(g.loc, format!("`{}` is declared twice", g.name));
            }
            if let Some(i) = self.timer_index(&g.name) {
                self.globals.insert(g.name.clone(), Sym::Timer(i));
                continue;
            }
            let ty = Ty::of(g.ty);
            let fold = |e: &Expr| -> LResult<i128> {
                const_fold(e, &|n| known.get(n).copied())
                    .map(|v| ty.wrap(v))
                    .ok_or_else(|| VerifyError::Lower {
                        loc: g.loc,
                        message: format!("initializer of `{}` is not constant", g.name),
                    })
            };
            match g.array_len {
                None => {
                    let slot = self.alloc(1);
                    if let Some(init_e) = &g.init {
                        let Initializer::Expr(e) = init_e else {
                            return err(g.loc, "list initializer on a scalar");
                        };
                        let v = fold(e)?;
                        init.push((slot, v));
                        known.insert(g.name.clone(), v);
                    } else {
                        known.insert(g.name.clone(), 0);
                    }
                    self.globals.insert(
                        g.name.clone(),
                        Sym::Scalar {
                            slot,
                            ty,
                            is_const: g.is_const,
                        },
                    );
                }
                Some(len) => {
                    let base = self.alloc(len);
                    for (i, v) in array_init(g, len)?.into_iter().enumerate() {
                        let v = match v {
                            InitVal::Expr(e) => fold(e)?,
                            InitVal::Byte(b) => ty.wrap(b),
                        };
                        init.push((base + i as u32, v));
                    }
                    self.globals.insert(
                        g.name.clone(),
                        Sym::Array {
                            r: ArrayRef::Static { base, len },
                            ty,
                        },
                    );
                }
            }
        }
        for (i, t) in self.timers.iter().enumerate() {
            if !self.globals.contains_key(&t.name) {
                self.globals.insert(t.name.clone(), Sym::Timer(i));
            }
        }
        Ok(init)
    }

    fn function(&mut self, f: &FunctionDef) -> LResult<Function> {
        let frame_base = self.next_slot;
        let mut cx = FnCx {
            code: Vec::new(),
            scopes: vec![HashMap::new()],
            ret: match f.sig.ret {
                ReturnType::Void => None,
                ReturnType::Scalar(t) => Some(Ty::of(t)),
            },
        };
        let mut params = Vec::new();
        for p in &f.sig.params {
            let ty = Ty::of(p.ty);
            let (ps, sym) = match p.kind {
                ParamKind::Scalar => {
                    let slot = self.alloc(1);
                    (
                        ParamSlot::Scalar(slot, ty),
                        Sym::Scalar {
                            slot,
                            ty,
                            is_const: false,
                        },
                    )
                }
                ParamKind::Array | ParamKind::Pointer => {
                    let slot = self.alloc(2);
                    (
                        ParamSlot::Array(slot),
                        Sym::Array {
                            r: ArrayRef::Param { slot },
                            ty,
                        },
                    )
                }
                ParamKind::PointerArray => (
                    ParamSlot::Opaque,
                    Sym::Array {
                        r: ArrayRef::Opaque,
                        ty,
                    },
                ),
            };
            params.push(ps);
            cx.scopes[0].insert(p.name.clone(), sym);
        }

        let (wcet, rest) = self.charge_prefix(f)?;
        if wcet > 0 && !self.timers.is_empty() {
            cx.code.push(Instr {
                op: Op::Charge(TimedEvent::call(f.name(), wcet)),
                loc: f.loc,
            });
        }
        for s in rest {
            self.stmt(&mut cx, s)?;
        }
        cx.code.push(Instr {
            op: Op::Return(None),
            loc: f.loc,
        });
        Ok(Function {
            name: f.name().to_string(),
            params,
            ret: cx.ret,
            frame_base,
            frame_len: self.next_slot - frame_base,
            code: cx.code,
            loc: f.loc,
            wcet,
        })
    }

    /// Recognises the `t += d;` prefix that charges a WCET to every timer.
    fn charge_prefix<'s>(&self, f: &'s FunctionDef) -> LResult<(u64, &'s [Stmt])> {
        let mut seen = vec![false; self.timers.len()];
        let mut amount: Option<i128> = None;
        let mut n = 0;
        for s in &f.body {
            let StmtKind::Assign {
                target: LValue::Var(name),
                op: AssignOp::Add,
                value,
            } = &s.kind
            else {
                break;
            };
            let Some(i) = self.timer_index(name) else {
                break;
            };
            let v = const_fold(value, &|c| self.consts.get(c).copied()).ok_or_else(|| {
                VerifyError::Lower {
                    loc: s.loc,
                    message: format!("WCET charged to `{name}` is not a constant"),
                }
            })?;
            if seen[i] {
                return err(s.loc, format!("timer `{name}` charged twice on entry"));
            }
            if amount.is_some_and(|a| a != v) {
                return err(s.loc, "timers are charged different amounts on entry");
            }
            if v < 0 || v > u64::MAX as i128 {
                return err(s.loc, "WCET out of range");
            }
            seen[i] = true;
            amount = Some(v);
            n += 1;
        }
        if n > 0 && seen.iter().any(|s| !s) {
            return err(f.loc, format!("`{}` does not charge every timer", f.name()));
        }
        Ok((amount.unwrap_or(0) as u64, &f.body[n..]))
    }

    fn lookup(&self, cx: &FnCx, name: &str) -> Option<Sym> {
        cx.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name))
            .or_else(|| self.globals.get(name))
            .cloned()
    }

    fn emit(cx: &mut FnCx, op: Op, loc: Loc) {
        cx.code.push(Instr { op, loc });
    }

    fn here(cx: &FnCx) -> u32 {
        cx.code.len() as u32
    }

    fn patch(cx: &mut FnCx, at: u32, to: u32) {
        match &mut cx.code[at as usize].op {
            Op::Branch { target, .. } => *target = to,
            Op::Jump(t) => *t = to,
            _ => unreachable!("patching a non-jump"),
        }
    }

    fn stmt(&mut self, cx: &mut FnCx, s: &Stmt) -> LResult<()> {
        let loc = s.loc;
        match &s.kind {
            StmtKind::Decl(d) => self.decl(cx, d)?,
            StmtKind::Assign { target, op, value } => {
                if let LValue::Var(name) = target {
                    if let Some(Sym::Timer(i)) = self.lookup(cx, name) {
                        return self.timer_write(cx, i, *op, value, loc);
                    }
                }
                let place = self.place(cx, target, loc)?;
                let value = self.expr(cx, value, loc)?;
                let bop = op.binary();
                let ty = match bop {
                    None => place.ty(),
                    Some(b) => op_ty(b, place.ty(), value.ty()),
                };
                Self::emit(
                    cx,
                    Op::Store {
                        place,
                        op: bop,
                        value,
                        ty,
                    },
                    loc,
                );
            }
            StmtKind::Step { target, increment } => {
                if let Some(Sym::Timer(_)) = self.lookup(cx, target.name()) {
                    return err(loc, format!("timer `{}` may only be charged or reset", target.name()));
                }
                let place = self.place(cx, target, loc)?;
                let op = if *increment {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                };
                let ty = op_ty(op, place.ty(), Ty::I32);
                Self::emit(
                    cx,
                    Op::Store {
                        place,
                        op: Some(op),
                        value: RExpr::Const(1, Ty::I32),
                        ty,
                    },
                    loc,
                );
            }
            StmtKind::Expr(e) => match e {
                Expr::Call(name, args) => {
                    self.call(cx, name, args, None, loc)?;
                }
                other => {
                    let v = self.expr(cx, other, loc)?;
                    Self::emit(cx, Op::Eval(v), loc);
                }
            },
            StmtKind::Block(body) => {
                cx.scopes.push(HashMap::new());
                for b in body {
                    self.stmt(cx, b)?;
                }
                cx.scopes.pop();
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.expr(cx, cond, loc)?;
                let br = Self::here(cx);
                Self::emit(cx, Op::Branch { cond: c, target: 0 }, loc);
                self.scoped(cx, then_branch)?;
                match else_branch {
                    None => {
                        let end = Self::here(cx);
                        Self::patch(cx, br, end);
                    }
                    Some(e) => {
                        let j = Self::here(cx);
                        Self::emit(cx, Op::Jump(0), loc);
                        let else_at = Self::here(cx);
                        Self::patch(cx, br, else_at);
                        self.scoped(cx, e)?;
                        let end = Self::here(cx);
                        Self::patch(cx, j, end);
                    }
                }
            }
            StmtKind::While { cond, body } => {
                self.looping(cx, Some(cond), None, body, loc)?;
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                cx.scopes.push(HashMap::new());
                if let Some(i) = init {
                    self.stmt(cx, i)?;
                }
                self.looping(cx, cond.as_ref(), step.as_deref(), body, loc)?;
                cx.scopes.pop();
            }
            StmtKind::Return(e) => {
                let v = match e {
                    None => None,
                    Some(e) => Some(self.expr(cx, e, loc)?),
                };
                if v.is_some() && cx.ret.is_none() {
                    return err(loc, "returning a value from a void function");
                }
                Self::emit(cx, Op::Return(v), loc);
            }
            StmtKind::Assert(e) => {
                let c = self.expr(cx, e, loc)?;
                Self::emit(
                    cx,
                    Op::Assert {
                        cond: c,
                        text: emit::expr(e),
                    },
                    loc,
                );
            }
            StmtKind::Assume(e) => {
                let c = self.expr(cx, e, loc)?;
                Self::emit(cx, Op::Assume(c), loc);
            }
            StmtKind::Empty | StmtKind::Comment(_) => {}
            StmtKind::Annotation(site) => {
                return err(
                    site.loc,
                    "timing annotation left in a program that should be instrumented",
                )
            }
        }
        Ok(())
    }

    fn scoped(&mut self, cx: &mut FnCx, s: &Stmt) -> LResult<()> {
        cx.scopes.push(HashMap::new());
        let r = self.stmt(cx, s);
        cx.scopes.pop();
        r
    }

    fn looping(
        &mut self,
        cx: &mut FnCx,
        cond: Option<&Expr>,
        step: Option<&Stmt>,
        body: &Stmt,
        loc: Loc,
    ) -> LResult<()> {
        let counter = self.alloc(1);
        Self::emit(cx, Op::LoopInit(counter), loc);
        let head = Self::here(cx);
        let exit = match cond {
            Some(c) => {
                let c = self.expr(cx, c, loc)?;
                let br = Self::here(cx);
                Self::emit(cx, Op::Branch { cond: c, target: 0 }, loc);
                Some(br)
            }
            None => None,
        };
        Self::emit(cx, Op::LoopTick(counter), loc);
        self.scoped(cx, body)?;
        if let Some(s) = step {
            self.stmt(cx, s)?;
        }
        Self::emit(cx, Op::Jump(head), loc);
        if let Some(br) = exit {
            let end = Self::here(cx);
            Self::patch(cx, br, end);
        }
        Ok(())
    }

    fn timer_write(
        &mut self,
        cx: &mut FnCx,
        i: usize,
        op: AssignOp,
        value: &Expr,
        loc: Loc,
    ) -> LResult<()> {
        let zero = const_fold(value, &|c| self.consts.get(c).copied()) == Some(0);
        if op == AssignOp::Set && zero {
            Self::emit(
                cx,
                Op::Reset(TimedEvent::Reset {
                    timer: self.timers[i].clone(),
                }),
                loc,
            );
            return Ok(());
        }
        err(
            loc,
            format!(
                "timer `{}` may only be charged on function entry or reset to 0",
                self.timers[i].name
            ),
        )
    }

    fn decl(&mut self, cx: &mut FnCx, d: &VarDecl) -> LResult<()> {
        let ty = Ty::of(d.ty);
        if self.timer_index(&d.name).is_some() {
            return err(d.loc, format!("local `{}` shadows a timer", d.name));
        }
        match d.array_len {
            None => {
                let slot = self.alloc(1);
                let value = match &d.init {
                    None => RExpr::Const(0, ty),
                    Some(Initializer::Expr(e)) => self.expr(cx, e, d.loc)?,
                    Some(Initializer::List(_)) => {
                        return err(d.loc, "list initializer on a scalar")
                    }
                };
                Self::emit(
                    cx,
                    Op::Store {
                        place: Place::Slot(slot, ty),
                        op: None,
                        value,
                        ty,
                    },
                    d.loc,
                );
                cx.scopes.last_mut().unwrap().insert(
                    d.name.clone(),
                    Sym::Scalar {
                        slot,
                        ty,
                        is_const: d.is_const,
                    },
                );
            }
            Some(len) => {
                let base = self.alloc(len);
                Self::emit(cx, Op::Zero { base, len }, d.loc);
                for (i, v) in array_init(d, len)?.into_iter().enumerate() {
                    let value = match v {
                        InitVal::Expr(e) => self.expr(cx, e, d.loc)?,
                        InitVal::Byte(b) => RExpr::Const(b, Ty::I32),
                    };
                    Self::emit(
                        cx,
                        Op::Store {
                            place: Place::Slot(base + i as u32, ty),
                            op: None,
                            value,
                            ty,
                        },
                        d.loc,
                    );
                }
                cx.scopes.last_mut().unwrap().insert(
                    d.name.clone(),
                    Sym::Array {
                        r: ArrayRef::Static { base, len },
                        ty,
                    },
                );
            }
        }
        Ok(())
    }

    fn place(&mut self, cx: &mut FnCx, lv: &LValue, loc: Loc) -> LResult<Place> {
        match lv {
            LValue::Var(name) => match self.lookup(cx, name) {
                Some(Sym::Scalar { slot, ty, is_const }) => {
                    if is_const {
                        return err(loc, format!("assignment to const `{name}`"));
                    }
                    Ok(Place::Slot(slot, ty))
                }
                Some(Sym::Array { .. }) => err(loc, format!("assignment to array `{name}`")),
                Some(Sym::Timer(_)) => err(loc, format!("timer `{name}` used as a variable")),
                None => err(loc, format!("undeclared identifier `{name}`")),
            },
            LValue::Index(name, idx) => match self.lookup(cx, name) {
                Some(Sym::Array { r, ty }) => {
                    let i = self.expr(cx, idx, loc)?;
                    Ok(Place::Elem(r, i, ty))
                }
                Some(_) => err(loc, format!("`{name}` is not an array")),
                None => err(loc, format!("undeclared identifier `{name}`")),
            },
        }
    }

    /// Lowers `e`, hoisting calls into temporaries emitted before the use.
    fn expr(&mut self, cx: &mut FnCx, e: &Expr, loc: Loc) -> LResult<RExpr> {
        Ok(match e {
            Expr::Int { value, text } => RExpr::Const(*value, literal_ty(*value, text)),
            Expr::Str(_) => return err(loc, "string literal used as a value"),
            Expr::Var(name) => match self.lookup(cx, name) {
                Some(Sym::Scalar { slot, ty, .. }) => RExpr::Load(slot, ty),
                Some(Sym::Timer(i)) => RExpr::Timer(i, self.timer_ty),
                Some(Sym::Array { .. }) => {
                    return err(loc, format!("array `{name}` used as a value"))
                }
                None => return err(loc, format!("undeclared identifier `{name}`")),
            },
            Expr::Index(name, idx) => match self.lookup(cx, name) {
                Some(Sym::Array { r, ty }) => {
                    let i = self.expr(cx, idx, loc)?;
                    RExpr::Elem(r, Box::new(i), ty)
                }
                Some(_) => return err(loc, format!("`{name}` is not an array")),
                None => return err(loc, format!("undeclared identifier `{name}`")),
            },
            Expr::Call(name, args) => {
                let ty = self.call_ty(name, loc)?;
                let tmp = self.alloc(1);
                self.call(cx, name, args, Some((tmp, ty)), loc)?;
                RExpr::Load(tmp, ty)
            }
            Expr::Unary(op, inner) => {
                let v = self.expr(cx, inner, loc)?;
                let ty = match op {
                    UnaryOp::Not => Ty::I32,
                    _ => v.ty().promote(),
                };
                RExpr::Unary(*op, Box::new(v), ty)
            }
            Expr::Binary(op @ (BinaryOp::And | BinaryOp::Or), l, r) if r.contains_call() => {
                let lv = self.expr(cx, l, loc)?;
                let tmp = self.alloc(1);
                let is_and = *op == BinaryOp::And;
                let store = |v: RExpr| Op::Store {
                    place: Place::Slot(tmp, Ty::I32),
                    op: None,
                    value: v,
                    ty: Ty::I32,
                };
                let truth = |v: RExpr| {
                    let ty = v.ty();
                    RExpr::Binary(
                        BinaryOp::Ne,
                        Box::new(v),
                        Box::new(RExpr::Const(0, Ty::I32)),
                        Ty::common(ty, Ty::I32),
                    )
                };
                Self::emit(cx, store(RExpr::Const(i128::from(!is_and), Ty::I32)), loc);
                let cond = if is_and {
                    lv
                } else {
                    RExpr::Unary(UnaryOp::Not, Box::new(lv), Ty::I32)
                };
                let br = Self::here(cx);
                Self::emit(cx, Op::Branch { cond, target: 0 }, loc);
                let rv = self.expr(cx, r, loc)?;
                Self::emit(cx, store(truth(rv)), loc);
                let end = Self::here(cx);
                Self::patch(cx, br, end);
                RExpr::Load(tmp, Ty::I32)
            }
            Expr::Binary(op, l, r) => {
                let lv = self.expr(cx, l, loc)?;
                let rv = self.expr(cx, r, loc)?;
                let ty = op_ty(*op, lv.ty(), rv.ty());
                RExpr::Binary(*op, Box::new(lv), Box::new(rv), ty)
            }
        })
    }

    fn call_ty(&self, name: &str, loc: Loc) -> LResult<Ty> {
        match self.callees.get(name) {
            Some(Callee::Defined(id)) => match self.signatures[*id].ret {
                ReturnType::Void => err(loc, format!("void function `{name}` used as a value")),
                ReturnType::Scalar(t) => Ok(Ty::of(t)),
            },
            Some(Callee::Extern) => Ok(self
                .ast
                .prototypes()
                .find(|p| p.sig.name == name)
                .and_then(|p| match p.sig.ret {
                    ReturnType::Scalar(t) => Some(Ty::of(t)),
                    ReturnType::Void => None,
                })
                .unwrap_or(Ty::I32)),
            Some(Callee::Nondet) => Ok(Ty::I32),
            None => err(loc, format!("call to undeclared function `{name}`")),
        }
    }

    fn call(
        &mut self,
        cx: &mut FnCx,
        name: &str,
        args: &[Expr],
        ret: Option<(u32, Ty)>,
        loc: Loc,
    ) -> LResult<()> {
        match self.callees.get(name) {
            None if is_intrinsic(name) => err(loc, format!("unsupported intrinsic `{name}`")),
            None => err(loc, format!("call to undeclared function `{name}`")),
            Some(Callee::Nondet) => {
                let [lo, hi] = args else {
                    return err(loc, "nondet_int takes two arguments");
                };
                let lo = self.expr(cx, lo, loc)?;
                let hi = self.expr(cx, hi, loc)?;
                let (slot, ty) = match ret {
                    Some(r) => r,
                    None => (self.alloc(1), Ty::I32),
                };
                Self::emit(
                    cx,
                    Op::Nondet {
                        place: Place::Slot(slot, ty),
                        lo,
                        hi,
                    },
                    loc,
                );
                Ok(())
            }
            Some(Callee::Extern) => {
                for a in args {
                    if self.is_array_arg(cx, a) || matches!(a, Expr::Str(_)) {
                        continue;
                    }
                    let v = self.expr(cx, a, loc)?;
                    Self::emit(cx, Op::Eval(v), loc);
                }
                if let Some((slot, ty)) = ret {
                    Self::emit(
                        cx,
                        Op::Store {
                            place: Place::Slot(slot, ty),
                            op: None,
                            value: RExpr::Const(0, ty),
                            ty,
                        },
                        loc,
                    );
                }
                Ok(())
            }
            Some(Callee::Defined(id)) => {
                let id = *id;
                let sig = self.signatures[id];
                if args.len() != sig.params.len() {
                    return err(
                        loc,
                        format!(
                            "`{name}` expects {} argument(s), got {}",
                            sig.params.len(),
                            args.len()
                        ),
                    );
                }
                let mut lowered = Vec::with_capacity(args.len());
                for (a, p) in args.iter().zip(&sig.params) {
                    lowered.push(match p.kind {
                        ParamKind::Scalar => {
                            let v = self.expr(cx, a, loc)?;
                            Arg::Scalar(v, Ty::of(p.ty))
                        }
                        _ => {
                            let Expr::Var(an) = a else {
                                return err(loc, format!("argument for `{}` must be an array", p.name));
                            };
                            match self.lookup(cx, an) {
                                Some(Sym::Array { r, .. }) => Arg::Array(r),
                                _ => {
                                    return err(loc, format!("`{an}` is not an array"));
                                }
                            }
                        }
                    });
                }
                Self::emit(
                    cx,
                    Op::Call {
                        func: id,
                        args: lowered,
                        ret,
                    },
                    loc,
                );
                Ok(())
            }
        }
    }

    fn is_array_arg(&self, cx: &FnCx, e: &Expr) -> bool {
        matches!(e, Expr::Var(n) if matches!(self.lookup(cx, n), Some(Sym::Array { .. })))
    }
}

fn op_ty(op: BinaryOp, l: Ty, r: Ty) -> Ty {
    match op {
        BinaryOp::Shl | BinaryOp::Shr => l.promote(),
        BinaryOp::And | BinaryOp::Or => Ty::I32,
        _ => Ty::common(l, r),
    }
}

fn literal_ty(value: i128, text: &str) -> Ty {
    let unsigned = text.to_ascii_lowercase().contains('u');
    let radix = text.starts_with('0') && text.len() > 1;
    if value > u32::MAX as i128 {
        Ty::U64
    } else if unsigned {
        Ty::U32
    } else if value > i32::MAX as i128 {
        if radix {
            Ty::U32
        } else {
            Ty::U64
        }
    } else {
        Ty::I32
    }
}

enum InitVal<'e> {
    Expr(&'e Expr),
    Byte(i128),
}

fn array_init(d: &VarDecl, len: u32) -> LResult<Vec<InitVal<'_>>> {
    let vals: Vec<InitVal> = match &d.init {
        None => Vec::new(),
        Some(Initializer::List(es)) => es.iter().map(InitVal::Expr).collect(),
        Some(Initializer::Expr(Expr::Str(s))) => unquote(s)
            .bytes()
            .chain(std::iter::once(0))
            .map(|b| InitVal::Byte(b as i128))
            .collect(),
        Some(Initializer::Expr(_)) => return err(d.loc, "array initializer must be a list"),
    };
    if vals.len() > len as usize {
        return err(d.loc, format!("too many initializers for `{}`", d.name));
    }
    Ok(vals)
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_ast, LoadOptions};

    fn lower_src(src: &str) -> LResult<Program> {
        let ast = load_ast("t.c", src, &LoadOptions::default()).unwrap();
        lower(&ast, "t.c", TimerWidth::W64)
    }

    #[test]
    fn usual_conversions() {
        assert_eq!(Ty::common(Ty::I8, Ty::U8), Ty::I32);
        assert_eq!(Ty::common(Ty::I32, Ty::U32), Ty::U32);
        assert_eq!(Ty::common(Ty::U32, Ty::U64), Ty::U64);
        assert_eq!(Ty::U32.wrap(-1), u32::MAX as i128);
        assert_eq!(Ty::I8.wrap(200), -56);
    }

    #[test]
    fn charge_prefix_recognised() {
        let p = lower_src(
            "// DEFINE-TIMER A;\nunsigned int A;\n// DEFINE-TIMER B;\nunsigned int B;\n\
             const int d = 7;\nvoid f(void) { A += d; B += d; }\nint main(void) { f(); return 0; }",
        )
        .unwrap();
        let f = &p.functions[p.function_index("f").unwrap()];
        assert_eq!(f.wcet, 7);
        assert!(matches!(f.code[0].op, Op::Charge(_)));
        assert_eq!(p.timers.len(), 2);
    }

    #[test]
    fn partial_charge_rejected() {
        let e = lower_src(
            "// DEFINE-TIMER A;\nunsigned int A;\n// DEFINE-TIMER B;\nunsigned int B;\n\
             void f(void) { A += 3; }\nint main(void) { f(); return 0; }",
        )
        .unwrap_err();
        assert!(e.to_string().contains("every timer"), "{e}");
    }

    #[test]
    fn stray_timer_write_rejected() {
        let e = lower_src(
            "// DEFINE-TIMER A;\nunsigned int A;\nint main(void) { A = 5; return 0; }",
        )
        .unwrap_err();
        assert!(e.to_string().contains("reset to 0"), "{e}");
    }

    #[test]
    fn plain_unsigned_global_is_not_a_timer() {
        let p = lower_src("unsigned int A;\nint main(void) { A = 5; return 0; }").unwrap();
        assert!(p.timers.is_empty());
    }

    #[test]
    fn missing_main_rejected() {
        assert!(lower_src("void f(void) {}").is_err());
    }

    #[test]
    fn literal_types() {
        assert_eq!(literal_ty(5, "5"), Ty::I32);
        assert_eq!(literal_ty(5, "5u"), Ty::U32);
        assert_eq!(literal_ty(0xffffffff, "0xffffffff"), Ty::U32);
        assert_eq!(literal_ty(1 << 40, "1099511627776"), Ty::U64);
    }
}
