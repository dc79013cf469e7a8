//! Concrete small-step interpreter over a lowered [`Program`].

use crate::frontend::ast::{BinaryOp, UnaryOp};
use crate::frontend::source::Loc;
use crate::timed_model::{ExecutionPath, TimedEvent, TimerValuation, TimerWidth};

use super::lower::{Arg, ArrayRef, Op, ParamSlot, Place, Program, RExpr, Ty};
use super::{Bounds, Resource, StateSnapshot, TimerValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    pub func: u32,
    pub pc: u32,
}

/// Program counter, variable store and call stack of one execution, plus the
/// choices and timed events that led to it.
#[derive(Debug, Clone)]
pub struct InterpreterState {
    pub mem: Vec<i64>,
    pub timers: TimerValuation,
    pub frames: Vec<Frame>,
    pub choices: Vec<i64>,
    /// Only filled while recording a trace.
    pub path: ExecutionPath,
}

/// The part of a state that determines its future.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    mem: Vec<i64>,
    timers: Vec<u64>,
    frames: Vec<Frame>,
}

impl InterpreterState {
    pub fn key(&self) -> StateKey {
        StateKey {
            mem: self.mem.clone(),
            timers: self.timers.values().to_vec(),
            frames: self.frames.clone(),
        }
    }

    pub fn timer(&self, index: usize) -> Option<u64> {
        self.timers.get(index)
    }
}

/// Why [`Interp::run`] returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    /// `main` returned.
    Finished,
    AssumeFailed,
    AssertFailed { func: usize, loc: Loc, text: String },
    Fault { func: usize, loc: Loc, message: String },
    Bound { resource: Resource, func: usize, loc: Loc },
    /// Paused on `nondet_int`; resume with [`Interp::choose`].
    Choice { lo: i64, hi: i64 },
}

/// Result of a single [`Interp::step`].
#[derive(Debug, Clone)]
pub enum Step {
    Next(Vec<InterpreterState>),
    Stop(Stop),
}

pub struct Interp<'p> {
    pub program: &'p Program,
    pub bounds: &'p Bounds,
    /// When false, assertions are evaluated but never stop execution.
    pub check_asserts: bool,
}

struct Fault(String);

type Flow = Result<Option<Stop>, Fault>;

impl<'p> Interp<'p> {
    pub fn new(program: &'p Program, bounds: &'p Bounds) -> Self {
        Self {
            program,
            bounds,
            check_asserts: true,
        }
    }

    pub fn width(&self) -> TimerWidth {
        self.bounds.timer_width
    }

    /// s₀: globals initialised, timers zero, `main` entered with `argc = 1`.
    pub fn initial_state(&self) -> InterpreterState {
        let p = self.program;
        let mut mem = vec![0i64; p.memory_len as usize];
        for &(slot, v) in &p.init {
            mem[slot as usize] = v as i64;
        }
        let main = &p.functions[p.main];
        for (i, ps) in main.params.iter().enumerate() {
            match *ps {
                ParamSlot::Scalar(slot, ty) => {
                    mem[slot as usize] = ty.wrap(if i == 0 { 1 } else { 0 }) as i64
                }
                ParamSlot::Array(slot) => mem[slot as usize] = -1,
                ParamSlot::Opaque => {}
            }
        }
        InterpreterState {
            mem,
            timers: TimerValuation::zero(&p.timers, self.width()),
            frames: vec![Frame {
                func: p.main as u32,
                pc: 0,
            }],
            choices: Vec::new(),
            path: ExecutionPath::default(),
        }
    }

    pub fn snapshot(&self, s: &InterpreterState, event: Option<TimedEvent>) -> StateSnapshot {
        let (function, line) = match s.frames.last() {
            Some(f) => {
                let func = &self.program.functions[f.func as usize];
                let line = func
                    .code
                    .get(f.pc as usize)
                    .map_or(func.loc.line, |i| i.loc.line);
                (func.name.clone(), line)
            }
            None => (self.program.functions[self.program.main].name.clone(), 0),
        };
        StateSnapshot {
            index: 0,
            function,
            line,
            event,
            timers: self
                .program
                .timers
                .iter()
                .map(|t| TimerValue {
                    name: t.name.clone(),
                    value: s.timers.get(t.index).unwrap_or(0),
                })
                .collect(),
        }
    }

    /// Executes until the path ends or reaches a nondeterministic choice.
    /// Timed events are appended to `trace` when given.
    pub fn run(
        &self,
        s: &mut InterpreterState,
        mut trace: Option<&mut Vec<StateSnapshot>>,
    ) -> Stop {
        loop {
            if let Some(stop) = self.exec(s, trace.as_deref_mut()) {
                return stop;
            }
        }
    }

    /// Resumes a state paused at [`Stop::Choice`] with `value`.
    pub fn choose(&self, s: &mut InterpreterState, value: i64) {
        let frame = *s.frames.last().expect("paused state has a frame");
        let instr = &self.program.functions[frame.func as usize].code[frame.pc as usize];
        let Op::Nondet { place, .. } = &instr.op else {
            panic!("state is not paused at a nondeterministic choice");
        };
        let Place::Slot(slot, ty) = place else {
            unreachable!("nondet results are stored in a slot");
        };
        s.mem[*slot as usize] = ty.wrap(value as i128) as i64;
        s.choices.push(value);
        s.frames.last_mut().unwrap().pc += 1;
    }

    /// One instruction. A choice point yields one successor per value.
    pub fn step(&self, s: &InterpreterState) -> Step {
        let mut next = s.clone();
        match self.exec(&mut next, None) {
            None => Step::Next(vec![next]),
            Some(Stop::Choice { lo, hi }) => Step::Next(
                (lo..=hi)
                    .map(|v| {
                        let mut c = next.clone();
                        self.choose(&mut c, v);
                        c
                    })
                    .collect(),
            ),
            Some(stop) => Step::Stop(stop),
        }
    }

    fn exec(&self, s: &mut InterpreterState, trace: Option<&mut Vec<StateSnapshot>>) -> Option<Stop> {
        let frame = *s.frames.last()?;
        let func = frame.func as usize;
        let instr = &self.program.functions[func].code[frame.pc as usize];
        match self.exec_op(s, &instr.op, trace) {
            Ok(stop) => stop,
            Err(Fault(message)) => Some(Stop::Fault {
                func,
                loc: instr.loc,
                message,
            }),
        }
        .map(|stop| match stop {
            Stop::Bound { resource, .. } => Stop::Bound {
                resource,
                func,
                loc: instr.loc,
            },
            Stop::AssertFailed { text, .. } => Stop::AssertFailed {
                func,
                loc: instr.loc,
                text,
            },
            other => other,
        })
    }

    fn exec_op(
        &self,
        s: &mut InterpreterState,
        op: &Op,
        trace: Option<&mut Vec<StateSnapshot>>,
    ) -> Flow {
        let bound = |resource| {
            Ok(Some(Stop::Bound {
                resource,
                func: 0,
                loc: Loc::default(),
            }))
        };
        let mut next_pc = true;
        match op {
            Op::Store {
                place,
                op,
                value,
                ty,
            } => {
                let v = self.eval(s, value)?;
                let (slot, pty) = self.locate(s, place)?;
                let v = match op {
                    None => v,
                    Some(b) => {
                        let old = s.mem[slot] as i128;
                        arith(*b, old, v, *ty)?
                    }
                };
                s.mem[slot] = pty.wrap(v) as i64;
            }
            Op::Zero { base, len } => {
                s.mem[*base as usize..(*base + *len) as usize].fill(0);
            }
            Op::Eval(e) => {
                self.eval(s, e)?;
            }
            Op::Nondet { lo, hi, .. } => {
                let lo = self.eval(s, lo)?;
                let hi = self.eval(s, hi)?;
                if hi < lo {
                    return Err(Fault(format!("empty nondet_int range [{lo}, {hi}]")));
                }
                if hi - lo + 1 > self.bounds.nondet_width as i128 {
                    return bound(Resource::NondetWidth);
                }
                return Ok(Some(Stop::Choice {
                    lo: lo as i64,
                    hi: hi as i64,
                }));
            }
            Op::Call { func, args, .. } => {
                if s.frames.len() >= self.bounds.max_depth {
                    return bound(Resource::CallDepth);
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(match a {
                        Arg::Scalar(e, ty) => (ty.wrap(self.eval(s, e)?) as i64, 0),
                        Arg::Array(r) => match self.array(s, r) {
                            Ok((b, l)) => (b, l),
                            Err(_) => (-1, 0),
                        },
                    });
                }
                let callee = &self.program.functions[*func];
                let base = callee.frame_base as usize;
                s.mem[base..base + callee.frame_len as usize].fill(0);
                for (p, (v, len)) in callee.params.iter().zip(vals) {
                    match *p {
                        ParamSlot::Scalar(slot, _) => s.mem[slot as usize] = v,
                        ParamSlot::Array(slot) => {
                            s.mem[slot as usize] = v;
                            s.mem[slot as usize + 1] = len;
                        }
                        ParamSlot::Opaque => {}
                    }
                }
                s.frames.last_mut().unwrap().pc += 1;
                s.frames.push(Frame {
                    func: *func as u32,
                    pc: 0,
                });
                next_pc = false;
            }
            Op::Branch { cond, target } => {
                if self.eval(s, cond)? == 0 {
                    s.frames.last_mut().unwrap().pc = *target;
                    next_pc = false;
                }
            }
            Op::Jump(target) => {
                s.frames.last_mut().unwrap().pc = *target;
                next_pc = false;
            }
            Op::LoopInit(c) => s.mem[*c as usize] = 0,
            Op::LoopTick(c) => {
                let n = s.mem[*c as usize] + 1;
                if n as u64 > self.bounds.unwind {
                    return bound(Resource::Unwind);
                }
                s.mem[*c as usize] = n;
            }
            Op::Assert { cond, text } => {
                let holds = self.eval(s, cond)? != 0;
                if let Some(t) = trace {
                    let ev = TimedEvent::AssertCheck {
                        expr: text.clone(),
                        outcome: holds,
                    };
                    s.path.push(ev.clone());
                    t.push(self.snapshot(s, Some(ev)));
                }
                if !holds && self.check_asserts {
                    return Ok(Some(Stop::AssertFailed {
                        func: 0,
                        loc: Loc::default(),
                        text: text.clone(),
                    }));
                }
            }
            Op::Assume(cond) => {
                if self.eval(s, cond)? == 0 {
                    return Ok(Some(Stop::AssumeFailed));
                }
            }
            Op::Charge(ev) | Op::Reset(ev) => {
                s.timers
                    .apply(ev)
                    .map_err(|e| Fault(format!("timer overflow: {e}")))?;
                if let Some(t) = trace {
                    s.path.push(ev.clone());
                    t.push(self.snapshot(s, Some(ev.clone())));
                }
            }
            Op::Return(value) => {
                let frame = *s.frames.last().unwrap();
                let callee = &self.program.functions[frame.func as usize];
                let v = match value {
                    Some(e) => self.eval(s, e)?,
                    None => 0,
                };
                let v = callee.ret.map_or(0, |t| t.wrap(v));
                let base = callee.frame_base as usize;
                s.mem[base..base + callee.frame_len as usize].fill(0);
                s.frames.pop();
                let Some(caller) = s.frames.last() else {
                    return Ok(Some(Stop::Finished));
                };
                let code = &self.program.functions[caller.func as usize].code;
                if let Op::Call {
                    ret: Some((slot, ty)),
                    ..
                } = &code[caller.pc as usize - 1].op
                {
                    s.mem[*slot as usize] = ty.wrap(v) as i64;
                }
                next_pc = false;
            }
        }
        if next_pc {
            s.frames.last_mut().unwrap().pc += 1;
        }
        Ok(None)
    }

    fn array(&self, s: &InterpreterState, r: &ArrayRef) -> Result<(i64, i64), Fault> {
        match r {
            ArrayRef::Static { base, len } => Ok((*base as i64, *len as i64)),
            ArrayRef::Param { slot } => Ok((s.mem[*slot as usize], s.mem[*slot as usize + 1])),
            ArrayRef::Opaque => Err(Fault("access to argv, which is not modelled".into())),
        }
    }

    fn element(&self, s: &InterpreterState, r: &ArrayRef, index: i128) -> Result<usize, Fault> {
        let (base, len) = self.array(s, r)?;
        if base < 0 || index < 0 || index >= len as i128 {
            return Err(Fault(format!(
                "array index {index} out of bounds [0, {len})"
            )));
        }
        Ok((base as i128 + index) as usize)
    }

    fn locate(&self, s: &InterpreterState, p: &Place) -> Result<(usize, Ty), Fault> {
        match p {
            Place::Slot(slot, ty) => Ok((*slot as usize, *ty)),
            Place::Elem(r, idx, ty) => {
                let i = self.eval(s, idx)?;
                Ok((self.element(s, r, i)?, *ty))
            }
        }
    }

    fn eval(&self, s: &InterpreterState, e: &RExpr) -> Result<i128, Fault> {
        Ok(match e {
            RExpr::Const(v, ty) => ty.wrap(*v),
            RExpr::Load(slot, _) => s.mem[*slot as usize] as i128,
            RExpr::Elem(r, idx, _) => {
                let i = self.eval(s, idx)?;
                s.mem[self.element(s, r, i)?] as i128
            }
            RExpr::Timer(i, ty) => ty.wrap(s.timers.get(*i).unwrap_or(0) as i128),
            RExpr::Unary(op, inner, ty) => {
                let v = self.eval(s, inner)?;
                match op {
                    UnaryOp::Neg => ty.wrap(-ty.wrap(v)),
                    UnaryOp::Not => i128::from(v == 0),
                    UnaryOp::BitNot => ty.wrap(!ty.wrap(v)),
                }
            }
            RExpr::Binary(BinaryOp::And, l, r, _) => {
                i128::from(self.eval(s, l)? != 0 && self.eval(s, r)? != 0)
            }
            RExpr::Binary(BinaryOp::Or, l, r, _) => {
                i128::from(self.eval(s, l)? != 0 || self.eval(s, r)? != 0)
            }
            RExpr::Binary(op, l, r, ty) => {
                let a = self.eval(s, l)?;
                let b = self.eval(s, r)?;
                arith(*op, a, b, *ty)?
            }
        })
    }
}

/// `a op b` with both operands converted to `ty`, C style.
fn arith(op: BinaryOp, a: i128, b: i128, ty: Ty) -> Result<i128, Fault> {
    use BinaryOp::*;
    let shift = matches!(op, Shl | Shr);
    let a = ty.wrap(a);
    let b = if shift { b } else { ty.wrap(b) };
    Ok(match op {
        Mul => ty.wrap(a * b),
        Div | Rem => {
            if b == 0 {
                return Err(Fault("division by zero".into()));
            }
            ty.wrap(if op == Div { a / b } else { a % b })
        }
        Add => ty.wrap(a + b),
        Sub => ty.wrap(a - b),
        Shl | Shr => {
            if b < 0 || b >= ty.bits() as i128 {
                return Err(Fault(format!("shift by {b} out of range")));
            }
            if op == Shl {
                ty.wrap(a << b)
            } else {
                a >> b
            }
        }
        Lt => i128::from(a < b),
        Le => i128::from(a <= b),
        Gt => i128::from(a > b),
        Ge => i128::from(a >= b),
        Eq => i128::from(a == b),
        Ne => i128::from(a != b),
        BitAnd => ty.wrap(a & b),
        BitXor => ty.wrap(a ^ b),
        BitOr => ty.wrap(a | b),
        And => i128::from(a != 0 && b != 0),
        Or => i128::from(a != 0 || b != 0),
    })
}
