//! Exhaustive, bounded path exploration.
//!
//! Paths are visited depth-first with nondet values in ascending order, so
//! the first violation found has the lexicographically least choice vector.
//! States already seen at a choice point are not explored again.
//!
//! For parallel runs the tree is first cut into a fixed number of subtrees
//! (independent of the worker count), each explored with its own memo table,
//! and results are combined left to right. Verdicts and path counts therefore
//! do not depend on how many workers ran.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::interp::{Interp, InterpreterState, StateKey, Stop};
use super::lower::Program;
use super::{
    Bounds, BoundLocation, Counterexample, Resource, RuntimeFault, StateSnapshot, Verdict,
    VerifyError, ViolatedProperty,
};

const SUBTREES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub verdict: Verdict,
    pub paths_explored: u64,
}

#[derive(Debug, Clone)]
enum Bad {
    Stop(Stop, Vec<i64>),
    Budget,
}

#[derive(Debug, Clone)]
struct Sub {
    paths: u64,
    bad: Option<Bad>,
}

enum Node {
    Open(InterpreterState),
    Done(Sub),
}

fn settle(it: &Interp, mut s: InterpreterState) -> Node {
    let stop = it.run(&mut s, None);
    match stop {
        Stop::Choice { .. } => Node::Open(s),
        Stop::Finished | Stop::AssumeFailed => Node::Done(Sub { paths: 1, bad: None }),
        other => Node::Done(Sub {
            paths: 1,
            bad: Some(Bad::Stop(other, s.choices)),
        }),
    }
}

fn children(it: &Interp, s: &InterpreterState) -> Vec<InterpreterState> {
    let mut paused = s.clone();
    let Stop::Choice { lo, hi } = it.run(&mut paused, None) else {
        unreachable!("open nodes are paused at a choice");
    };
    (lo..=hi)
        .map(|v| {
            let mut c = paused.clone();
            it.choose(&mut c, v);
            c
        })
        .collect()
}

/// Splits the tree below `root` into at most about [`SUBTREES`] ordered
/// pieces.
fn frontier(it: &Interp, root: InterpreterState) -> Vec<Node> {
    let mut nodes = vec![settle(it, root)];
    loop {
        if let Some(i) = nodes
            .iter()
            .position(|n| matches!(n, Node::Done(Sub { bad: Some(_), .. })))
        {
            nodes.truncate(i + 1);
        }
        let open = nodes.iter().filter(|n| matches!(n, Node::Open(_))).count();
        if open == 0 || nodes.len() >= SUBTREES {
            return nodes;
        }
        let mut next = Vec::with_capacity(nodes.len() * 2);
        let mut iter = nodes.into_iter();
        for n in iter.by_ref() {
            match n {
                Node::Open(s) => {
                    for c in children(it, &s) {
                        next.push(settle(it, c));
                    }
                }
                done => next.push(done),
            }
            if next.len() >= SUBTREES {
                break;
            }
        }
        next.extend(iter);
        nodes = next;
    }
}

fn dfs(it: &Interp, root: InterpreterState, budget: u64, cancelled: &dyn Fn() -> bool) -> Option<Sub> {
    let mut memo: HashSet<StateKey> = HashSet::new();
    let mut stack = vec![root];
    let mut paths = 0u64;
    while let Some(mut s) = stack.pop() {
        if cancelled() {
            return None;
        }
        match it.run(&mut s, None) {
            Stop::Finished | Stop::AssumeFailed => paths += 1,
            Stop::Choice { lo, hi } => {
                if !memo.insert(s.key()) {
                    paths += 1;
                } else {
                    for v in (lo..=hi).rev() {
                        let mut c = s.clone();
                        it.choose(&mut c, v);
                        stack.push(c);
                    }
                }
            }
            other => {
                return Some(Sub {
                    paths: paths + 1,
                    bad: Some(Bad::Stop(other, s.choices)),
                })
            }
        }
        if paths > budget {
            return Some(Sub {
                paths,
                bad: Some(Bad::Budget),
            });
        }
    }
    Some(Sub { paths, bad: None })
}

/// Explores every path of `program` within `bounds` using `workers` threads
/// (0 picks the number of CPUs).
pub fn explore(program: &Program, bounds: &Bounds, workers: usize) -> Result<Exploration, VerifyError> {
    let it = Interp::new(program, bounds);
    let nodes = frontier(&it, it.initial_state());
    let first_bad = AtomicUsize::new(usize::MAX);
    let work = |(i, n): (usize, Node)| -> Option<Sub> {
        let sub = match n {
            Node::Done(sub) => Some(sub),
            Node::Open(s) => dfs(&it, s, bounds.max_paths, &|| {
                first_bad.load(Ordering::Relaxed) < i
            }),
        };
        if let Some(Sub { bad: Some(_), .. }) = &sub {
            first_bad.fetch_min(i, Ordering::Relaxed);
        }
        sub
    };
    let indexed: Vec<(usize, Node)> = nodes.into_iter().enumerate().collect();
    let subs: Vec<Option<Sub>> = if workers == 1 {
        indexed.into_iter().map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| VerifyError::Workers(e.to_string()))?;
        pool.install(|| indexed.into_par_iter().map(work).collect())
    };

    let mut total = 0u64;
    for sub in subs {
        let sub = sub.expect("subtrees before the first violation always finish");
        total += sub.paths;
        if total > bounds.max_paths {
            return Ok(Exploration {
                verdict: budget_exceeded(),
                paths_explored: total,
            });
        }
        if let Some(bad) = sub.bad {
            let verdict = match bad {
                Bad::Budget => budget_exceeded(),
                Bad::Stop(stop, choices) => verdict_for(&it, stop, choices)?,
            };
            return Ok(Exploration {
                verdict,
                paths_explored: total,
            });
        }
    }
    Ok(Exploration {
        verdict: Verdict::Successful,
        paths_explored: total,
    })
}

fn budget_exceeded() -> Verdict {
    Verdict::BoundExceeded {
        resource: Resource::MaxPaths,
        location: None,
    }
}

fn verdict_for(it: &Interp, stop: Stop, choices: Vec<i64>) -> Result<Verdict, VerifyError> {
    let p = it.program;
    Ok(match stop {
        Stop::AssertFailed { .. } => Verdict::Failed(counterexample(p, it.bounds, &choices)?),
        Stop::Fault { func, loc, message } => Verdict::Fault(RuntimeFault {
            file: p.file.clone(),
            line: loc.line,
            function: p.functions[func].name.clone(),
            message,
            nondet_choices: choices,
        }),
        Stop::Bound {
            resource,
            func,
            loc,
        } => Verdict::BoundExceeded {
            resource,
            location: Some(BoundLocation {
                file: p.file.clone(),
                line: loc.line,
                function: p.functions[func].name.clone(),
            }),
        },
        Stop::Finished | Stop::AssumeFailed | Stop::Choice { .. } => {
            unreachable!("not a violation")
        }
    })
}

/// Outcome of re-running a choice vector.
#[derive(Debug, Clone)]
pub struct Replay {
    pub stop: Stop,
    pub states: Vec<StateSnapshot>,
    pub final_state: InterpreterState,
    /// Choices left over when the path ended.
    pub unused_choices: usize,
}

/// Runs `program` concretely, resolving the i-th nondet call with
/// `choices[i]`. Records s₀ and one state per timed event.
pub fn replay(program: &Program, bounds: &Bounds, choices: &[i64]) -> Result<Replay, VerifyError> {
    let it = Interp::new(program, bounds);
    let mut s = it.initial_state();
    let mut states = vec![it.snapshot(&s, None)];
    let mut next = 0;
    loop {
        let stop = it.run(&mut s, Some(&mut states));
        let Stop::Choice { lo, hi } = stop else {
            for (i, st) in states.iter_mut().enumerate() {
                st.index = i;
            }
            return Ok(Replay {
                stop,
                states,
                final_state: s,
                unused_choices: choices.len() - next,
            });
        };
        let Some(&v) = choices.get(next) else {
            return Err(VerifyError::Replay(format!(
                "ran out of choices after {next}"
            )));
        };
        if v < lo || v > hi {
            return Err(VerifyError::Replay(format!(
                "choice {next} = {v} outside [{lo}, {hi}]"
            )));
        }
        it.choose(&mut s, v);
        next += 1;
    }
}

/// Rebuilds the counterexample for a violating choice vector.
pub fn counterexample(program: &Program, bounds: &Bounds, choices: &[i64]) -> Result<Counterexample, VerifyError> {
    let r = replay(program, bounds, choices)?;
    let Stop::AssertFailed { func, loc, text } = r.stop else {
        return Err(VerifyError::Replay(format!(
            "replay did not violate an assertion: {:?}",
            r.stop
        )));
    };
    Ok(Counterexample {
        states: r.states,
        violated: ViolatedProperty {
            file: program.file.clone(),
            line: loc.line,
            function: program.functions[func].name.clone(),
            expr: text,
        },
        nondet_choices: choices.to_vec(),
    })
}

/// Smallest final value of timer `timer` over all complete paths.
/// Assertions are ignored; paths cut by `assume` do not count.
pub fn min_path_value(program: &Program, bounds: &Bounds, timer: usize) -> Result<u64, VerifyError> {
    if timer >= program.timers.len() {
        return Err(VerifyError::UnknownTimer(timer.to_string()));
    }
    let mut it = Interp::new(program, bounds);
    it.check_asserts = false;
    let mut search = MinSearch {
        it: &it,
        timer,
        memo: HashMap::new(),
        paths: 0,
    };
    search
        .go(it.initial_state())?
        .ok_or(VerifyError::NoCompletePath)
}

struct MinSearch<'a, 'p> {
    it: &'a Interp<'p>,
    timer: usize,
    memo: HashMap<StateKey, Option<u64>>,
    paths: u64,
}

impl MinSearch<'_, '_> {
    fn go(&mut self, mut s: InterpreterState) -> Result<Option<u64>, VerifyError> {
        let stop = self.it.run(&mut s, None);
        let leaf = |this: &mut Self| {
            this.paths += 1;
            if this.paths > this.it.bounds.max_paths {
                Err(VerifyError::Aborted(Box::new(budget_exceeded())))
            } else {
                Ok(())
            }
        };
        match stop {
            Stop::Finished => {
                leaf(self)?;
                Ok(s.timer(self.timer))
            }
            Stop::AssumeFailed => {
                leaf(self)?;
                Ok(None)
            }
            Stop::Choice { lo, hi } => {
                let key = s.key();
                if let Some(v) = self.memo.get(&key) {
                    return Ok(*v);
                }
                let mut best: Option<u64> = None;
                for v in lo..=hi {
                    let mut c = s.clone();
                    self.it.choose(&mut c, v);
                    if let Some(x) = self.go(c)? {
                        best = Some(best.map_or(x, |b| b.min(x)));
                    }
                }
                self.memo.insert(key, best);
                Ok(best)
            }
            other => {
                let choices = s.choices.clone();
                Err(VerifyError::Aborted(Box::new(verdict_for(self.it, other, choices)?)))
            }
        }
    }
}
