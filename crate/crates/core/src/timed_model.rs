//! Timers, function durations, timed events and execution paths.
//!
//! A timed program is an ordinary program whose transitions are labelled by
//! function calls, timer resets and timer assertions. Calls cost their WCET;
//! resets and assertions cost nothing. Every call advances all timers by the
//! same amount.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TimerId {
    pub name: String,
    /// Position in definition order.
    pub index: usize,
}

impl TimerId {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        Self {
            name: name.into(),
            index,
        }
    }
}

impl fmt::Display for TimerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub enum TimerWidth {
    W32,
    #[default]
    W64,
}

impl TimerWidth {
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            32 => Some(TimerWidth::W32),
            64 => Some(TimerWidth::W64),
            _ => None,
        }
    }

    pub fn max(self) -> u64 {
        match self {
            TimerWidth::W32 => u32::MAX as u64,
            TimerWidth::W64 => u64::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("no duration known for function `{0}`")]
    UnknownFunction(String),
    #[error("timer `{timer}` overflows its {bits}-bit range")]
    Overflow { timer: String, bits: u32 },
    #[error("path duration overflows")]
    DurationOverflow,
    #[error("unknown timer index {0}")]
    UnknownTimer(usize),
}

/// D: worst-case duration of every function, in abstract time units.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DurationMap(BTreeMap<String, u64>);

impl DurationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, function: impl Into<String>, duration: u64) {
        self.0.insert(function.into(), duration);
    }

    pub fn get(&self, function: &str) -> Option<u64> {
        self.0.get(function).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for DurationMap {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimedEvent {
    Call { function: String, duration: u64 },
    Reset { timer: TimerId },
    AssertCheck { expr: String, outcome: bool },
}

impl TimedEvent {
    pub fn call(function: impl Into<String>, duration: u64) -> Self {
        TimedEvent::Call {
            function: function.into(),
            duration,
        }
    }
}

impl fmt::Display for TimedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimedEvent::Call { function, duration } => write!(f, "call {function} (+{duration})"),
            TimedEvent::Reset { timer } => write!(f, "reset {timer}"),
            TimedEvent::AssertCheck { expr, outcome } => {
                write!(f, "assert {expr} ({})", if *outcome { "holds" } else { "violated" })
            }
        }
    }
}

/// π[n..m]: a finite sequence of timed events between states `start` and `end()`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExecutionPath {
    pub start: usize,
    pub events: Vec<TimedEvent>,
}

impl ExecutionPath {
    pub fn new(events: Vec<TimedEvent>) -> Self {
        Self { start: 0, events }
    }

    pub fn end(&self) -> usize {
        self.start + self.events.len()
    }

    pub fn push(&mut self, e: TimedEvent) {
        self.events.push(e);
    }

    /// `self ++ other`, re-based so `other` starts where `self` ends.
    pub fn concat(&self, other: &ExecutionPath) -> ExecutionPath {
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        ExecutionPath {
            start: self.start,
            events,
        }
    }
}

pub fn event_duration(e: &TimedEvent, durations: &DurationMap) -> Result<u64, ModelError> {
    match e {
        TimedEvent::Call { function, .. } => durations
            .get(function)
            .ok_or_else(|| ModelError::UnknownFunction(function.clone())),
        TimedEvent::Reset { .. } | TimedEvent::AssertCheck { .. } => Ok(0),
    }
}

/// D(π[n..m]): the sum of event durations along the path.
pub fn path_duration(p: &ExecutionPath, durations: &DurationMap) -> Result<u64, ModelError> {
    p.events.iter().try_fold(0u64, |acc, e| {
        acc.checked_add(event_duration(e, durations)?)
            .ok_or(ModelError::DurationOverflow)
    })
}

/// Current value of every timer, indexed by [`TimerId::index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TimerValuation {
    values: Vec<u64>,
    #[serde(skip)]
    names: Vec<String>,
    #[serde(skip)]
    width: TimerWidth,
}

impl TimerValuation {
    pub fn zero(timers: &[TimerId], width: TimerWidth) -> Self {
        let mut names = vec![String::new(); timers.len()];
        for t in timers {
            names[t.index] = t.name.clone();
        }
        Self {
            values: vec![0; timers.len()],
            names,
            width,
        }
    }

    pub fn from_values(timers: &[TimerId], values: &[u64], width: TimerWidth) -> Self {
        let mut v = Self::zero(timers, width);
        v.values.copy_from_slice(values);
        v
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Option<u64> {
        self.values.get(index).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> TimerWidth {
        self.width
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Sets one timer, checking the configured width.
    pub fn set(&mut self, index: usize, value: u64) -> Result<(), ModelError> {
        if value > self.width.max() {
            return Err(self.overflow(index));
        }
        let slot = self
            .values
            .get_mut(index)
            .ok_or(ModelError::UnknownTimer(index))?;
        *slot = value;
        Ok(())
    }

    /// In-place form of [`apply_event`]; leaves `self` unchanged on error.
    pub fn apply(&mut self, e: &TimedEvent) -> Result<(), ModelError> {
        match e {
            TimedEvent::Call { duration, .. } => {
                let max = self.width.max();
                if let Some(i) = self
                    .values
                    .iter()
                    .position(|&v| v.checked_add(*duration).is_none_or(|s| s > max))
                {
                    return Err(self.overflow(i));
                }
                self.values.iter_mut().for_each(|v| *v += duration);
                Ok(())
            }
            TimedEvent::Reset { timer } => self.set(timer.index, 0),
            TimedEvent::AssertCheck { .. } => Ok(()),
        }
    }

    fn overflow(&self, index: usize) -> ModelError {
        ModelError::Overflow {
            timer: self.names.get(index).cloned().unwrap_or_default(),
            bits: match self.width {
                TimerWidth::W32 => 32,
                TimerWidth::W64 => 64,
            },
        }
    }
}

pub fn apply_event(v: &TimerValuation, e: &TimedEvent) -> Result<TimerValuation, ModelError> {
    let mut next = v.clone();
    next.apply(e)?;
    Ok(next)
}
