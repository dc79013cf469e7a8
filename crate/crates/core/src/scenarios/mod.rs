//! Generated case studies: the bridge-crossing puzzle and the pulse-oximeter
//! reading loop, plus runners that verify them and tabulate the results.

pub mod bridge;
pub mod oximeter;

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::pipeline::{prepare, PipelineError};
use crate::verifier::{explore, min_path_value, Bounds, Exploration, Program, Verdict, VerifyError};

pub use bridge::{gen_bridge, BridgeSpec, Comparison, Strategy};
pub use oximeter::{gen_oximeter, ErrorModel, OximeterSpec, WCET_TABLE};

#[derive(Debug, Clone, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}", .0.render())]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Verify(#[from] VerifyError),
}

/// An exact rational in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Rate {
    pub const ZERO: Rate = Rate { num: 0, den: 1 };
    pub const ONE: Rate = Rate { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, ScenarioError> {
        if den == 0 {
            return Err(ScenarioError::Invalid("rate has a zero denominator".into()));
        }
        if num > den {
            return Err(ScenarioError::Invalid(format!("rate {num}/{den} is above 1")));
        }
        let g = gcd(num, den).max(1);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    /// `floor(self * total)`.
    pub fn of(self, total: u64) -> u64 {
        (u128::from(self.num) * u128::from(total) / u128::from(self.den)) as u64
    }

    /// Percentage with at most three decimals, e.g. `16.6`.
    pub fn percent(self) -> String {
        let den = u128::from(self.den);
        let milli = (u128::from(self.num) * 100_000 + den / 2) / den;
        let mut s = (milli / 1000).to_string();
        let frac = milli % 1000;
        if frac != 0 {
            let digits = format!("{frac:03}");
            let _ = write!(s, ".{}", digits.trim_end_matches('0'));
        }
        s
    }

    /// The rate as a decimal fraction when it has one, `a/b` otherwise.
    pub fn fraction(self) -> String {
        let mut den = self.den;
        let mut scale = 0u32;
        while den.is_multiple_of(10) {
            den /= 10;
            scale += 1;
        }
        let mut extra = 0u32;
        while den.is_multiple_of(2) || den.is_multiple_of(5) {
            den = if den.is_multiple_of(2) { den / 2 } else { den / 5 };
            extra += 1;
        }
        if den != 1 || scale + extra > 18 {
            return format!("{}/{}", self.num, self.den);
        }
        let digits = scale + extra;
        let scaled = u128::from(self.num) * 10u128.pow(digits) / u128::from(self.den);
        if digits == 0 {
            return scaled.to_string();
        }
        let p = 10u128.pow(digits);
        let frac = format!("{:0width$}", scaled % p, width = digits as usize);
        format!("{}.{}", scaled / p, frac.trim_end_matches('0'))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%", self.percent())
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.fraction())
    }
}

fn parse_decimal(s: &str) -> Option<(u64, u64)> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some((int.checked_mul(den)?.checked_add(frac)?, den))
}

impl FromStr for Rate {
    type Err = ScenarioError;

    /// Accepts `0.166`, `16.6%` and `1/6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ScenarioError::Invalid(format!("invalid rate `{t}`"));
        if let Some(p) = t.strip_suffix('%') {
            let (n, d) = parse_decimal(p.trim()).ok_or_else(bad)?;
            return Rate::new(n, d.checked_mul(100).ok_or_else(bad)?);
        }
        if let Some((a, b)) = t.split_once('/') {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return Rate::new(a, b);
        }
        let (n, d) = parse_decimal(t).ok_or_else(bad)?;
        Rate::new(n, d)
    }
}

/// The error rates of the published experiment matrix.
pub fn default_rates() -> Vec<Rate> {
    ["0", "0.166", "0.20", "0.25", "0.333", "0.50", "1.0"]
        .iter()
        .map(|r| r.parse().expect("valid rate"))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub bounds: Bounds,
    /// Worker threads; 0 uses every CPU.
    pub workers: usize,
}

/// One verified program: its source, verdict and cost.
#[derive(Debug, Clone)]
pub struct Run {
    pub file_name: String,
    pub source: String,
    pub program: Program,
    pub exploration: Exploration,
    pub runtime_ms: u64,
}

impl Run {
    pub fn verdict(&self) -> &Verdict {
        &self.exploration.verdict
    }
}

fn verify_generated(file_name: String, source: String, opts: &RunOptions, workers: usize) -> Result<Run, ScenarioError> {
    let start = Instant::now();
    let (program, _) = prepare(&file_name, &source, &Default::default(), opts.bounds.timer_width)?;
    let exploration = explore(&program, &opts.bounds, workers)?;
    Ok(Run {
        file_name,
        source,
        program,
        exploration,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn result_word(v: &Verdict) -> &'static str {
    match v {
        Verdict::Successful => "successful",
        Verdict::Failed(_) => "failed",
        Verdict::BoundExceeded { .. } => "bound exceeded",
        Verdict::Fault(_) => "runtime fault",
    }
}

fn seconds(ms: u64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

fn render_table(header: &[&str], rows: &[Vec<String>], right: &[bool]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .zip(right)
            .map(|((c, w), r)| if *r { format!("{c:>w$}") } else { format!("{c:<w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    let _ = writeln!(out, "{}", line(&header));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub id: usize,
    pub error_rate: Rate,
    pub percent: String,
    pub error_frames: u64,
    pub verdict: String,
    /// Timer value at the violated assertion, for failed rows.
    pub final_timer: Option<u64>,
    pub paths_explored: u64,
    pub runtime_ms: u64,
    /// Set when the row could not be verified.
    pub error: Option<String>,
    #[serde(skip)]
    pub run: Option<Run>,
}

/// Results of the checksum-error matrix, one row per requested rate.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub model: String,
    pub deadline: u64,
    pub frames: u64,
    pub rows: Vec<MatrixRow>,
}

impl ScenarioReport {
    pub fn verdicts(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.verdict.as_str()).collect()
    }

    /// Zeroes every runtime so that reports of identical runs compare equal.
    pub fn without_timings(mut self) -> Self {
        for r in &mut self.rows {
            r.runtime_ms = 0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "Pulse oximeter, {} frames, deadline {} us\nerror model: {}\n\n",
            self.frames, self.deadline, self.model
        );
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let result = match &r.error {
                    Some(e) => format!("error: {e}"),
                    None => r.run.as_ref().map_or(r.verdict.clone(), |run| result_word(run.verdict()).to_string()),
                };
                vec![r.id.to_string(), format!("{}%", r.percent), seconds(r.runtime_ms), result]
            })
            .collect();
        out.push_str(&render_table(
            &["ID", "% Checksum Error", "Time(s)", "Result"],
            &rows,
            &[true, true, true, false],
        ));
        out
    }
}

/// Verifies the oximeter program once per rate. Rows run concurrently and
/// keep the order of `rates`; a row that cannot be verified records its error
/// instead of aborting the matrix.
pub fn run_matrix(base: &OximeterSpec, rates: &[Rate], opts: &RunOptions) -> Result<ScenarioReport, ScenarioError> {
    base.validate()?;
    let row = |(i, rate): (usize, &Rate)| {
        let spec = OximeterSpec {
            error_rate: *rate,
            ..base.clone()
        };
        let outcome = gen_oximeter(&spec).and_then(|src| verify_generated(spec.file_name(), src, opts, 1));
        let mut row = MatrixRow {
            id: i + 1,
            error_rate: *rate,
            percent: rate.percent(),
            error_frames: spec.error_frames(),
            verdict: "error".into(),
            final_timer: None,
            paths_explored: 0,
            runtime_ms: 0,
            error: None,
            run: None,
        };
        match outcome {
            Ok(run) => {
                row.verdict = run.verdict().name().to_string();
                row.final_timer = run.verdict().counterexample().and_then(|c| c.final_timer(oximeter::TIMER));
                row.paths_explored = run.exploration.paths_explored;
                row.runtime_ms = run.runtime_ms;
                row.run = Some(run);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    };
    let rows = if opts.workers == 1 {
        rates.iter().enumerate().map(row).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| ScenarioError::Invalid(format!("cannot start workers: {e}")))?;
        pool.install(|| rates.par_iter().enumerate().map(row).collect())
    };
    Ok(ScenarioReport {
        scenario: "oximeter".into(),
        model: base.model_name(),
        deadline: base.deadline,
        frames: base.frames(),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeRow {
    pub id: usize,
    pub file: String,
    pub assertion: String,
    pub verdict: String,
    pub final_timer: Option<u64>,
    pub paths_explored: u64,
    pub runtime_ms: u64,
    #[serde(skip)]
    pub run: Run,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub scenario: String,
    pub times: Vec<u64>,
    pub strategy: Strategy,
    /// Cheapest total crossing time over every schedule the program allows.
    pub min_total: u64,
    pub rows: Vec<BridgeRow>,
}

impl BridgeReport {
    pub fn without_timings(mut self) -> Self {
        for r in &mut self.rows {
            r.runtime_ms = 0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let times: Vec<String> = self.times.iter().map(u64::to_string).collect();
        let strategy = match self.strategy {
            Strategy::Any => "any schedule",
            Strategy::FastestFerries => "fastest person ferries",
        };
        let mut out = format!(
            "Bridge crossing, times {}, {strategy}\nminimum total time: {}\n\n",
            times.join(" "),
            self.min_total
        );
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.to_string(),
                    r.assertion.clone(),
                    seconds(r.runtime_ms),
                    result_word(r.run.verdict()).to_string(),
                ]
            })
            .collect();
        out.push_str(&render_table(
            &["ID", "Assertion", "Time(s)", "Result"],
            &rows,
            &[true, false, true, false],
        ));
        out
    }
}

/// Verifies one bridge program and reports its verdict.
pub fn run_bridge(spec: &BridgeSpec, opts: &RunOptions) -> Result<Run, ScenarioError> {
    let src = gen_bridge(spec)?;
    verify_generated(spec.file_name(), src, opts, opts.workers)
}

/// The cheapest schedule the bridge program allows, found by the verifier.
pub fn bridge_min_total(spec: &BridgeSpec, opts: &RunOptions) -> Result<u64, ScenarioError> {
    let src = gen_bridge(spec)?;
    let (program, _) = prepare(&spec.file_name(), &src, &Default::default(), opts.bounds.timer_width)?;
    Ok(min_path_value(&program, &opts.bounds, 0)?)
}

/// Verifies the program once with each comparison against `deadline`.
pub fn run_bridge_pair(
    times: &[u64],
    deadline: u64,
    strategy: Strategy,
    comparisons: &[Comparison],
    opts: &RunOptions,
) -> Result<BridgeReport, ScenarioError> {
    let base = BridgeSpec {
        times: times.to_vec(),
        deadline,
        comparison: Comparison::Lt,
        strategy,
    };
    let min_total = bridge_min_total(&base, opts)?;
    let mut rows = Vec::new();
    for (i, c) in comparisons.iter().enumerate() {
        let spec = BridgeSpec {
            comparison: *c,
            ..base.clone()
        };
        let run = run_bridge(&spec, opts)?;
        rows.push(BridgeRow {
            id: i + 1,
            file: run.file_name.clone(),
            assertion: format!("{} {c} {deadline}", bridge::TIMER),
            verdict: run.verdict().name().to_string(),
            final_timer: run.verdict().counterexample().and_then(|x| x.final_timer(bridge::TIMER)),
            paths_explored: run.exploration.paths_explored,
            runtime_ms: run.runtime_ms,
            run,
        });
    }
    Ok(BridgeReport {
        scenario: "bridge".into(),
        times: times.to_vec(),
        strategy,
        min_total,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(s: &str) -> Rate {
        s.parse().unwrap()
    }

    #[test]
    fn rate_forms_agree() {
        assert_eq!(rate("0.5"), rate("50%"));
        assert_eq!(rate("1/2"), rate(".5"));
        assert_eq!(rate("1.0"), Rate::ONE);
        assert!("1.5".parse::<Rate>().is_err());
        assert!("x".parse::<Rate>().is_err());
        assert!("1/0".parse::<Rate>().is_err());
    }

    #[test]
    fn rate_rendering() {
        assert_eq!(rate("0.166").to_string(), "16.6%");
        assert_eq!(rate("0.20").to_string(), "20%");
        assert_eq!(rate("1/3").to_string(), "33.333%");
        assert_eq!(rate("0.166").fraction(), "0.166");
        assert_eq!(rate("0.20").fraction(), "0.2");
        assert_eq!(rate("1/8").fraction(), "0.125");
        assert_eq!(rate("1/3").fraction(), "1/3");
        assert_eq!(Rate::ONE.fraction(), "1");
    }

    #[test]
    fn bridge_pair_verdicts() {
        let opts = RunOptions {
            workers: 1,
            ..Default::default()
        };
        let r = run_bridge_pair(&[5, 10, 20, 25], 60, Strategy::Any, &[Comparison::Lt, Comparison::Ge], &opts)
            .unwrap();
        assert_eq!(r.min_total, 60);
        assert_eq!(r.rows[0].verdict, "failed");
        assert!(r.rows[0].final_timer.unwrap() >= 60);
        assert_eq!(r.rows[1].verdict, "successful");
        assert!(r.to_text().contains("__timing__ >= 60"));
    }

    #[test]
    fn matrix_endpoints() {
        let opts = RunOptions {
            workers: 2,
            ..Default::default()
        };
        let r = run_matrix(&OximeterSpec::default(), &[Rate::ZERO, Rate::ONE], &opts).unwrap();
        assert_eq!(r.verdicts(), ["successful", "failed"]);
        assert!(r.to_text().contains("retry-on-checksum-error"));
        assert!(run_matrix(&OximeterSpec::default(), &[], &opts).unwrap().rows.is_empty());
    }
}
