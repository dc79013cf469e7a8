//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ctimer_core::scenarios::{bridge_min_total, oximeter, RunOptions};
use ctimer_core::verifier::{counterexample, replay, Stop};
use ctimer_core::{
    apply_event, gen_bridge, gen_oximeter, path_duration, prepare, verify_source, BridgeSpec, Comparison,
    DurationMap, ExecutionPath, OximeterSpec, Program, Rate, Strategy, TimedEvent, TimerId, TimerValuation,
    TimerWidth, Verdict, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ctimer(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_ctimer"))
        .args(args)
        .output()
        .expect("ctimer runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn json(o: &Output) -> Result<Value, String> {
    serde_json::from_str(&o.stdout).map_err(|e| format!("bad JSON ({e}): {}{}", o.stdout, o.stderr))
}

/// A failure whose choice vector must replay to the recorded assertion.
struct Failure {
    origin: String,
    program: Program,
    choices: Vec<i64>,
    line: u32,
    expr: String,
}

struct Suite {
    dir: tempfile::TempDir,
    failures: Vec<Failure>,
}

impl Suite {
    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bridge_spec(comparison: Comparison, strategy: Strategy) -> BridgeSpec {
    BridgeSpec {
        times: vec![5, 10, 20, 25],
        deadline: 60,
        comparison,
        strategy,
    }
}

fn choices_of(v: &Value) -> Vec<i64> {
    v["nondet_choices"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_i64).collect())
        .unwrap_or_default()
}

fn criterion_1(s: &mut Suite) -> Outcome {
    let start = Instant::now();
    let lt = gen_bridge(&bridge_spec(Comparison::Lt, Strategy::Any)).map_err(|e| e.to_string())?;
    let ge = gen_bridge(&bridge_spec(Comparison::Ge, Strategy::Any)).map_err(|e| e.to_string())?;
    let lt_path = s.write("bridge_lt60.c", &lt);
    let ge_path = s.write("bridge_ge60.c", &ge);

    let text = ctimer(&["verify", path_str(&lt_path)]);
    ensure!(text.code == 1, "`<60` exit {} (want 1)", text.code);
    ensure!(text.stdout.contains("VERIFICATION FAILED"), "no VERIFICATION FAILED line");
    ensure!(
        text.stdout.contains("assertion\n  __timing__ < 60"),
        "violated property not reported: {}",
        text.stdout
    );

    let out = ctimer(&["verify", path_str(&lt_path), "--json"]);
    let v = json(&out)?;
    ensure!(v["verdict"] == "failed", "`<60` verdict {}", v["verdict"]);
    let last = v["timer_trace"]
        .as_array()
        .and_then(|t| t.last())
        .and_then(|st| st["timers"][0]["value"].as_u64())
        .ok_or("no timer trace")?;
    ensure!(last >= 60, "final timing {last} < 60");

    let (program, _) = prepare(path_str(&lt_path), &lt, &Default::default(), TimerWidth::W64)
        .map_err(|e| e.render())?;
    s.failures.push(Failure {
        origin: "bridge <60".into(),
        program,
        choices: choices_of(&v),
        line: v["violated_property"]["line"].as_u64().unwrap_or(0) as u32,
        expr: v["violated_property"]["expr"].as_str().unwrap_or("").into(),
    });

    let ok = ctimer(&["verify", path_str(&ge_path)]);
    ensure!(ok.code == 0, "`>=60` exit {} (want 0)", ok.code);
    ensure!(ok.stdout.contains("VERIFICATION SUCCESSFUL"), "no VERIFICATION SUCCESSFUL line");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(())
}

fn criterion_2(_: &mut Suite) -> Outcome {
    let opts = RunOptions::default();
    let any = bridge_min_total(&bridge_spec(Comparison::Lt, Strategy::Any), &opts).map_err(|e| e.to_string())?;
    let ferry = bridge_min_total(&bridge_spec(Comparison::Lt, Strategy::FastestFerries), &opts)
        .map_err(|e| e.to_string())?;
    ensure!(any == 60, "minimum {any}, want 60");
    ensure!(ferry == 65, "ferry minimum {ferry}, want 65");
    Ok(())
}

fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

const TIMED_FRAGMENTS: &[&str] = &[
    "// DEFINE-TIMER TIMER1; unsigned int TIMER1; // DEFINE-TIMER TIMER2; unsigned int TIMER2;",
    "// WCET-function [d1] void f1(void) {TIMER1 += d1; TIMER2 += d1;",
    "// WCET-function [d2] void f2(void) {TIMER1 += d2; TIMER2 += d2;",
    "// WCET-function [d3] void f3(void) {TIMER1 += d3; TIMER2 += d3;",
    "// WCET-function [d4] void f4(void) {TIMER1 += d4; TIMER2 += d4;",
    "// WCET-function [d5] void f5(void) {TIMER1 += d5; TIMER2 += d5;",
    "int main(int argc, char *argv[])",
    "// RESET-TIMER TIMER1=0; TIMER1 = 0; // RESET-TIMER TIMER2=0; TIMER2 = 0; f1(); f2(); \
     // ASSERT-TIMER (TIMER1 <= alpha); assert (TIMER1 <= alpha); // RESET-TIMER TIMER1=0; TIMER1 = 0; \
     f3(); f4(); // ASSERT-TIMER (TIMER1 <= beta); assert (TIMER1 <= beta); f5(); \
     // ASSERT-TIMER (TIMER2 <= gamma); assert (TIMER2 <= gamma);",
];

fn criterion_3(s: &mut Suite) -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures");
    let out_path = s.dir.path().join("levels_out.c");
    let out = ctimer(&["translate", path_str(&fixtures.join("levels.c")), "-o", path_str(&out_path)]);
    ensure!(out.code == 0, "translate exit {}: {}", out.code, out.stderr);
    let got = tokens(&fs::read_to_string(&out_path).map_err(|e| e.to_string())?);
    let golden = tokens(&fs::read_to_string(fixtures.join("levels_timed.c")).map_err(|e| e.to_string())?);
    if let Some(i) = got.iter().zip(&golden).position(|(a, b)| a != b) {
        return Err(format!("token {i}: got `{}`, golden `{}`", got[i], golden[i]));
    }
    ensure!(got.len() == golden.len(), "{} tokens, golden has {}", got.len(), golden.len());
    let mut at = 0;
    for f in TIMED_FRAGMENTS {
        let want = tokens(f);
        let found = (at..=got.len().saturating_sub(want.len())).find(|&i| got[i..i + want.len()] == want[..]);
        match found {
            Some(i) => at = i + want.len(),
            None => return Err(format!("structural element missing or out of order: {f}")),
        }
    }
    Ok(())
}

fn criterion_4(_: &mut Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let names = ["f1", "f2", "f3", "f4", "f5"];
    for case in 0..1000 {
        let n = rng.gen_range(1..=4);
        let timers: Vec<TimerId> = (0..n).map(|i| TimerId::new(format!("t{i}"), i)).collect();
        let ds: Vec<u64> = (0..5).map(|_| rng.gen_range(0..1_000_000)).collect();
        let durations: DurationMap = names.iter().zip(&ds).map(|(f, d)| (*f, *d)).collect();
        let random_path = |rng: &mut ChaCha8Rng, resets: bool| -> Vec<TimedEvent> {
            (0..rng.gen_range(0..30))
                .map(|_| match rng.gen_range(0..6) {
                    0 if resets => TimedEvent::Reset {
                        timer: timers[rng.gen_range(0..n)].clone(),
                    },
                    1 => TimedEvent::AssertCheck {
                        expr: "t0 > 0".into(),
                        outcome: true,
                    },
                    _ => {
                        let f = rng.gen_range(0..5);
                        TimedEvent::call(names[f], ds[f])
                    }
                })
                .collect()
        };
        let a = ExecutionPath::new(random_path(&mut rng, true));
        let b = ExecutionPath::new(random_path(&mut rng, true));
        let d = |p: &ExecutionPath| path_duration(p, &durations).map_err(|e| e.to_string());
        ensure!(d(&a.concat(&b))? == d(&a)? + d(&b)?, "case {case}: additivity");

        let start: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << 40)).collect();
        let v0 = TimerValuation::from_values(&timers, &start, TimerWidth::W64);
        let t = rng.gen_range(0..n);
        let after = apply_event(&v0, &TimedEvent::Reset { timer: timers[t].clone() }).map_err(|e| e.to_string())?;
        for i in 0..n {
            let want = if i == t { 0 } else { start[i] };
            ensure!(after.get(i) == Some(want), "case {case}: reset touched timer {i}");
        }

        let calls = random_path(&mut rng, false);
        let mut v = v0.clone();
        for e in &calls {
            v = apply_event(&v, e).map_err(|e| e.to_string())?;
        }
        for i in 0..n {
            for j in 0..n {
                let before = start[i] as i128 - start[j] as i128;
                let now = v.get(i).unwrap() as i128 - v.get(j).unwrap() as i128;
                ensure!(before == now, "case {case}: uniform advance");
            }
        }

        let mut z = TimerValuation::zero(&timers, TimerWidth::W64);
        for e in &calls {
            z = apply_event(&z, e).map_err(|e| e.to_string())?;
        }
        let total = d(&ExecutionPath::new(calls))?;
        ensure!(z.values().iter().all(|&x| x == total), "case {case}: no-reset consistency");
    }

    let ds = [3u64, 5, 7, 11, 13];
    let durations: DurationMap = names.iter().zip(&ds).map(|(f, d)| (*f, *d)).collect();
    let t1 = TimerId::new("t1", 0);
    let t2 = TimerId::new("t2", 1);
    let check = || TimedEvent::AssertCheck {
        expr: "a".into(),
        outcome: true,
    };
    let p = ExecutionPath::new(vec![
        TimedEvent::Reset { timer: t1.clone() },
        TimedEvent::Reset { timer: t2 },
        TimedEvent::call("f1", 3),
        TimedEvent::call("f3", 7),
        check(),
        TimedEvent::Reset { timer: t1 },
        TimedEvent::call("f5", 13),
        TimedEvent::call("f2", 5),
        check(),
        TimedEvent::call("f4", 11),
        check(),
    ]);
    let total = path_duration(&p, &durations).map_err(|e| e.to_string())?;
    ensure!(p.end() == 11, "worked path has {} transitions", p.end());
    ensure!(total == 3 + 7 + 13 + 5 + 11, "worked path sums to {total}");
    Ok(())
}

/// Call-count arithmetic over the WCET table, independent of the program.
fn oximeter_closed_form(error_frames: u64) -> u64 {
    let d: BTreeMap<&str, u64> = oximeter::WCET_TABLE.iter().copied().collect();
    let frames = 3 * 25;
    frames * (5 * d["receiveSensorData"] + d["checkStatus"] + d["checkSum"])
        + error_frames * (d["printCheckSumError"] + 5 * d["receiveSensorData"])
        + 3 * (d["storeHRMSB"] + d["storeHRLSB"] + d["storeSpO2"])
        + d["averageHR"]
        + d["averageSpO2"]
        + d["getHR"]
        + d["getSpO2"]
        + d["printHR"]
        + d["printSpO2"]
        + 2 * d["insertLog"]
}

fn record_oximeter_failure(s: &mut Suite, origin: &str, rate: Rate, row: &Value) -> Outcome {
    let spec = OximeterSpec {
        error_rate: rate,
        ..OximeterSpec::default()
    };
    let src = gen_oximeter(&spec).map_err(|e| e.to_string())?;
    let (program, _) = prepare(&spec.file_name(), &src, &Default::default(), TimerWidth::W64).map_err(|e| e.render())?;
    let exploration = ctimer_core::explore(&program, &Default::default(), 1).map_err(|e| e.to_string())?;
    let Verdict::Failed(c) = &exploration.verdict else {
        return Err(format!("{origin}: row {} did not fail when re-run", row["id"]));
    };
    s.failures.push(Failure {
        origin: origin.into(),
        program,
        choices: c.nondet_choices.clone(),
        line: c.violated.line,
        expr: c.violated.expr.clone(),
    });
    Ok(())
}

fn criterion_5(s: &mut Suite) -> Outcome {
    let baseline = oximeter_closed_form(0);
    ensure!(baseline == 592_300, "closed form gives {baseline}");

    let spec = OximeterSpec::default();
    let src = gen_oximeter(&spec).map_err(|e| e.to_string())?;
    let (program, _) = prepare("oximeter_0pct.c", &src, &Default::default(), TimerWidth::W64).map_err(|e| e.render())?;
    let r = replay(&program, &Default::default(), &[]).map_err(|e| e.to_string())?;
    ensure!(matches!(r.stop, Stop::Finished), "zero-error run stopped with {:?}", r.stop);
    let last = r.states.last().map(|st| st.timers[0].value).unwrap_or(0);
    ensure!(last == baseline, "interpreter final timer {last}, closed form {baseline}");

    let out = ctimer(&["scenario", "oximeter", "--rates", "0,1.0", "--json"]);
    ensure!(out.code == 0, "scenario exit {}: {}", out.code, out.stderr);
    let v = json(&out)?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    ensure!(rows.len() == 2, "{} rows", rows.len());
    ensure!(rows[0]["verdict"] == "successful", "0% verdict {}", rows[0]["verdict"]);
    ensure!(rows[1]["verdict"] == "failed", "100% verdict {}", rows[1]["verdict"]);
    ensure!(
        rows[1]["final_timer"].as_u64() == Some(oximeter_closed_form(75)),
        "100% final timer {}",
        rows[1]["final_timer"]
    );
    record_oximeter_failure(s, "oximeter 100%", Rate::ONE, &rows[1])
}

fn criterion_6(s: &mut Suite) -> Outcome {
    let start = Instant::now();
    let text = ctimer(&["scenario", "oximeter"]);
    ensure!(text.code == 0, "scenario exit {}: {}", text.code, text.stderr);
    ensure!(
        text.stdout.contains("deterministic-count, retry-on-checksum-error"),
        "model name not printed"
    );
    for col in ["ID", "% Checksum Error", "Time(s)", "Result"] {
        ensure!(text.stdout.contains(col), "column `{col}` missing");
    }
    let results: Vec<&str> = text
        .stdout
        .lines()
        .filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit()))
        .filter_map(|l| l.split_whitespace().last())
        .collect();
    let want = ["successful", "successful", "successful", "successful", "successful", "failed", "failed"];
    ensure!(results == want, "result column {results:?}");

    let out = ctimer(&["scenario", "oximeter", "--json"]);
    let v = json(&out)?;
    for row in v["rows"].as_array().ok_or("no rows")? {
        let frames = row["error_frames"].as_u64().unwrap_or(0);
        let expect_ok = oximeter_closed_form(frames) < 1_000_000;
        ensure!(
            (row["verdict"] == "successful") == expect_ok,
            "row {} disagrees with closed form",
            row["id"]
        );
        if row["verdict"] == "failed" {
            let rate: Rate = row["error_rate"].as_str().unwrap_or("").parse().map_err(|e| format!("{e}"))?;
            record_oximeter_failure(s, &format!("matrix row {}", row["id"]), rate, row)?;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "matrix took {elapsed:?}");
    Ok(())
}

#[derive(Debug, Clone)]
enum E {
    Const(i32),
    Var(usize),
    Not(Box<E>),
    Bin(&'static str, Box<E>, Box<E>),
}

#[derive(Debug, Clone)]
enum S {
    Assign(usize, E),
    Nondet(usize, usize),
    If(E, Vec<S>, Vec<S>),
    Assume(E),
}

const VARS: usize = 4;
const OPS: [&str; 13] = ["+", "-", "*", "&", "|", "^", "==", "!=", "<", "<=", ">", ">=", "&&"];

fn gen_expr(rng: &mut ChaCha8Rng, depth: u32) -> E {
    match rng.gen_range(0..if depth == 0 { 2 } else { 5 }) {
        0 => E::Const(rng.gen_range(0..6)),
        1 => E::Var(rng.gen_range(0..VARS)),
        2 => E::Not(Box::new(gen_expr(rng, depth - 1))),
        _ => {
            let op = if rng.gen_bool(0.1) { "||" } else { OPS[rng.gen_range(0..OPS.len())] };
            E::Bin(op, Box::new(gen_expr(rng, depth - 1)), Box::new(gen_expr(rng, depth - 1)))
        }
    }
}

fn gen_block(rng: &mut ChaCha8Rng, depth: u32, sites: &mut usize, max_sites: usize) -> Vec<S> {
    let len = rng.gen_range(1..=if depth == 0 { 3 } else { 5 });
    let mut out = Vec::new();
    for _ in 0..len {
        let pick = rng.gen_range(0..10);
        let s = if pick < 4 && *sites < max_sites {
            *sites += 1;
            S::Nondet(rng.gen_range(0..VARS), *sites - 1)
        } else if pick < 6 && depth > 0 {
            S::If(
                gen_expr(rng, 2),
                gen_block(rng, depth - 1, sites, max_sites),
                gen_block(rng, depth - 1, sites, max_sites),
            )
        } else if pick == 6 {
            S::Assume(gen_expr(rng, 1))
        } else {
            S::Assign(rng.gen_range(0..VARS), gen_expr(rng, 2))
        };
        out.push(s);
    }
    out
}

fn render_expr(e: &E) -> String {
    match e {
        E::Const(c) => c.to_string(),
        E::Var(v) => format!("v{v}"),
        E::Not(x) => format!("!({})", render_expr(x)),
        E::Bin(op, a, b) => format!("({} {op} {})", render_expr(a), render_expr(b)),
    }
}

fn render_block(out: &mut String, block: &[S], indent: usize) {
    let pad = "  ".repeat(indent);
    for s in block {
        match s {
            S::Assign(v, e) => {
                let _ = writeln!(out, "{pad}v{v} = {};", render_expr(e));
            }
            S::Nondet(v, _) => {
                let _ = writeln!(out, "{pad}v{v} = nondet_int(0, 1);");
            }
            S::Assume(e) => {
                let _ = writeln!(out, "{pad}assume ({});", render_expr(e));
            }
            S::If(c, t, f) => {
                let _ = writeln!(out, "{pad}if ({}) {{", render_expr(c));
                render_block(out, t, indent + 1);
                let _ = writeln!(out, "{pad}}} else {{");
                render_block(out, f, indent + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

fn render_program(body: &[S], check: &E) -> String {
    let mut out = String::from("int main(void)\n{\n");
    for v in 0..VARS {
        let _ = writeln!(out, "  int v{v};");
    }
    for v in 0..VARS {
        let _ = writeln!(out, "  v{v} = 0;");
    }
    render_block(&mut out, body, 1);
    let _ = writeln!(out, "  assert ({});\n  return 0;\n}}", render_expr(check));
    out
}

fn eval(e: &E, vars: &[i32]) -> i32 {
    match e {
        E::Const(c) => *c,
        E::Var(v) => vars[*v],
        E::Not(x) => (eval(x, vars) == 0) as i32,
        E::Bin(op, a, b) => {
            let (x, y) = (eval(a, vars), eval(b, vars));
            match *op {
                "+" => x.wrapping_add(y),
                "-" => x.wrapping_sub(y),
                "*" => x.wrapping_mul(y),
                "&" => x & y,
                "|" => x | y,
                "^" => x ^ y,
                "==" => (x == y) as i32,
                "!=" => (x != y) as i32,
                "<" => (x < y) as i32,
                "<=" => (x <= y) as i32,
                ">" => (x > y) as i32,
                ">=" => (x >= y) as i32,
                "&&" => (x != 0 && y != 0) as i32,
                "||" => (x != 0 || y != 0) as i32,
                _ => unreachable!(),
            }
        }
    }
}

/// Runs the program with call site `j` returning bit `j` of `bits`. Returns
/// `None` when an assumption prunes the path, else whether the assertion
/// held and the values the executed calls returned.
fn run_bits(block: &[S], check: &E, bits: u32) -> Option<(bool, Vec<i64>)> {
    fn go(block: &[S], bits: u32, vars: &mut [i32], seen: &mut Vec<i64>) -> bool {
        for s in block {
            match s {
                S::Assign(v, e) => vars[*v] = eval(e, vars),
                S::Nondet(v, site) => {
                    let b = ((bits >> site) & 1) as i32;
                    vars[*v] = b;
                    seen.push(b as i64);
                }
                S::Assume(e) => {
                    if eval(e, vars) == 0 {
                        return false;
                    }
                }
                S::If(c, t, f) => {
                    let branch = if eval(c, vars) != 0 { t } else { f };
                    if !go(branch, bits, vars, seen) {
                        return false;
                    }
                }
            }
        }
        true
    }
    let mut vars = vec![0; VARS];
    let mut seen = Vec::new();
    if !go(block, bits, &mut vars, &mut seen) {
        return None;
    }
    Some((eval(check, &vars) != 0, seen))
}

fn criterion_7(s: &mut Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = VerifyOptions {
        workers: 1,
        ..Default::default()
    };
    let mut failed = 0;
    for case in 0..100 {
        let max_sites = rng.gen_range(1..=12);
        let mut sites = 0;
        let body = gen_block(&mut rng, 2, &mut sites, max_sites);
        let check = gen_expr(&mut rng, 2);
        let src = render_program(&body, &check);

        let mut worst: Option<Vec<i64>> = None;
        for bits in 0..(1u32 << sites) {
            if let Some((false, seen)) = run_bits(&body, &check, bits) {
                if worst.as_ref().is_none_or(|w| seen < *w) {
                    worst = Some(seen);
                }
            }
        }
        let name = format!("random_{case}.c");
        let v = verify_source(&name, &src, &opts).map_err(|e| format!("case {case}: {}\n{src}", e.render()))?;
        match (&v.exploration.verdict, &worst) {
            (Verdict::Successful, None) => {}
            (Verdict::Failed(c), Some(w)) => {
                ensure!(
                    &c.nondet_choices == w,
                    "case {case}: choices {:?}, least failing assignment {w:?}\n{src}",
                    c.nondet_choices
                );
                failed += 1;
                s.failures.push(Failure {
                    origin: format!("random program {case}"),
                    program: v.program.clone(),
                    choices: c.nondet_choices.clone(),
                    line: c.violated.line,
                    expr: c.violated.expr.clone(),
                });
            }
            (got, want) => {
                return Err(format!(
                    "case {case}: verifier says {}, truth table says {}\n{src}",
                    got.name(),
                    if want.is_some() { "failed" } else { "successful" }
                ))
            }
        }
    }
    ensure!(failed > 0 && failed < 100, "degenerate sample: {failed} of 100 programs fail");
    Ok(())
}

fn criterion_8(s: &mut Suite) -> Outcome {
    ensure!(!s.failures.is_empty(), "no failures were recorded by the other criteria");
    let origins: Vec<&str> = s.failures.iter().map(|f| f.origin.as_str()).collect();
    for want in ["bridge", "oximeter 100%", "matrix row", "random program"] {
        ensure!(origins.iter().any(|o| o.starts_with(want)), "no failure recorded from {want}");
    }
    for f in &s.failures {
        let c = counterexample(&f.program, &Default::default(), &f.choices)
            .map_err(|e| format!("{}: replay failed: {e}", f.origin))?;
        ensure!(
            c.violated.line == f.line && c.violated.expr == f.expr,
            "{}: replay reached line {} `{}`, expected line {} `{}`",
            f.origin,
            c.violated.line,
            c.violated.expr,
            f.line,
            f.expr
        );
    }
    Ok(())
}

fn criterion_9(s: &mut Suite) -> Outcome {
    let lt = s.dir.path().join("bridge_lt60.c");
    let ferry = gen_bridge(&bridge_spec(Comparison::Ge, Strategy::FastestFerries)).map_err(|e| e.to_string())?;
    let ferry = s.write("bridge_ferry_ge60.c", &ferry);
    let commands: Vec<Vec<String>> = vec![
        vec!["verify".into(), path_str(&lt).into(), "--json".into()],
        vec!["verify".into(), path_str(&ferry).into(), "--json".into()],
        vec!["scenario".into(), "bridge".into(), "--json".into()],
        vec!["scenario".into(), "oximeter".into(), "--json".into()],
    ];
    for cmd in &commands {
        let mut seen: Option<String> = None;
        for workers in ["1", "1", "2", "8", "0"] {
            let mut args: Vec<&str> = cmd.iter().map(String::as_str).collect();
            args.extend(["--workers", workers]);
            let out = ctimer(&args);
            ensure!(out.code == 0 || out.code == 1, "{args:?} exit {}: {}", out.code, out.stderr);
            match &seen {
                None => seen = Some(out.stdout),
                Some(first) => ensure!(*first == out.stdout, "{args:?} output differs from the first run"),
            }
        }
    }
    Ok(())
}

fn main() {
    let mut suite = Suite {
        dir: tempfile::tempdir().expect("temp dir"),
        failures: Vec::new(),
    };
    let criteria: [(&str, fn(&mut Suite) -> Outcome); 9] = [
        ("bridge verdict pair", criterion_1),
        ("bridge minimum schedules", criterion_2),
        ("translation golden file", criterion_3),
        ("path-duration algebra", criterion_4),
        ("oximeter endpoints", criterion_5),
        ("oximeter matrix", criterion_6),
        ("verifier vs truth table", criterion_7),
        ("counterexample replay", criterion_8),
        ("deterministic JSON", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check(&mut suite) {
            Ok(()) => println!("PASS criterion {}: {name} ({:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
