use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use ctimer_core::scenarios::{BridgeReport, RunOptions};
use ctimer_core::{
    format_counterexample, gen_bridge, gen_oximeter, run_bridge_pair, run_matrix, translate, verify_source,
    BridgeSpec, Comparison, Diagnostic, ErrorModel, OximeterSpec, Rate, Strategy, TimerWidth, Verdict,
    VerdictReport, VerifyOptions,
};

use crate::{BoundArgs, Command, ErrorModelArg, OutputArgs, Scenario, StrategyArg};

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Translate {
            input,
            output,
            defines,
        } => cmd_translate(&input, output.as_deref(), defines),
        Command::Verify {
            input,
            bounds,
            defines,
            output,
        } => cmd_verify(&input, &bounds, defines, &output),
        Command::Scenario { scenario } => cmd_scenario(scenario),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn display_name(path: &Path) -> String {
    path.display().to_string()
}

fn warn(file: &str, warnings: &[Diagnostic]) {
    for w in warnings {
        eprintln!("{}", w.render(file));
    }
}

fn bounds(args: &BoundArgs) -> ctimer_core::Bounds {
    ctimer_core::Bounds {
        unwind: args.unwind,
        max_paths: args.max_paths,
        timer_width: if args.timer_width == "32" {
            TimerWidth::W32
        } else {
            TimerWidth::W64
        },
        ..Default::default()
    }
}

fn cmd_translate(input: &Path, output: Option<&Path>, defines: Vec<String>) -> Result<u8> {
    let text = read(input)?;
    let file = display_name(input);
    let defines: BTreeSet<String> = defines.into_iter().collect();
    let t = translate(&file, &text, &defines).map_err(|e| anyhow!(e.render()))?;
    warn(&file, &t.warnings);
    match output {
        Some(out) => fs::write(out, &t.c).with_context(|| format!("cannot write `{}`", out.display()))?,
        None => print!("{}", t.c),
    }
    Ok(0)
}

fn cmd_verify(input: &Path, args: &BoundArgs, defines: Vec<String>, out: &OutputArgs) -> Result<u8> {
    let text = read(input)?;
    let file = display_name(input);
    let opts = VerifyOptions {
        defines: defines.into_iter().collect(),
        bounds: bounds(args),
        workers: args.workers,
    };
    let start = Instant::now();
    let v = verify_source(&file, &text, &opts).map_err(|e| anyhow!(e.render()))?;
    let elapsed = start.elapsed().as_millis() as u64;
    warn(&file, &v.warnings);
    let verdict = &v.exploration.verdict;
    if out.json {
        let ms = if out.timings { elapsed } else { 0 };
        println!("{}", VerdictReport::new(&file, &v.exploration, ms).to_json());
    } else {
        match verdict {
            Verdict::Successful => {}
            Verdict::Failed(c) => println!("{}", format_counterexample(c)),
            Verdict::BoundExceeded { .. } | Verdict::Fault(_) => println!("{verdict}\n"),
        }
        println!("Paths explored: {}", v.exploration.paths_explored);
        println!("{}", verdict.status_line());
    }
    Ok(verdict.exit_code() as u8)
}

fn run_options(args: &BoundArgs) -> RunOptions {
    RunOptions {
        bounds: bounds(args),
        workers: args.workers,
    }
}

fn emit(dir: &Path, name: &str, source: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    let path: PathBuf = dir.join(name);
    fs::write(&path, source).with_context(|| format!("cannot write `{}`", path.display()))
}

fn cmd_scenario(scenario: Scenario) -> Result<u8> {
    match scenario {
        Scenario::Bridge {
            times,
            deadline,
            strategy,
            emit_dir,
            bounds,
            output,
        } => {
            let strategy = match strategy {
                StrategyArg::Any => Strategy::Any,
                StrategyArg::Ferry => Strategy::FastestFerries,
            };
            let comparisons = [Comparison::Lt, Comparison::Ge];
            if let Some(dir) = &emit_dir {
                for c in comparisons {
                    let spec = BridgeSpec {
                        times: times.clone(),
                        deadline,
                        comparison: c,
                        strategy,
                    };
                    emit(dir, &spec.file_name(), &gen_bridge(&spec)?)?;
                }
            }
            let report = run_bridge_pair(&times, deadline, strategy, &comparisons, &run_options(&bounds))?;
            print_bridge(report, &output);
            Ok(0)
        }
        Scenario::Oximeter {
            rates,
            error_model,
            no_retry,
            status_errors,
            deadline,
            emit_dir,
            bounds,
            output,
        } => {
            let rates = rates
                .iter()
                .map(|r| r.parse::<Rate>())
                .collect::<Result<Vec<_>, _>>()?;
            let base = OximeterSpec {
                deadline,
                error_model: match error_model {
                    ErrorModelArg::Deterministic => ErrorModel::DeterministicCount,
                    ErrorModelArg::Nondet => ErrorModel::NondetPlacement,
                },
                retry_on_checksum_error: !no_retry,
                status_errors,
                ..OximeterSpec::default()
            };
            if let Some(dir) = &emit_dir {
                for rate in &rates {
                    let spec = OximeterSpec {
                        error_rate: *rate,
                        ..base.clone()
                    };
                    emit(dir, &spec.file_name(), &gen_oximeter(&spec)?)?;
                }
            }
            let report = run_matrix(&base, &rates, &run_options(&bounds))?;
            let failed_rows: Vec<String> = report
                .rows
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| format!("row {}: {e}", r.id)))
                .collect();
            let report = if output.json && !output.timings { report.without_timings() } else { report };
            if output.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if !failed_rows.is_empty() {
                bail!("{} row(s) could not be verified\n{}", failed_rows.len(), failed_rows.join("\n"));
            }
            Ok(0)
        }
    }
}

fn print_bridge(report: BridgeReport, output: &OutputArgs) {
    if output.json {
        let report = if output.timings { report } else { report.without_timings() };
        println!("{}", report.to_json());
        return;
    }
    print!("{}", report.to_text());
    for row in &report.rows {
        println!();
        println!("[{}] {}", row.id, row.file);
        if let Verdict::Failed(c) = row.run.verdict() {
            println!("{}", format_counterexample(c));
        }
        println!("{}", row.run.verdict().status_line());
    }
}
