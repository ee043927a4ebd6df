//! Command-line interface: solve instances, run the exact oracle, generate
//! instance files, and verify schedules.
//!
//! Exit codes: 0 when a schedule is produced (or verification passes),
//! 2 when the solver reports no result at any guess (or a pinned guess is
//! too small), 1 on malformed input or internal faults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use oneps_core::generator::{generate, Family, GeneratorConfig};
use oneps_core::instance::{makespan, Instance};
use oneps_core::io::{
    parse_instance, report_file, schedule_from_file, serialize_instance, ScheduleFile,
};
use oneps_core::numerics::{make_params, rat, Rational};
use oneps_core::oracle::brute_force_opt_capped;
use oneps_core::search::SearchCtx;
use oneps_core::solvers::{
    combined_solve, local_search_solve, matching_solve, solve_with_tau, Method, SolveOutcome,
    SolveReport, SolveStats, TauOutcome,
};

/// Default zeta when neither --zeta nor ONEPS_ZETA is given.
const DEFAULT_ZETA: &str = "1/10";
const ZETA_ENV: &str = "ONEPS_ZETA";

#[derive(Parser)]
#[command(name = "oneps", about = "Restricted assignment scheduling with two job sizes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one or more instance files.
    Solve(SolveArgs),
    /// Exact brute-force optimum of a small instance.
    Oracle(OracleArgs),
    /// Generate an instance file.
    Gen(GenArgs),
    /// Re-check a schedule file against its instance.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance files (JSON); repeat for a batch.
    #[arg(long = "instance", required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "combined")]
    method: MethodArg,
    /// Slack parameter as `num/den`; defaults to ONEPS_ZETA or 1/10.
    #[arg(long)]
    zeta: Option<String>,
    /// Pin the makespan guess as `num/den`: runs the search at exactly this
    /// guess, with no feasibility sweep and no matching fallback.
    #[arg(long)]
    tau: Option<String>,
    /// Emit the machine-readable report (deterministic bytes).
    #[arg(long)]
    json: bool,
    /// Run every analysis invariant as an assertion during the search.
    #[arg(long)]
    check_invariants: bool,
    /// Recorded for reproducibility; the solvers are deterministic anyway.
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Parallel worker slots for batches.
    #[arg(long, default_value = "1")]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    LocalSearch,
    Matching,
    Combined,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Refusal cap on the job count.
    #[arg(long, default_value = "12")]
    max_jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "4")]
    machines: usize,
    #[arg(long, default_value = "2")]
    big: usize,
    #[arg(long, default_value = "8")]
    small: usize,
    /// Exact epsilon as `num/den`.
    #[arg(long, default_value = "1/3")]
    epsilon: String,
    #[arg(long, value_enum, default_value = "uniform")]
    family: FamilyArg,
    /// Eligibility probability for the uniform family.
    #[arg(long, default_value = "0.5")]
    density: f64,
    /// Cluster count for the clustered family.
    #[arg(long, default_value = "2")]
    clusters: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Output path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Uniform,
    Clustered,
    Tight,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

fn parse_rational(text: &str) -> Result<Rational> {
    let parts: Vec<&str> = text.split('/').collect();
    let (num, den) = match parts.as_slice() {
        [n] => (n.trim(), "1"),
        [n, d] => (n.trim(), d.trim()),
        _ => bail!("expected `num` or `num/den`, got {text:?}"),
    };
    let num: i64 = num.parse().with_context(|| format!("bad numerator in {text:?}"))?;
    let den: i64 = den.parse().with_context(|| format!("bad denominator in {text:?}"))?;
    if den <= 0 {
        bail!("denominator must be positive in {text:?}");
    }
    Ok(rat(num, den))
}

fn load_instance(path: &Path) -> Result<Arc<Instance>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let instance = parse_instance(&text).with_context(|| format!("{}", path.display()))?;
    Ok(Arc::new(instance))
}

fn zeta_value(args: &SolveArgs) -> Result<Rational> {
    let text = match &args.zeta {
        Some(t) => t.clone(),
        None => std::env::var(ZETA_ENV).unwrap_or_else(|_| DEFAULT_ZETA.to_string()),
    };
    let z = parse_rational(&text)?;
    if z <= rat(0, 1) {
        bail!("zeta must be positive");
    }
    Ok(z)
}

/// Outcome of one instance: the rendered stdout block and an exit code.
struct Solved {
    output: String,
    code: u8,
}

fn render_report(instance: &Instance, report: &SolveReport, args: &SolveArgs) -> Result<String> {
    if args.json {
        let file = report_file(
            instance,
            &report.schedule,
            &report.makespan,
            report.method,
            report.tau.as_ref(),
            &report.stats,
        )?;
        Ok(format!("{}\n", serde_json::to_string_pretty(&file)?))
    } else {
        let mut out = String::new();
        out.push_str(&format!("method: {}\n", report.method));
        out.push_str(&format!("makespan: {}\n", report.makespan));
        match &report.tau {
            Some(tau) => out.push_str(&format!("tau: {tau}\n")),
            None => out.push_str("tau: none\n"),
        }
        out.push_str(&format!("stats: {}\n", serde_json::to_string(&report.stats)?));
        Ok(out)
    }
}

fn no_result_output(args: &SolveArgs, stats: &SolveStats, reason: &str) -> Result<String> {
    if args.json {
        let value = serde_json::json!({
            "result": "no-schedule",
            "reason": reason,
            "stats": stats,
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&value)?))
    } else {
        Ok(format!("no schedule: {reason}\n"))
    }
}

fn solve_one(path: &Path, args: &SolveArgs, zeta: &Rational) -> Result<Solved> {
    let instance = load_instance(path)?;
    let started = Instant::now();
    let solved = match (&args.tau, args.method) {
        (Some(_), MethodArg::Matching) => bail!("--tau does not apply to the matching method"),
        (Some(tau_text), _) => {
            let tau = parse_rational(tau_text)?;
            let params = Arc::new(make_params(instance.epsilon(), zeta)?);
            let mut ctx = SearchCtx {
                check_invariants: args.check_invariants,
                ..Default::default()
            };
            match solve_with_tau(&instance, &tau, &params, &mut ctx)? {
                TauOutcome::Schedule(schedule) => {
                    let span = makespan(&instance, &schedule)
                        .map_err(|e| anyhow!("produced schedule failed validation: {e}"))?;
                    let report = SolveReport {
                        schedule,
                        makespan: span,
                        tau: Some(tau),
                        method: Method::LocalSearch,
                        stats: SolveStats {
                            search: ctx.stats.clone(),
                            tau_probes: 1,
                            matching_rounds: 0,
                        },
                    };
                    report_violations(&ctx.violations);
                    Solved {
                        output: render_report(&instance, &report, args)?,
                        code: 0,
                    }
                }
                TauOutcome::TauTooSmall(sig) => {
                    let stats = SolveStats {
                        search: ctx.stats.clone(),
                        tau_probes: 1,
                        matching_rounds: 0,
                    };
                    report_violations(&ctx.violations);
                    Solved {
                        output: no_result_output(args, &stats, &sig.to_string())?,
                        code: 2,
                    }
                }
            }
        }
        (None, MethodArg::LocalSearch) => {
            let (outcome, violations) = local_search_solve(&instance, zeta, args.check_invariants)?;
            report_violations(&violations);
            match outcome {
                SolveOutcome::Report(report) => Solved {
                    output: render_report(&instance, &report, args)?,
                    code: 0,
                },
                SolveOutcome::NoResult { stats } => Solved {
                    output: no_result_output(args, &stats, "every guess below 2 failed")?,
                    code: 2,
                },
            }
        }
        (None, MethodArg::Matching) => {
            let report = matching_solve(&instance)?;
            Solved {
                output: render_report(&instance, &report, args)?,
                code: 0,
            }
        }
        (None, MethodArg::Combined) => {
            let (report, violations) = combined_solve(&instance, zeta, args.check_invariants)?;
            report_violations(&violations);
            Solved {
                output: render_report(&instance, &report, args)?,
                code: 0,
            }
        }
    };
    // Wall time goes to stderr so report bytes stay deterministic.
    eprintln!("{}: {:.3}s", path.display(), started.elapsed().as_secs_f64());
    Ok(solved)
}

fn report_violations(violations: &[String]) {
    for v in violations {
        eprintln!("invariant violation: {v}");
    }
}

fn run_solve(args: &SolveArgs) -> Result<u8> {
    let zeta = zeta_value(args)?;
    let workers = args.jobs.max(1);
    let n = args.instances.len();
    let results: Vec<Result<Solved>> = if workers == 1 || n == 1 {
        args.instances
            .iter()
            .map(|p| solve_one(p, args, &zeta))
            .collect()
    } else {
        // Fixed round-robin split; outputs are buffered and printed in
        // input order below.
        let mut slots: Vec<Option<Result<Solved>>> = (0..n).map(|_| None).collect();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let zeta = zeta.clone();
                let instances = &args.instances;
                let indices: Vec<usize> = (0..n).filter(|i| i % workers == w).collect();
                handles.push(scope.spawn(move || {
                    indices
                        .into_iter()
                        .map(|i| (i, solve_one(&instances[i], args, &zeta)))
                        .collect::<Vec<_>>()
                }));
            }
            for handle in handles {
                for (i, result) in handle.join().expect("worker panicked") {
                    slots[i] = Some(result);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("slot filled")).collect()
    };

    let mut had_error = false;
    let mut code = 0u8;
    for (path, result) in args.instances.iter().zip(results) {
        match result {
            Ok(solved) => {
                print!("{}", solved.output);
                code = code.max(solved.code);
            }
            Err(e) => {
                eprintln!("{}: error: {e:#}", path.display());
                had_error = true;
            }
        }
    }
    // Faults trump missing results.
    Ok(if had_error { 1 } else { code })
}

fn run_oracle(args: &OracleArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let result = brute_force_opt_capped(&instance, args.max_jobs)?;
    let mut witness = BTreeMap::new();
    for j in instance.jobs() {
        witness.insert(
            instance.job(j).name.clone(),
            instance
                .machine_name(result.witness.assignment[j.ix()])
                .to_string(),
        );
    }
    let value = serde_json::json!({
        "opt_makespan": oneps_core::io::rational_pair(&result.opt_makespan)?,
        "witness": witness,
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(0)
}

fn run_gen(args: &GenArgs) -> Result<u8> {
    let family = match args.family {
        FamilyArg::Uniform => Family::Uniform {
            density: args.density,
        },
        FamilyArg::Clustered => Family::Clustered {
            clusters: args.clusters,
        },
        FamilyArg::Tight => Family::Tight,
    };
    let config = GeneratorConfig {
        machines: args.machines,
        big_jobs: args.big,
        small_jobs: args.small,
        epsilon: parse_rational(&args.epsilon)?,
        family,
        seed: args.seed,
    };
    let instance = generate(&config)?;
    let text = serialize_instance(&instance)?;
    if args.out == "-" {
        println!("{text}");
    } else {
        std::fs::write(&args.out, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", args.out))?;
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let text = std::fs::read_to_string(&args.schedule)
        .with_context(|| format!("cannot read {}", args.schedule.display()))?;
    let file: ScheduleFile = serde_json::from_str(&text)?;
    let schedule = schedule_from_file(&instance, &file)?;
    let span = makespan(&instance, &schedule)?;
    println!("valid");
    println!("makespan: {span}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Gen(args) => run_gen(args),
        Command::Verify(args) => run_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
