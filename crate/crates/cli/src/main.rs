mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use mbhash_core::analytics::{self, bell_yield, cluster_yield, Convention, Dimension, Target, ThresholdReport};
use mbhash_core::engine::{
    run_trials, safe_output_count, BellDistribution, DecoderConfig, EngineError, Execution, TrialConfig,
};
use mbhash_core::noise::fidelity_exact;
use mbhash_core::selftest::{self, Fault, SelftestOptions};

use output::{decimal, number, object, to_json};

const THREADS_ENV: &str = "MBHASH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mbhash", version, about = "Measurement-based hashing purification: thresholds, yields and Monte Carlo")]
struct Cli {
    /// Defaults file with `key = value` lines (flags override).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Noise thresholds for every target and convention.
    Thresholds {
        #[arg(long)]
        target: Option<Target>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Yield as a function of q, as CSV.
    YieldCurve {
        #[arg(long, default_value_t = Target::Bell)]
        target: Target,
        /// Fidelity conversion for the bell target.
        #[arg(long, default_value_t = Convention::Exact)]
        convention: Convention,
        #[arg(long, default_value_t = 0.8)]
        q_from: f64,
        #[arg(long, default_value_t = 1.0)]
        q_to: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo run of the purification protocol.
    Simulate(SimulateArgs),
    /// Reduced-size property suites.
    Selftest {
        #[arg(long, default_value_t = SelftestOptions::default().seed)]
        seed: u64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    /// Number of input pairs.
    #[arg(long)]
    n: usize,
    /// Output pairs; derived from --delta when absent.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Werner fidelity of the input pairs.
    #[arg(long, conflicts_with = "q", required_unless_present = "q")]
    fidelity: Option<f64>,
    /// Per-particle LDN reliability of the input pairs.
    #[arg(long)]
    q: Option<f64>,
    /// Per-particle LDN reliability of the resource states.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, value_enum, default_value_t = ExecutionArg::Measurement)]
    execution: ExecutionArg,
    /// Per-particle LDN reliability after each bilateral gate (gate execution).
    #[arg(long, default_value_t = 1.0)]
    gate_noise: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExecutionArg {
    Measurement,
    Gate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    LdnIdentity,
}

enum Failure {
    Usage(String),
    Infeasible(Value),
    Selftest,
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Selftest => 1,
            Failure::Usage(_) | Failure::Io(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn report_json(r: &ThresholdReport) -> Value {
    object([
        ("convention", Value::from(r.convention.name())),
        ("p_min", number(r.p_min)),
        ("q_min", number(r.q_min)),
        ("target", Value::from(r.target.name())),
        ("tolerable_noise", number(r.tolerable_noise)),
    ])
}

fn cmd_thresholds(target: Option<Target>, format: Format, out: Option<&PathBuf>) -> Result<(), Failure> {
    let reports: Vec<ThresholdReport> = analytics::all_threshold_reports()
        .into_iter()
        .filter(|r| target.is_none_or(|t| r.target == t))
        .collect();
    let text = match format {
        Format::Json => to_json(&object([
            ("f_min", number(analytics::f_min_hashing())),
            ("reports", Value::Array(reports.iter().map(report_json).collect())),
        ])),
        Format::Csv => {
            let mut s = String::from("target,convention,q_min,p_min,tolerable_noise\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.target,
                    r.convention,
                    decimal(r.q_min),
                    decimal(r.p_min),
                    decimal(r.tolerable_noise)
                ));
            }
            s
        }
    };
    emit(&text, out)
}

fn cmd_yield_curve(
    target: Target,
    convention: Convention,
    q_from: f64,
    q_to: f64,
    steps: usize,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&q_from) || !(0.0..=1.0).contains(&q_to) || q_from >= q_to {
        return Err(Failure::Usage(format!("need 0 <= q-from < q-to <= 1, got {q_from} .. {q_to}")));
    }
    if steps < 2 {
        return Err(Failure::Usage("steps must be at least 2".into()));
    }
    let mut s = String::from("q,raw_yield,clamped_yield\n");
    for k in 0..steps {
        let q = if k == steps - 1 {
            q_to
        } else {
            q_from + (q_to - q_from) * k as f64 / (steps - 1) as f64
        };
        let y = match target {
            Target::Bell => bell_yield(q, convention),
            Target::Cluster1d => cluster_yield(q, Dimension::One),
            Target::Cluster2d => cluster_yield(q, Dimension::Two),
        }
        .map_err(usage)?;
        s.push_str(&format!("{},{},{}\n", decimal(q), decimal(y.raw), decimal(y.clamped)));
    }
    emit(&s, out)
}

fn check_unit(name: &str, v: f64) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} = {v} is outside [0, 1]")))
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), Failure> {
    if a.n < 2 {
        return Err(Failure::Usage("n must be at least 2".into()));
    }
    if a.trials == 0 {
        return Err(Failure::Usage("trials must be positive".into()));
    }
    check_unit("p", a.p)?;
    check_unit("gate-noise", a.gate_noise)?;
    check_unit("delta", a.delta)?;
    let fidelity = match (a.fidelity, a.q) {
        (Some(f), _) if (0.25..=1.0).contains(&f) => f,
        (Some(f), _) => return Err(Failure::Usage(format!("fidelity = {f} is outside [0.25, 1]"))),
        (None, Some(q)) => fidelity_exact(check_unit("q", q)?),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let input = BellDistribution::werner(fidelity).map_err(usage)?;
    let (execution, effective) = match a.execution {
        ExecutionArg::Measurement => {
            let pair = BellDistribution::single_particle_ldn(a.p).map_err(usage)?;
            (Execution::MeasurementBased { p: a.p }, input.convolve(&pair).convolve(&pair))
        }
        ExecutionArg::Gate => (Execution::GateBased { gate_noise: a.gate_noise }, input),
    };

    let entropy = effective.entropy();
    let infeasible = || {
        Failure::Infeasible(object([
            ("delta", number(a.delta)),
            ("effective_fidelity", number(effective.fidelity())),
            ("entropy", number(entropy)),
            ("error", Value::from("infeasible")),
            ("reason", Value::from("below hashing threshold")),
        ]))
    };
    if entropy >= 1.0 - a.delta {
        return Err(infeasible());
    }
    let m = match a.m {
        Some(m) if m >= 1 && m < a.n => m,
        Some(m) => return Err(Failure::Usage(format!("m = {m} must satisfy 1 <= m < n = {}", a.n))),
        None => match safe_output_count(a.n, &effective, a.delta) {
            Ok(m) => m,
            Err(EngineError::NotDistillable { .. }) => return Err(infeasible()),
            Err(e) => return Err(usage(e)),
        },
    };

    let summary = run_trials(&TrialConfig {
        n: a.n,
        m,
        input,
        execution,
        trials: a.trials,
        seed: a.seed,
        decoder: DecoderConfig::default(),
    })
    .map_err(usage)?;

    // the noise-moving prediction only covers measurement-based execution
    let predicted = match a.execution {
        ExecutionArg::Measurement => number(fidelity_exact(a.p)),
        ExecutionArg::Gate => Value::Null,
    };
    let config = object([
        ("delta", number(a.delta)),
        (
            "execution",
            Value::from(match a.execution {
                ExecutionArg::Measurement => "measurement",
                ExecutionArg::Gate => "gate",
            }),
        ),
        ("fidelity", number(fidelity)),
        ("gate_noise", number(a.gate_noise)),
        ("m", Value::from(m)),
        ("n", Value::from(a.n)),
        ("p", number(a.p)),
        ("q", a.q.map_or(Value::Null, number)),
        ("seed", Value::from(a.seed)),
        ("trials", Value::from(a.trials)),
    ]);
    let report = object([
        ("config", config),
        ("decode_success_rate", number(summary.decode_success_rate)),
        ("fidelity_std_error", number(summary.fidelity_std_error)),
        ("mean_output_fidelity", number(summary.mean_output_fidelity)),
        ("predicted_output_fidelity", predicted),
        ("trials", Value::from(summary.trials)),
        ("yield_asymptotic", number(1.0 - entropy)),
        ("yield_empirical", number(summary.decode_success_rate * m as f64 / a.n as f64)),
    ]);
    emit(&to_json(&report), a.output.as_ref())
}

fn cmd_selftest(seed: u64, fault: Option<FaultArg>) -> Result<(), Failure> {
    let fault = fault.map(|f| match f {
        FaultArg::LdnIdentity => Fault::LdnIdentityProbability,
    });
    let report = selftest::run_all(&SelftestOptions { seed, fault });
    let mut out = String::new();
    for s in &report.suites {
        let status = if s.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status} {:<10} {:>2} checks {:>8.3}s\n",
            s.name,
            s.checks,
            s.elapsed.as_secs_f64()
        ));
        for f in &s.failures {
            out.push_str(&format!("    {f}\n"));
        }
    }
    let verdict = if report.passed() { "all suites passed" } else { "selftest FAILED" };
    out.push_str(&format!("{verdict} in {:.3}s\n", report.elapsed().as_secs_f64()));
    emit(&out, None)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Selftest)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)
}

fn parse_args() -> Result<Cli, clap::Error> {
    let args: Vec<OsString> = std::env::args_os().collect();
    let Some(path) = config::find_path(&args) else {
        return Cli::try_parse_from(args);
    };
    let defaults = config::load(&path)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))?;
    Cli::try_parse_from(config::merge(args, &defaults))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Thresholds { target, format, output } => cmd_thresholds(target, format, output.as_ref()),
        Command::YieldCurve {
            target,
            convention,
            q_from,
            q_to,
            steps,
            output,
        } => cmd_yield_curve(target, convention, q_from, q_to, steps, output.as_ref()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Selftest { seed, inject_fault } => cmd_selftest(seed, inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version exit 0, everything else 2
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) | Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::Infeasible(v) => print!("{}", to_json(v)),
                Failure::Selftest => {}
            }
            ExitCode::from(f.code())
        }
    }
}
