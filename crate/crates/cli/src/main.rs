//! `relusat` — verify linear input/output properties of feed-forward ReLU
//! networks, evaluate and generate network files, and run the built-in
//! topology benchmark.
//!
//! Exit status encodes the verdict: 0 the property cannot be violated
//! (unsat), 1 a counterexample was found (sat), 2 the search ran out of its
//! time or split budget, 3 usage or parse error. Reports go to standard
//! output; diagnostics go to the error stream.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use relusat_core::nnet::{parse_network, serialize_network};
use relusat_core::oracle::{oracle_solve, OracleStats, DEFAULT_MAX_ORACLE_PAIRS};
use relusat_core::rat::{decimal_approx, format_exact, parse_number, Rat};
use relusat_core::search::{
    solve, validate_counterexample, ResourceLimit, SolveConfig, SolveStats, Verdict,
};
use relusat_core::topology::run_bench;
use relusat_core::{encode, generate_network, parse_property, NetGenSpec, Network};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_UNSAT: u8 = 0;
const EXIT_SAT: u8 = 1;
const EXIT_RESOURCE_OUT: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Seconds the search may run when neither the flag nor the environment
/// variable says otherwise.
const DEFAULT_TIMEOUT_SECS: u64 = 60;
const TIMEOUT_ENV_VAR: &str = "RELUSAT_TIMEOUT";

/// Digits shown in decimal renderings; the exact rational is always printed
/// alongside, so this is presentation only.
const DECIMAL_DIGITS: usize = 12;

#[derive(Parser)]
#[command(
    name = "relusat",
    version,
    about = "Sound and complete verification of linear properties of ReLU networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a property is satisfiable on a network
    Verify(VerifyArgs),
    /// Run a network forward on a concrete input
    Eval(EvalArgs),
    /// Generate a random network file
    Generate(GenerateArgs),
    /// Compare solver effort on deep-narrow vs shallow-wide networks
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Network file in the NNet-style text format
    #[arg(long)]
    network: PathBuf,
    /// Property file: one linear atom per line, e.g. `x0 >= 1` or `2*y0 - y1 <= 0.5`
    #[arg(long)]
    property: PathBuf,
    /// Time budget in seconds; 0 removes the limit (overrides RELUSAT_TIMEOUT)
    #[arg(long)]
    timeout: Option<u64>,
    /// ReLU violation count on a pair before the search may split it
    #[arg(long)]
    split_threshold: Option<u64>,
    /// Give up after this many case splits
    #[arg(long)]
    max_splits: Option<u64>,
    /// Use the eager all-phase-patterns oracle instead of the lazy solver
    #[arg(long)]
    oracle: bool,
    /// Fold the file's input normalization (x - mean) / range into layer 1
    #[arg(long)]
    apply_normalization: bool,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputFormat,
    /// Log search internals to the error stream
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Network file in the NNet-style text format
    #[arg(long)]
    network: PathBuf,
    /// Comma-separated input values; decimals and `p/q` fractions allowed
    #[arg(long, allow_hyphen_values = true)]
    input: String,
    /// Fold the file's input normalization (x - mean) / range into layer 1
    #[arg(long)]
    apply_normalization: bool,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputFormat,
}

#[derive(Args)]
struct GenerateArgs {
    /// Comma-separated layer sizes, inputs first, e.g. `2,3,3,1`
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Where to write the network file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instances per topology
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Write the full JSON report here (the table always goes to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly when the reader of our stdout goes away (`relusat ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let trace = matches!(&cli.command, Command::Verify(v) if v.trace);
    init_logging(trace);
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("relusat: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn init_logging(trace: bool) {
    let mut builder = env_logger::Builder::from_default_env();
    if trace {
        builder.filter_level(log::LevelFilter::Trace);
    }
    let _ = builder.try_init();
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_network(path: &Path, apply_normalization: bool) -> Result<Network, String> {
    let text = read_file(path)?;
    let net = parse_network(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(if apply_normalization {
        net.with_input_normalization()
    } else {
        net
    })
}

/// Flag beats environment beats default; 0 means unlimited.
fn resolve_timeout(flag: Option<u64>) -> Result<Duration, String> {
    let secs = match flag {
        Some(s) => s,
        None => match std::env::var(TIMEOUT_ENV_VAR) {
            Ok(raw) => raw
                .parse::<u64>()
                .map_err(|_| format!("{TIMEOUT_ENV_VAR} must be a whole number of seconds, got `{raw}`"))?,
            Err(_) => DEFAULT_TIMEOUT_SECS,
        },
    };
    Ok(if secs == 0 {
        Duration::MAX
    } else {
        Duration::from_secs(secs)
    })
}

/// A value rendered for humans and for machines: exact rational plus a
/// decimal approximation.
fn render(name: &str, value: &Rat) -> Value {
    json!({
        "name": name,
        "exact": format_exact(value),
        "decimal": decimal_approx(value, DECIMAL_DIGITS),
    })
}

fn render_line(name: &str, value: &Rat) -> String {
    let exact = format_exact(value);
    let decimal = decimal_approx(value, DECIMAL_DIGITS);
    if exact == decimal {
        format!("  {name} = {exact}")
    } else {
        format!("  {name} = {exact} ~ {decimal}")
    }
}

fn solve_stats_json(stats: &SolveStats) -> Value {
    json!({
        "lp_checks": stats.lp_checks,
        "pivots": stats.pivots,
        "fixes": stats.fixes,
        "splits": stats.splits,
        "max_trail_depth": stats.max_trail_depth,
        "wall_ms": stats.wall_time.as_secs_f64() * 1000.0,
    })
}

fn oracle_stats_json(stats: &OracleStats) -> Value {
    json!({
        "patterns_executed": stats.patterns_executed,
        "lp_checks": stats.lp_checks,
        "pivots": stats.pivots,
        "wall_ms": stats.wall_time.as_secs_f64() * 1000.0,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, String> {
    let net = load_network(&args.network, args.apply_normalization)?;
    let prop_text = read_file(&args.property)?;
    let prop =
        parse_property(&prop_text).map_err(|e| format!("{}: {e}", args.property.display()))?;
    let problem = encode(&net, &prop).map_err(|e| e.to_string())?;

    let mut config = SolveConfig {
        timeout: resolve_timeout(args.timeout)?,
        max_splits: args.max_splits,
        ..SolveConfig::default()
    };
    if let Some(t) = args.split_threshold {
        config.split_threshold = t;
    }

    let (verdict, stats_json, mode) = if args.oracle {
        let (verdict, stats) = oracle_solve(&problem, DEFAULT_MAX_ORACLE_PAIRS)
            .map_err(|e| format!("--oracle: {e}"))?;
        (verdict, oracle_stats_json(&stats), "oracle")
    } else {
        let (verdict, stats) = solve(&problem, &config);
        (verdict, solve_stats_json(&stats), "lazy")
    };

    // A Sat verdict leaves this function only after replaying exactly.
    if verdict.is_sat() {
        let validation = validate_counterexample(&net, &prop, &problem, &verdict);
        assert!(
            validation.passed(),
            "internal error: counterexample failed validation: {validation}"
        );
    }

    let mut report = json!({
        "mode": mode,
        "verdict": match &verdict {
            Verdict::Sat { .. } => "sat",
            Verdict::Unsat => "unsat",
            Verdict::ResourceOut(_) => "resource-out",
        },
        "stats": stats_json,
    });
    match &verdict {
        Verdict::Unsat => {}
        Verdict::ResourceOut(limit) => {
            report["resource_limit"] = json!(limit.to_string());
        }
        Verdict::Sat { counterexample, .. } => {
            let outputs = net
                .evaluate(counterexample)
                .expect("validated counterexample evaluates");
            let inputs_json: Vec<Value> = counterexample
                .iter()
                .enumerate()
                .map(|(i, v)| render(&format!("x{i}"), v))
                .collect();
            let outputs_json: Vec<Value> = outputs
                .iter()
                .enumerate()
                .map(|(i, v)| render(&format!("y{i}"), v))
                .collect();
            report["counterexample"] = json!({ "inputs": inputs_json, "outputs": outputs_json });
            report["validation"] = json!("pass");
        }
    }

    match args.output {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        OutputFormat::Text => print_verify_text(&verdict, &net, &report),
    }
    Ok(exit_code_for(&verdict))
}

fn print_verify_text(verdict: &Verdict, net: &Network, report: &Value) {
    match verdict {
        Verdict::Unsat => println!("verdict: unsat (property cannot be violated)"),
        Verdict::ResourceOut(limit) => println!("verdict: resource-out ({limit})"),
        Verdict::Sat { counterexample, .. } => {
            println!("verdict: sat (counterexample found)");
            println!("counterexample:");
            for (i, v) in counterexample.iter().enumerate() {
                println!("{}", render_line(&format!("x{i}"), v));
            }
            println!("outputs:");
            let outputs = net.evaluate(counterexample).expect("validated");
            for (i, v) in outputs.iter().enumerate() {
                println!("{}", render_line(&format!("y{i}"), v));
            }
            println!("validation: pass");
        }
    }
    let stats = &report["stats"];
    let mut line = String::from("stats:");
    for key in ["patterns_executed", "lp_checks", "pivots", "fixes", "splits", "max_trail_depth"] {
        if let Some(v) = stats.get(key).and_then(Value::as_u64) {
            line.push_str(&format!(" {}={v}", key.replace('_', "-")));
        }
    }
    if let Some(ms) = stats.get("wall_ms").and_then(Value::as_f64) {
        line.push_str(&format!(" wall-ms={ms:.2}"));
    }
    println!("{line}");
}

fn cmd_eval(args: &EvalArgs) -> Result<u8, String> {
    let net = load_network(&args.network, args.apply_normalization)?;
    let mut inputs = Vec::new();
    for (idx, token) in args.input.split(',').enumerate() {
        let token = token.trim();
        inputs.push(
            parse_number(token).map_err(|_| format!("input {idx}: invalid number `{token}`"))?,
        );
    }
    let outputs = net.evaluate(&inputs).map_err(|e| e.to_string())?;
    match args.output {
        OutputFormat::Json => {
            let report = json!({
                "inputs": inputs.iter().enumerate().map(|(i, v)| render(&format!("x{i}"), v)).collect::<Vec<_>>(),
                "outputs": outputs.iter().enumerate().map(|(i, v)| render(&format!("y{i}"), v)).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        OutputFormat::Text => {
            for (i, v) in outputs.iter().enumerate() {
                println!("{}", render_line(&format!("y{i}"), v).trim_start());
            }
        }
    }
    Ok(0)
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8, String> {
    let mut dims = Vec::new();
    for token in args.dims.split(',') {
        let token = token.trim();
        dims.push(
            token
                .parse::<usize>()
                .map_err(|_| format!("--dims: invalid layer size `{token}`"))?,
        );
    }
    let net = generate_network(&NetGenSpec {
        layer_dims: dims.clone(),
        weight_range: (relusat_core::rat::rat_int(-1), relusat_core::rat::rat_int(1)),
        seed: args.seed,
    })
    .map_err(|e| format!("--dims: {e}"))?;
    std::fs::write(&args.out, serialize_network(&net))
        .map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    let shape = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
    println!("wrote {} ({shape}, seed {})", args.out.display(), args.seed);
    Ok(0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, String> {
    if args.instances == 0 {
        return Err("--instances must be at least 1".to_string());
    }
    let report = run_bench(args.seed, args.instances, &SolveConfig::default());
    if let Some(path) = &args.out {
        std::fs::write(path, report.to_json())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    print!("{}", report.to_table());
    Ok(0)
}

/// The whole exit-status contract in one place.
fn exit_code_for(verdict: &Verdict) -> u8 {
    match verdict {
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::Sat { .. } => EXIT_SAT,
        Verdict::ResourceOut(ResourceLimit::Timeout | ResourceLimit::SplitLimit) => {
            EXIT_RESOURCE_OUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code_for(&Verdict::Unsat), 0);
        assert_eq!(
            exit_code_for(&Verdict::Sat {
                assignment: vec![],
                counterexample: vec![]
            }),
            1
        );
        assert_eq!(
            exit_code_for(&Verdict::ResourceOut(ResourceLimit::Timeout)),
            2
        );
        assert_eq!(
            exit_code_for(&Verdict::ResourceOut(ResourceLimit::SplitLimit)),
            2
        );
    }

    #[test]
    fn timeout_resolution_precedence() {
        // No flag, no env (the variable is cleared for tests via a unique
        // name check): default applies.
        std::env::remove_var(TIMEOUT_ENV_VAR);
        assert_eq!(
            resolve_timeout(None).unwrap(),
            Duration::from_secs(DEFAULT_TIMEOUT_SECS)
        );
        assert_eq!(resolve_timeout(Some(5)).unwrap(), Duration::from_secs(5));
        assert_eq!(resolve_timeout(Some(0)).unwrap(), Duration::MAX);
    }
}
