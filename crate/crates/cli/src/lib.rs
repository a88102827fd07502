//! `pivp` command line: solve a polynomial initial-value problem from a JSON
//! file or a built-in benchmark.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use pivp_core::adaptive::{self, SolveOutcome};
use pivp_core::driver::{self, DriverOutcome, HintPolicy};
use pivp_core::scalar::{self, Rational};
use pivp_core::{io as pio, ClosedForm, ProblemSpec};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_NO_RESULT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

const DECIMAL_DIGITS: u32 = 30;

#[derive(Parser, Debug)]
#[command(name = "pivp", version, about = "Certified solver for polynomial initial-value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate y(T) to within the requested accuracy.
    Solve(SolveArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Problem file (JSON).
    #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
    problem: Option<PathBuf>,
    /// Built-in benchmark: exp, decay, spiking:M, tower2 or tan.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// End time (rational).
    #[arg(long, value_name = "T")]
    time: String,
    /// Accuracy, as a rational or `2^-k`.
    #[arg(long, value_name = "E", default_value = "2^-10")]
    eps: String,
    /// Run once with this fixed hint instead of the doubling schedule.
    #[arg(long, value_name = "I", conflicts_with = "max_hint")]
    hint: Option<String>,
    /// Largest hint the doubling schedule may try.
    #[arg(long, value_name = "H")]
    max_hint: Option<String>,
    /// Write the step table as CSV.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Print only the result values.
    #[arg(long)]
    quiet: bool,
}

/// Parses `2^-k`, `2^k` or a plain rational.
pub fn parse_accuracy(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let k: i64 = exp.parse().map_err(|_| format!("malformed power of two {text:?}"))?;
        return Ok(scalar::pow2(k));
    }
    scalar::parse_rational(t).map_err(|e| e.to_string())
}

fn rational_arg(name: &str, text: &str) -> Result<Rational, String> {
    scalar::parse_rational(text.trim()).map_err(|e| format!("--{name}: {e}"))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    let Command::Solve(args) = cli.command;
    match solve(&args, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn load_problem(args: &SolveArgs) -> Result<ProblemSpec, String> {
    if let Some(name) = &args.builtin {
        return ClosedForm::from_tag(name).map(|cf| cf.problem()).map_err(|e| e.to_string());
    }
    let path = args.problem.as_ref().expect("clap requires a problem or --builtin");
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    pio::parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let spec = load_problem(args)?;
    let p = spec.system().map_err(|e| e.to_string())?;
    let t = rational_arg("time", &args.time)?;
    let eps = parse_accuracy(&args.eps).map_err(|e| format!("--eps: {e}"))?;

    if let Some(h) = &args.hint {
        let hint = rational_arg("hint", h)?;
        let outcome = adaptive::solve_pivp_variable(&spec.t0, &spec.y0, &p, &t, &eps, &hint).map_err(|e| e.to_string())?;
        let run = outcome.run();
        if let Some(path) = &args.trace {
            write_trace_file(path, run, &hint)?;
        }
        return Ok(match &outcome {
            SolveOutcome::Success { value, run } => {
                print_values(out, value);
                if !args.quiet {
                    let _ = writeln!(out, "steps: {}, hint: {}", run.diagnostics.steps, hint);
                }
                EXIT_SUCCESS
            }
            SolveOutcome::Abort { reason, run } => {
                let _ = writeln!(
                    err,
                    "no certified result: {reason} after {} steps with hint {hint}",
                    run.diagnostics.steps
                );
                EXIT_NO_RESULT
            }
        });
    }

    let mut policy = HintPolicy::default();
    if let Some(h) = &args.max_hint {
        policy.max_hint = rational_arg("max-hint", h)?;
    }
    let outcome = driver::solve_pivp_ex(&spec.t0, &spec.y0, &p, &t, &eps, &policy).map_err(|e| e.to_string())?;
    match outcome {
        DriverOutcome::Success {
            value,
            run,
            final_hint,
            attempts,
            ..
        } => {
            if let Some(path) = &args.trace {
                write_trace_file(path, &run, &final_hint)?;
            }
            print_values(out, &value);
            if !args.quiet {
                let _ = writeln!(
                    out,
                    "steps: {}, final hint: {}, attempts: {}",
                    run.diagnostics.steps, final_hint, attempts
                );
            }
            Ok(EXIT_SUCCESS)
        }
        DriverOutcome::HintExhausted { attempts, last_hint, .. } => {
            let last = last_hint.map_or_else(|| "none".to_string(), |h| h.to_string());
            let _ = writeln!(
                err,
                "no certified result: hint schedule exhausted after {attempts} attempts; last hint tried: {last} (max hint {})",
                policy.max_hint
            );
            Ok(EXIT_NO_RESULT)
        }
        DriverOutcome::Interrupted { .. } => unreachable!("the plain driver never interrupts"),
    }
}

fn print_values(out: &mut dyn Write, value: &[Rational]) {
    for (i, v) in value.iter().enumerate() {
        let _ = writeln!(out, "y[{i}] = {v}");
        let _ = writeln!(out, "     ~ {}", scalar::to_decimal(v, DECIMAL_DIGITS));
    }
}

fn write_trace_file(path: &PathBuf, run: &adaptive::RunRecord, hint: &Rational) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    pio::write_trace(&run.trace, &run.diagnostics, hint, BufWriter::new(file))
        .map_err(|e| format!("{}: {e}", path.display()))
}
