//! `mqsp`: build, check, decompose and stress-test bivariate QSP pairs.
//!
//! Exit status: 0 on success or a passing check, 1 on a failing check, a
//! pair that does not decompose, or a search that finds nothing, and 2 on
//! usage or input format errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use mqsp_core::conditions::{check_conditions, forced_zero_trace, Variant};
use mqsp_core::counterexample::{
    insufficiency_pipeline, lift, search_nonrealizable, CounterexampleError, SearchSpec,
};
use mqsp_core::decompose::{decompose, DecomposeError};
use mqsp_core::protocol::{build, PolyPair, UnitPhase};
use mqsp_core::scalar::{Backend, Coeff, Exact};
use mqsp_core::torus::{sample_grid, to_csv};
use mqsp_core::wire::{self, AnyPair, AnyProtocol};
use mqsp_core::DEFAULT_TOL;

#[derive(Parser)]
#[command(
    name = "mqsp",
    version,
    about = "Bivariate quantum signal processing pairs: build, check, decompose"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Revised,
}

#[derive(Args)]
struct Common {
    /// Arithmetic backend; defaults to exact when the input allows it.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Absolute coefficient tolerance for float comparisons.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tolerance: f64,
    /// Write output here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Real part of e^{i phi} as a rational, e.g. 3/5.
    #[arg(
        long,
        requires = "phase_im",
        conflicts_with = "phase_angle",
        allow_hyphen_values = true
    )]
    phase_re: Option<String>,
    /// Imaginary part of e^{i phi} as a rational, e.g. 4/5.
    #[arg(long, requires = "phase_re", allow_hyphen_values = true)]
    phase_im: Option<String>,
    /// phi in radians (float mode).
    #[arg(long, allow_hyphen_values = true)]
    phase_angle: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply out a protocol into its pair (P, Q).
    Build {
        /// Protocol JSON file.
        #[arg(short = 'p', long = "protocol")]
        protocol: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check the necessary conditions on a pair.
    Check {
        pair: PathBuf,
        #[arg(long, value_enum, default_value = "revised")]
        variant: VariantArg,
        #[command(flatten)]
        common: Common,
    },
    /// Recover a protocol from a pair by peeling.
    Decompose {
        pair: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Replay the deduction that the original conditions force all
    /// non-constant coefficients to zero.
    DemoContradiction {
        #[arg(short = 'n')]
        n: u32,
        #[arg(short = 'm')]
        m: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a pair passing (i)-(iv) and failing (v').
    FindCounterexample {
        #[arg(short = 'n', default_value_t = 4)]
        n: u32,
        #[arg(short = 'm', default_value_t = 2)]
        m: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 1e-10)]
        residual_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        violation_margin: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extend a pair by one A operator.
    Lift {
        pair: PathBuf,
        #[command(flatten)]
        phase: PhaseArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Search, lift, check and decompose: the full insufficiency argument.
    Insufficiency {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[command(flatten)]
        phase: PhaseArgs,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tabulate |P|^2, |Q|^2 and their sum on a torus grid as CSV.
    Sample {
        pair: PathBuf,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(2..))]
        resolution: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// What a command produced and how the process should exit.
struct Done {
    text: String,
    code: u8,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn json(v: &Value, code: u8) -> Done {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    Done { text, code }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn read_pair(path: &Path, mode: Option<Mode>) -> Result<AnyPair, Failure> {
    let pair =
        wire::parse_pair(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    match (mode, pair) {
        (Some(Mode::Exact), AnyPair::Float(_)) => Err(Failure(format!(
            "{}: float coefficients cannot be checked in exact mode",
            path.display()
        ))),
        (Some(Mode::Float), AnyPair::Exact(p)) => Ok(AnyPair::Float(p.to_float())),
        (_, pair) => Ok(pair),
    }
}

fn read_protocol(path: &Path, mode: Option<Mode>) -> Result<AnyProtocol, Failure> {
    let text = read(path)?;
    let parse = |backend| {
        wire::parse_protocol(&text, backend)
            .map_err(|e| Failure(format!("{}: {e}", path.display())))
    };
    match mode {
        Some(Mode::Exact) => parse(Backend::Exact),
        Some(Mode::Float) => parse(Backend::Float),
        // fall back to float only when exact parsing rejects an angle phase
        None => {
            parse(Backend::Exact).or_else(|exact_err| parse(Backend::Float).map_err(|_| exact_err))
        }
    }
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Original => Variant::Original,
        VariantArg::Revised => Variant::Revised,
    }
}

fn check<S: Coeff>(pair: &PolyPair<S>, v: Variant, tol: f64) -> Done {
    let report = check_conditions(pair, v, tol);
    json(
        &wire::report_to_json(&report),
        if report.overall() { 0 } else { 1 },
    )
}

enum Decomposed {
    Done(Done),
    Irrational,
}

fn run_decompose<S: Coeff>(pair: &PolyPair<S>, tol: f64) -> Decomposed {
    match decompose(pair, tol) {
        Ok(d) => Decomposed::Done(json(&wire::protocol_to_json(&d.protocol), 0)),
        Err(DecomposeError::NotDecomposable { trace }) => Decomposed::Done(json(
            &serde_json::json!({ "outcome": "not_decomposable", "trace": wire::trace_to_json(&trace) }),
            1,
        )),
        Err(DecomposeError::PrecondViolated { report }) => Decomposed::Done(json(
            &serde_json::json!({ "outcome": "precondition_violated", "report": wire::report_to_json(&report) }),
            1,
        )),
        Err(DecomposeError::IrrationalPhase { .. }) => Decomposed::Irrational,
    }
}

enum Phase {
    Exact(UnitPhase<Exact>),
    Float(UnitPhase<mqsp_core::Float>),
}

fn phase(args: &PhaseArgs) -> Result<Phase, Failure> {
    match (&args.phase_re, &args.phase_im, args.phase_angle) {
        (Some(re), Some(im), None) => {
            let value = Exact::from_wire(re, im)?;
            Ok(Phase::Exact(UnitPhase::new(value)?))
        }
        (None, None, Some(angle)) if angle.is_finite() => {
            Ok(Phase::Float(UnitPhase::from_angle(angle)))
        }
        (None, None, Some(_)) => Err(Failure("--phase-angle must be finite".into())),
        (None, None, None) => Ok(Phase::Exact(UnitPhase::one())),
        _ => Err(Failure(
            "give either --phase-re with --phase-im, or --phase-angle".into(),
        )),
    }
}

fn dispatch(command: Command) -> Result<(Done, Option<PathBuf>), Failure> {
    Ok(match command {
        Command::Build { protocol, common } => {
            let out = match read_protocol(&protocol, common.mode)? {
                AnyProtocol::Exact(p) => wire::pair_to_json(&build(&p)),
                AnyProtocol::Float(p) => wire::pair_to_json(&build(&p)),
            };
            (json(&out, 0), common.output)
        }
        Command::Check {
            pair,
            variant: v,
            common,
        } => {
            let done = match read_pair(&pair, common.mode)? {
                AnyPair::Exact(p) => check(&p, variant(v), common.tolerance),
                AnyPair::Float(p) => check(&p, variant(v), common.tolerance),
            };
            (done, common.output)
        }
        Command::Decompose { pair, common } => {
            let pair = read_pair(&pair, common.mode)?;
            let done = match &pair {
                AnyPair::Exact(p) => match run_decompose(p, common.tolerance) {
                    Decomposed::Done(d) => d,
                    Decomposed::Irrational if common.mode.is_none() => {
                        eprintln!(
                            "mqsp: a phase has an irrational square root; retrying in float mode"
                        );
                        match run_decompose(&p.to_float(), common.tolerance) {
                            Decomposed::Done(d) => d,
                            Decomposed::Irrational => unreachable!("float roots always exist"),
                        }
                    }
                    Decomposed::Irrational => {
                        return Err(Failure(
                            "a phase has an irrational square root; rerun with --mode float".into(),
                        ))
                    }
                },
                AnyPair::Float(p) => match run_decompose(p, common.tolerance) {
                    Decomposed::Done(d) => d,
                    Decomposed::Irrational => unreachable!("float roots always exist"),
                },
            };
            (done, common.output)
        }
        Command::DemoContradiction { n, m, output } => {
            let trace = forced_zero_trace(n, m)?;
            let code = if trace.only_constant_survives() { 0 } else { 1 };
            (json(&wire::forced_zero_to_json(&trace), code), output)
        }
        Command::FindCounterexample {
            n,
            m,
            seed,
            budget,
            residual_tol,
            violation_margin,
            output,
        } => {
            let spec = SearchSpec {
                n,
                m,
                seed,
                budget,
                residual_tol,
                violation_margin,
            };
            match search_nonrealizable(&spec) {
                Ok(found) => {
                    eprintln!(
                        "mqsp: restart {} accepted, residual {:.2e}, misalignment A {:.4} B {:.4}",
                        found.restart,
                        found.residual_norm,
                        found.misalignment[0],
                        found.misalignment[1]
                    );
                    (json(&wire::pair_to_json(&found.pair), 0), output)
                }
                Err(e @ CounterexampleError::NotFound { .. }) => {
                    eprintln!("mqsp: {e}");
                    (
                        Done {
                            text: String::new(),
                            code: 1,
                        },
                        None,
                    )
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Lift {
            pair,
            phase: ph,
            common,
        } => {
            let pair = read_pair(&pair, common.mode)?;
            let out = match (pair, phase(&ph)?) {
                (AnyPair::Exact(p), Phase::Exact(f)) => wire::pair_to_json(&lift(&p, &f)),
                (AnyPair::Exact(_), Phase::Float(_)) if common.mode == Some(Mode::Exact) => {
                    return Err(Failure(
                        "--phase-angle is not exact; use --phase-re/--phase-im".into(),
                    ))
                }
                (p, Phase::Exact(f)) => wire::pair_to_json(&lift(&p.to_float(), &f.to_float())),
                (p, Phase::Float(f)) => wire::pair_to_json(&lift(&p.to_float(), &f)),
            };
            (json(&out, 0), common.output)
        }
        Command::Insufficiency {
            seed,
            budget,
            phase: ph,
            tolerance,
            output,
        } => {
            let lift_phase = match phase(&ph)? {
                Phase::Exact(f) => f.to_float(),
                Phase::Float(f) => f,
            };
            let spec = SearchSpec {
                seed,
                budget,
                ..SearchSpec::default()
            };
            match insufficiency_pipeline(&spec, &lift_phase, tolerance) {
                Ok(report) => {
                    let code = if report.findings.is_counterexample {
                        0
                    } else {
                        1
                    };
                    (json(&wire::insufficiency_to_json(&report), code), output)
                }
                Err(e) => {
                    eprintln!("mqsp: {e}");
                    (
                        Done {
                            text: String::new(),
                            code: 1,
                        },
                        None,
                    )
                }
            }
        }
        Command::Sample {
            pair,
            resolution,
            output,
        } => {
            let rows = match read_pair(&pair, None)? {
                AnyPair::Exact(p) => sample_grid(&p, resolution as usize),
                AnyPair::Float(p) => sample_grid(&p, resolution as usize),
            };
            (
                Done {
                    text: to_csv(&rows),
                    code: 0,
                },
                output,
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok((done, output)) => {
            let written = match output {
                Some(path) => fs::write(&path, &done.text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(done.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("mqsp: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(done.code)
        }
        Err(Failure(msg)) => {
            eprintln!("mqsp: {msg}");
            ExitCode::from(2)
        }
    }
}
