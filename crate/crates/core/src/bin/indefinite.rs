use std::process::ExitCode;

use clap::{Parser, Subcommand};
use indefinite_core::cli_io::{configure, emit, error_exit_code, error_json, run, to_json, Check, Command, Overrides};
use indefinite_core::Error;

#[derive(Parser)]
#[command(name = "indefinite", version, about = "Indefinite-weight eigenvalue and ground state experiments")]
struct Cli {
    /// Line-oriented `section.key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long = "grid-n", global = true, allow_negative_numbers = true)]
    grid_n: Option<i64>,
    #[arg(long = "grid-L", global = true)]
    grid_l: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    /// ball:R[@x,y,z], annulus:RIN:ROUT, two-balls:SEP:R or box:W1,W2,W3
    #[arg(long, global = true)]
    domain: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; `.json` or `.csv` selects one format, otherwise both.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Positive eigenvalues of the weighted pencil.
    Eig,
    /// Least-energy solution at exponent `p`.
    Semilinear,
    /// Ground states over `sweep.p_list`.
    Sweep,
    /// Run one named check and report its verdict.
    Verify { check: String },
    /// Two-ball second-eigenvalue sequence.
    Hks,
    /// Negative truncation eigenvalue over `scan.l_list`.
    NegScan,
    /// Decay-rate fit of the first eigenfunction, or of a ground state when `p` is set.
    DecayFit,
}

fn fail(cmd: &str, e: &Error) -> ExitCode {
    match to_json(&error_json(cmd, e)) {
        Ok(s) => eprint!("{s}"),
        Err(_) => eprintln!("{e}"),
    }
    ExitCode::from(error_exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cmd = match &cli.command {
        Sub::Eig => Ok(Command::Eig),
        Sub::Semilinear => Ok(Command::Semilinear),
        Sub::Sweep => Ok(Command::Sweep),
        Sub::Verify { check } => check.parse::<Check>().map(Command::Verify),
        Sub::Hks => Ok(Command::Hks),
        Sub::NegScan => Ok(Command::NegScan),
        Sub::DecayFit => Ok(Command::DecayFit),
    };
    let cmd = match cmd {
        Ok(c) => c,
        Err(e) => return fail("verify", &e),
    };
    let name = cmd.name();
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(&name, &Error::ConfigKey { key: "--config".into(), msg: format!("{path}: {e}") }),
        },
        None => String::new(),
    };
    let ov = Overrides { grid_n: cli.grid_n, grid_l: cli.grid_l, p: cli.p, domain: cli.domain, seed: cli.seed, out: cli.out };
    let cfg = match configure(&text, &ov) {
        Ok(c) => c,
        Err(e) => return fail(&name, &e),
    };
    let report = match run(&cfg, cmd) {
        Ok(r) => r,
        Err(e) => return fail(&name, &e),
    };
    match emit(&report, cfg.output.as_deref()) {
        Ok(text) => print!("{text}"),
        Err(e) => return fail(&name, &e),
    }
    ExitCode::from(report.exit_code() as u8)
}
