//! `stokeslab`: drives the verification suites and writes CSV reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
//! input errors.

mod commands;
mod config;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_tolerance, DataKind, PressureArg, RunConfig, SchemeArg};

#[derive(Debug, Parser)]
#[command(
    name = "stokeslab",
    version,
    about = "Spectral disc laboratory for the Stokes problem with prescribed divergence"
)]
struct Cli {
    /// Interior radial nodes.
    #[arg(long = "n-r", global = true, default_value_t = 128)]
    n_r: usize,
    /// Highest angular Fourier mode.
    #[arg(long = "n-theta", global = true, default_value_t = 8)]
    n_theta: usize,
    /// Time steps.
    #[arg(long = "n-t", global = true, default_value_t = 40)]
    n_t: usize,
    /// Spatial exponent of the norms.
    #[arg(long, global = true, default_value_t = 2.0)]
    s: f64,
    /// Temporal exponent of the norms.
    #[arg(long, global = true, default_value_t = 2.0)]
    l: f64,
    /// Output directory.
    #[arg(long, global = true, default_value = "stokeslab-out")]
    out: std::path::PathBuf,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tol: Vec<(String, f64)>,
    /// Seed for the random test families.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norm table, divergent series and boundary layer certificates of the counterexample.
    Counterexample {
        /// Number of series terms.
        #[arg(long, default_value_t = 60)]
        modes: usize,
        /// Sampled fields stop at t = -eps.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
    /// Solve div u = g with u = 0 on the circle.
    Divsolve {
        /// Scalar field in the JSON field format.
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// Built-in source r^n sin(n theta), used without --input.
        #[arg(long, default_value_t = 2)]
        mode: usize,
    },
    /// Solve the nonstationary Stokes problem with prescribed divergence.
    Stokes {
        /// JSON file with space-time fields `f` and `g`.
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// Built-in data, used without --input.
        #[arg(long, value_enum, default_value_t = DataKind::Manufactured)]
        data: DataKind,
        #[arg(long, value_enum, default_value_t = SchemeArg::CrankNicolson)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = PressureArg::Poisson)]
        pressure: PressureArg,
        /// Final time; the run covers [0, t_end].
        #[arg(long = "t-end", default_value_t = 0.5)]
        t_end: f64,
    },
    /// Run the property suite of every module and print a pass/fail matrix.
    Verify,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    let Cli {
        n_r,
        n_theta,
        n_t,
        s,
        l,
        out,
        tol,
        seed,
        command,
    } = cli;
    let base = |name: &str| RunConfig::new(name, n_r, n_theta, n_t, s, l, out.clone(), seed, &tol);
    match command {
        Command::Counterexample { modes, eps } => {
            let mut cfg = base("counterexample")?;
            cfg.modes = Some(modes);
            cfg.eps = Some(eps);
            commands::counterexample(&cfg)
        }
        Command::Divsolve { input, mode } => {
            let mut cfg = base("divsolve")?;
            cfg.input = input;
            cfg.mode = Some(mode);
            commands::divsolve(&cfg)
        }
        Command::Stokes {
            input,
            data,
            scheme,
            pressure,
            t_end,
        } => {
            let mut cfg = base("stokes")?;
            cfg.input = input;
            cfg.data = Some(data);
            cfg.scheme = Some(scheme);
            cfg.pressure = Some(pressure);
            cfg.t_end = Some(t_end);
            commands::stokes(&cfg)
        }
        Command::Verify => commands::verify(&base("verify")?),
    }
}
