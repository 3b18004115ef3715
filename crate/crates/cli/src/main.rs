//! `ndirac`: solve, check, and inspect ground states from a config file.
//!
//! Exit codes: 0 success, 1 failed checks or numerical failure, 2 solve
//! stopped without converging, 64 bad usage or config, 74 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ndirac::io::{self, RunConfig};
use ndirac::{diagnostics, nehari, solver, Error};

#[derive(Parser)]
#[command(name = "ndirac", version, about = "Ground states of the nonlinear Dirac equation on a periodic box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize over the Nehari set; writes summary.json, field.bin, trace.csv, profile.csv.
    Solve {
        config: PathBuf,
        /// Solve even if the model fails the (VK0)/(f) pre-checks.
        #[arg(long)]
        force: bool,
        /// Output directory, overriding output.dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the diagnostics suite; writes report.json.
    Check {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize over the fiber of a stored field and print t* and the residuals.
    Project { config: PathBuf, field: PathBuf },
    /// Print the range of the free Dirac spectrum and the mode counts.
    Spectrum { config: PathBuf },
    /// Print the radial profile of a stored field as CSV.
    Profile { field: PathBuf },
}

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::FieldFormat { .. } => EXIT_IO,
        Error::Config { .. } | Error::ModelRejected(_) | Error::GridMismatch { .. } | Error::InvalidGrid(_) => EXIT_USAGE,
        _ => 1,
    }
}

fn solve(config: &Path, force: bool, out: Option<PathBuf>) -> ndirac::Result<u8> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model()?;
    let mut opts = cfg.solver.clone();
    opts.force = force;
    let result = solver::minimize_ground_state(&model, &opts)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    io::write_solve_outputs(&dir, &result, &cfg)?;
    println!(
        "c={:.12} residual_full={:.3e} iterations={} termination={:?} t_check={:.12} wall_time={:.2}s",
        result.c, result.residual_full, result.iterations, result.termination, result.t_check, result.wall_time
    );
    Ok(if result.converged() { 0 } else { EXIT_NOT_CONVERGED })
}

fn check(config: &Path, out: Option<PathBuf>) -> ndirac::Result<u8> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model()?;
    let report = diagnostics::run_suite(&model, cfg.seed);
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    io::write_json(&dir.join("report.json"), &report)?;
    for c in &report.checks {
        println!("{:6} {:22} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn project(config: &Path, field: &Path) -> ndirac::Result<u8> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model()?;
    let (u, header) = io::read_field(field)?;
    if header.n != cfg.n || header.half_length != cfg.half_length {
        return Err(Error::GridMismatch {
            left_n: header.n,
            left_l: header.half_length,
            right_n: cfg.n,
            right_l: cfg.half_length,
        });
    }
    let sol = nehari::inner_maximize(&u, &model, &cfg.solver.inner, None)?;
    let res = nehari::nehari_residual(&sol.u, &model)?;
    println!("t_star={:.15}", sol.point.t);
    println!("value={:.15}", sol.value);
    println!("residual_self={:.6e}", res.r_self);
    println!("residual_minus={:.6e}", res.r_minus);
    println!("spread={:.6e}", sol.spread);
    println!("iterations={}", sol.iterations);
    Ok(0)
}

fn spectrum(config: &Path) -> ndirac::Result<u8> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model()?;
    let lambda = model.operator().lambda();
    let lo = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambda.iter().copied().fold(0.0, f64::max);
    let modes = model.grid().points();
    println!("lambda_min={lo:.15}");
    println!("lambda_max={hi:.15}");
    println!("k_max={:.15}", model.grid().largest_wavenumber());
    println!("modes={modes}");
    println!("dim_plus={}", 2 * modes);
    println!("dim_minus={}", 2 * modes);
    Ok(0)
}

fn profile(field: &Path) -> ndirac::Result<u8> {
    let (u, _) = io::read_field(field)?;
    print!("{}", io::profile_csv(&u));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(threads) = std::env::var("NDIRAC_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: NDIRAC_THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let outcome = match cli.command {
        Command::Solve { config, force, out } => solve(&config, force, out),
        Command::Check { config, out } => check(&config, out),
        Command::Project { config, field } => project(&config, &field),
        Command::Spectrum { config } => spectrum(&config),
        Command::Profile { field } => profile(&field),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
