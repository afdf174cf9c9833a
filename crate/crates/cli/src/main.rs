//! Command-line front end: classify matrices, compute and export
//! distributions, run frame pipelines, and execute the verification suites.
//!
//! Exit codes: 0 on success, 1 when a verification (or frame) check fails,
//! 2 on input errors. Diagnostics go to stderr; reports go to stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtfa_core::distributions::wigner_a_auto;
use mtfa_core::engine::{relative_l2_error, SampledSignal};
use mtfa_core::frames::{FrameSystem, Lattice};
use mtfa_core::io::{
    grid_to_csv, grid_to_pgm, parse_matrix_json, parse_signal_csv, signal_to_csv, FrameReport,
};
use mtfa_core::modspaces::{mixed_norm, MixedNormSpec};
use mtfa_core::nalgebra::DMatrix;
use mtfa_core::symplectic::{classify, hbar_projection, tau_projection, BlockSymplectic};
use mtfa_core::verify::{run_suite, Suite, VerifyConfig};
use mtfa_core::{Error, Result};

const SYMPLECTIC_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "mtfa",
    version,
    about = "Time-frequency distributions through symplectic projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    /// Number of samples (power of two).
    #[arg(long = "N", default_value_t = 256)]
    n: usize,
    /// Sample spacing.
    #[arg(long, default_value_t = 0.0625)]
    dx: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Report symplecticity, freeness, covariance, and shift-invertibility of
    /// a matrix (non-symplectic input is reported, not rejected).
    Classify {
        /// Matrix JSON file ({"d": …, "rows": […]}).
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Compute the distribution W_A(f, g) of a signal and export the grid.
    Analyze {
        /// Projection matrix JSON (4d×4d symplectic).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Use the τ-Wigner projection instead of a matrix file.
        #[arg(long, conflicts_with = "matrix")]
        tau: Option<f64>,
        /// Use the semiclassical projection instead of a matrix file.
        #[arg(long, conflicts_with_all = ["matrix", "tau"])]
        hbar: Option<f64>,
        /// Signal CSV file.
        #[arg(long)]
        signal: PathBuf,
        /// Window CSV file (default: the standard Gaussian on the signal grid).
        #[arg(long)]
        window: Option<PathBuf>,
        /// Output path; .csv writes (x, ξ, re, im) rows, .pgm a 16-bit
        /// modulus image. Without --out the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Inner exponent: with --q, print the mixed (p, q) norm of the grid
        /// instead of the grid itself ("inf" for ∞).
        #[arg(long)]
        p: Option<String>,
        /// Outer exponent (see --p).
        #[arg(long)]
        q: Option<String>,
        /// Polynomial weight power for the mixed norm.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
    /// Estimate frame bounds of a deformed Gabor system and compute the
    /// canonical dual window.
    Frame {
        /// Projection matrix JSON (4d×4d symplectic).
        #[arg(long)]
        matrix: PathBuf,
        /// Window CSV file (default: the standard Gaussian).
        #[arg(long)]
        window: Option<PathBuf>,
        /// Lattice time step.
        #[arg(long)]
        a: f64,
        /// Lattice frequency step.
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the dual window as signal CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a signal in a deformed Gabor frame and resynthesize it with the
    /// canonical dual; report the reconstruction error.
    Reconstruct {
        /// Projection matrix JSON (4d×4d symplectic).
        #[arg(long)]
        matrix: PathBuf,
        /// Signal CSV file.
        #[arg(long)]
        signal: PathBuf,
        /// Window CSV file (default: the standard Gaussian on the signal grid).
        #[arg(long)]
        window: Option<PathBuf>,
        /// Lattice time step.
        #[arg(long)]
        a: f64,
        /// Lattice frequency step.
        #[arg(long)]
        b: f64,
        /// Write the reconstructed signal as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suites; exits 0 iff every criterion passes.
    Verify {
        /// moyal | covariance | cohen | frames | modnorm | all
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for the randomized property suites.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`mtfa analyze … | head`) instead of
    // panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    if let Ok(threads) = std::env::var("MTFA_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("mtfa: MTFA_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mtfa: {e}");
            ExitCode::from(2)
        }
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| with_path(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| with_path(path, e))
}

fn read_matrix(path: &Path) -> Result<(DMatrix<f64>, usize)> {
    parse_matrix_json(&read_text(path)?)
}

fn read_projection(path: &Path) -> Result<BlockSymplectic> {
    let (mat, d) = read_matrix(path)?;
    let s = BlockSymplectic::with_tol(mat, d, SYMPLECTIC_TOL)?;
    if s.level() != 2 {
        return Err(Error::Domain(format!(
            "expected a 4d×4d projection matrix, got a {}×{} operator matrix",
            2 * s.d(),
            2 * s.d()
        )));
    }
    Ok(s)
}

fn read_signal(path: &Path) -> Result<SampledSignal> {
    parse_signal_csv(&read_text(path)?)
}

fn read_window(path: Option<&PathBuf>, n: usize, dx: f64) -> Result<SampledSignal> {
    match path {
        Some(p) => {
            let w = read_signal(p)?;
            if w.n() != n || (w.dx - dx).abs() > 1e-12 * dx {
                return Err(Error::DimensionMismatch(
                    "window grid must match the signal grid".into(),
                ));
            }
            Ok(w)
        }
        None => Ok(SampledSignal::gaussian_g0(n, dx)),
    }
}

fn parse_exponent(text: &str) -> Result<f64> {
    if text.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    text.parse::<f64>()
        .map_err(|_| Error::Format(format!("exponent must be a number or \"inf\", got {text:?}")))
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Classify { matrix } => {
            let (mat, d) = read_matrix(&matrix)?;
            let report = classify(&mat, d, SYMPLECTIC_TOL)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Command::Analyze {
            matrix,
            tau,
            hbar,
            signal,
            window,
            out,
            p,
            q,
            s,
        } => {
            let projection = match (&matrix, tau, hbar) {
                (Some(path), None, None) => read_projection(path)?,
                (None, Some(t), None) => tau_projection(t, 1)?,
                (None, None, Some(h)) => hbar_projection(h, 1)?,
                _ => {
                    return Err(Error::Domain(
                        "analyze needs exactly one of --matrix, --tau, --hbar".into(),
                    ))
                }
            };
            let f = read_signal(&signal)?;
            let g = read_window(window.as_ref(), f.n(), f.dx)?;
            let grid = wigner_a_auto(&projection, &f, &g)?;
            match (p, q) {
                (Some(p), Some(q)) => {
                    let (px, qx) = (parse_exponent(&p)?, parse_exponent(&q)?);
                    let spec = MixedNormSpec::new(px, qx, s)?;
                    let norm = mixed_norm(&grid, &spec);
                    let show = |e: f64| {
                        if e.is_infinite() {
                            "inf".to_string()
                        } else {
                            e.to_string()
                        }
                    };
                    println!(
                        "{}",
                        serde_json::json!({
                            "p": show(px),
                            "q": show(qx),
                            "s": s,
                            "norm": norm,
                        })
                    );
                    if let Some(path) = out {
                        write_grid(&grid, &path)?;
                    }
                }
                (None, None) => match out {
                    Some(path) => write_grid(&grid, &path)?,
                    None => print!("{}", grid_to_csv(&grid)),
                },
                _ => {
                    return Err(Error::Domain(
                        "--p and --q must be given together".into(),
                    ))
                }
            }
            Ok(0)
        }
        Command::Frame {
            matrix,
            window,
            a,
            b,
            grid,
            out,
        } => {
            let projection = read_projection(&matrix)?;
            let g = read_window(window.as_ref(), grid.n, grid.dx)?;
            let lattice = Lattice::new(a, b, grid.n, grid.dx)?;
            let system = FrameSystem::new(&projection, &g, lattice)?;
            match system.dual_window() {
                Ok(dual) => {
                    println!("{}", FrameReport::new(&dual, &system.lattice, grid.n).to_json()?);
                    if let Some(path) = out {
                        write_file(&path, signal_to_csv(&dual.gamma).as_bytes())?;
                    }
                    Ok(0)
                }
                Err(e @ Error::NotAFrame { .. }) => {
                    eprintln!("mtfa: {e}");
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
        Command::Reconstruct {
            matrix,
            signal,
            window,
            a,
            b,
            out,
        } => {
            let projection = read_projection(&matrix)?;
            let f = read_signal(&signal)?;
            let g = read_window(window.as_ref(), f.n(), f.dx)?;
            let lattice = Lattice::new(a, b, f.n(), f.dx)?;
            let system = FrameSystem::new(&projection, &g, lattice)?;
            let dual = match system.dual_window() {
                Ok(dual) => dual,
                Err(e @ Error::NotAFrame { .. }) => {
                    eprintln!("mtfa: {e}");
                    return Ok(1);
                }
                Err(e) => return Err(e),
            };
            let coeffs = system.analysis(&f)?;
            let rec = system.reconstruct(&coeffs, &dual.gamma)?;
            let error = relative_l2_error(&rec.samples, &f.samples);
            println!(
                "{}",
                serde_json::json!({
                    "reconstruction_error": error,
                    "iterations": dual.iterations,
                    "bounds": [dual.lower, dual.upper],
                    "lattice": { "a": a, "b": b, "points": system.lattice.points.len() },
                    "N": f.n(),
                })
            );
            if let Some(path) = out {
                write_file(&path, signal_to_csv(&rec).as_bytes())?;
            }
            Ok(0)
        }
        Command::Verify { suite, seed, grid } => {
            let suite: Suite = suite.parse()?;
            let cfg = VerifyConfig {
                seed,
                n: grid.n,
                dx: grid.dx,
            };
            let results = run_suite(suite, &cfg);
            let mut all_passed = true;
            for r in &results {
                println!("{}", r.line());
                all_passed &= r.passed;
            }
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn write_grid(grid: &mtfa_core::Grid2, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => write_file(path, grid_to_csv(grid).as_bytes())?,
        Some("pgm") => write_file(path, &grid_to_pgm(grid))?,
        other => {
            return Err(Error::Format(format!(
                "output extension must be .csv or .pgm, got {other:?}"
            )))
        }
    }
    Ok(())
}
