//! `hiso` — verification suites, spectra, sweeps and exports for the
//! sub-Riemannian geometry of Heisenberg isoperimetric profiles.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric
//! non-convergence.

use clap::{Args, Parser, Subcommand};
use hiso_cli::commands::{self, Outcome};
use hiso_cli::report::write_csv;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hiso", version, about = "Heisenberg isoperimetric profile toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Heisenberg index n >= 1
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Base tolerance used in reports and verdicts
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    format: String,
    /// Worker thread count (HISO_THREADS overrides; default: logical cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full identity battery and report pass/fail per check
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Solve the radial eigenproblem on a truncated graded mesh
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        elements: usize,
        #[arg(long, default_value_t = 1e-3)]
        rho_min: f64,
        #[arg(long, default_value_t = 1.0 - 1e-7)]
        rho_max: f64,
        /// Number of eigenpairs
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Also write eigenfunction samples (rho, phi_1, ...) as CSV
        #[arg(long)]
        functions_out: Option<PathBuf>,
    },
    /// Laurent series coefficients of the radial eigen-ODE
    Frobenius {
        #[command(flatten)]
        common: Common,
        /// Pole order of the ansatz
        #[arg(long, default_value_t = 1)]
        m: i64,
        /// Eigenvalue parameter
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Trace one pole-to-pole geodesic loop
    Geodesic {
        #[command(flatten)]
        common: Common,
        /// Vertical multiplier P_{2n+1} (nonzero)
        #[arg(long)]
        plast: f64,
        #[arg(long, default_value_t = 257)]
        samples: usize,
    },
    /// Export closed-form profile samples
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Evaluate T-graph geometry for a height expression or a sampled grid
    Tgraph {
        #[command(flatten)]
        common: Common,
        /// Height function of rho, e.g. "0.25*(1-rho^2)"
        #[arg(long, conflicts_with = "input")]
        u: Option<String>,
        /// CSV grid input with header x,y[,...],u (uniform spacing)
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Grid nodes per axis (expression mode)
        #[arg(long, default_value_t = 65)]
        grid: usize,
    },
    /// Evaluate the stability functional for one test function
    Variation {
        #[command(flatten)]
        common: Common,
        /// Test function of rho (and theta when n = 1)
        #[arg(long)]
        phi: String,
        /// Hemisphere parity of the pair
        #[arg(long, default_value = "odd", value_parser = ["odd", "even"])]
        parity: String,
    },
    /// Run a named test-function family and report the verdict
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "legendre", value_parser = ["legendre", "bumps", "trig"])]
        family: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

fn resolve_threads(flag: Option<usize>) -> usize {
    std::env::var("HISO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(flag)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
        })
}

fn emit(common: &Common, text: String) -> Result<(), String> {
    match &common.out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn outcome_code(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::VerificationFailure => ExitCode::from(1),
        Outcome::NonConvergence => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Verify { common }
        | Command::Eigen { common, .. }
        | Command::Frobenius { common, .. }
        | Command::Geodesic { common, .. }
        | Command::Profile { common, .. }
        | Command::Tgraph { common, .. }
        | Command::Variation { common, .. }
        | Command::Stability { common, .. } => common.clone(),
    };
    if common.n == 0 {
        return usage_error("--n must be at least 1");
    }
    let threads = resolve_threads(common.threads);
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    let result: Result<(String, Outcome), String> = match &cli.command {
        Command::Verify { .. } => {
            let (report, outcome) = commands::run_verify(common.n, common.tol, threads);
            serde_json::to_string_pretty(&report)
                .map_err(|e| e.to_string())
                .map(|s| (s, outcome))
        }
        Command::Eigen {
            elements,
            rho_min,
            rho_max,
            k,
            functions_out,
            ..
        } => {
            if !(0.0 < *rho_min && rho_min < rho_max && *rho_max < 1.0) {
                return usage_error("need 0 < rho_min < rho_max < 1");
            }
            if common.n < 1 || *k < 1 || *elements < 8 {
                return usage_error("need n >= 1, k >= 1 and at least 8 elements");
            }
            let cfg = commands::EigenConfig {
                n: common.n,
                elements: *elements,
                rho_min: *rho_min,
                rho_max: *rho_max,
                k: *k,
            };
            match commands::run_eigen(&cfg, common.tol, threads) {
                Ok((report, functions, mesh)) => {
                    if let Some(path) = functions_out {
                        let mut header = vec!["rho".to_string()];
                        for i in 0..functions.len() {
                            header.push(format!("phi_{}", i + 1));
                        }
                        let header_refs: Vec<&str> =
                            header.iter().map(String::as_str).collect();
                        let rows: Vec<Vec<f64>> = mesh
                            .iter()
                            .enumerate()
                            .map(|(i, &rho)| {
                                let mut row = vec![rho];
                                row.extend(functions.iter().map(|f| f[i]));
                                row
                            })
                            .collect();
                        if let Err(e) = std::fs::write(path, write_csv(&header_refs, &rows)) {
                            return usage_error(&format!("cannot write eigenfunctions: {e}"));
                        }
                    }
                    serde_json::to_string_pretty(&report)
                        .map_err(|e| e.to_string())
                        .map(|s| (s, Outcome::Pass))
                }
                Err(e) => {
                    eprintln!("eigen solver failed: {e}");
                    return ExitCode::from(3);
                }
            }
        }
        Command::Frobenius { m, mu, terms, .. } => {
            match commands::run_frobenius(common.n, *m, *mu, *terms, common.tol, threads) {
                Ok(report) => {
                    if common.format == "csv" {
                        let rows: Vec<Vec<f64>> = report
                            .coefficients
                            .iter()
                            .enumerate()
                            .map(|(l, &a)| vec![l as f64, a])
                            .collect();
                        Ok((write_csv(&["l", "a_l"], &rows), Outcome::Pass))
                    } else {
                        serde_json::to_string_pretty(&report)
                            .map_err(|e| e.to_string())
                            .map(|s| (s, Outcome::Pass))
                    }
                }
                Err(e) => Err(e),
            }
        }
        Command::Geodesic { plast, samples, .. } => {
            if *plast == 0.0 {
                return usage_error("--plast must be nonzero (P_last = 0 is a straight line)");
            }
            if *samples < 2 {
                return usage_error("--samples must be at least 2");
            }
            commands::run_geodesic(common.n, *plast, *samples).map(|rows| {
                let mut header = vec!["s".to_string()];
                for i in 1..=common.n {
                    header.push(format!("x{i}"));
                    header.push(format!("y{i}"));
                }
                header.push("t".into());
                header.push("rho".into());
                header.push("delta_t".into());
                let refs: Vec<&str> = header.iter().map(String::as_str).collect();
                (write_csv(&refs, &rows), Outcome::Pass)
            })
        }
        Command::Profile { samples, .. } => {
            if *samples < 2 {
                return usage_error("--samples must be at least 2");
            }
            commands::run_profile_export(common.n, *samples)
                .map(|rows| (write_csv(&commands::PROFILE_HEADER, &rows), Outcome::Pass))
        }
        Command::Tgraph {
            u,
            input,
            radius,
            grid,
            ..
        } => {
            if common.n != 1 {
                return usage_error("tgraph supports n = 1");
            }
            let evaluated = match (u, input) {
                (Some(src), None) => {
                    let parsed = match hiso_cli::expr::parse(src) {
                        Ok(p) => p,
                        Err(err) => {
                            eprintln!("{}", err.render(src));
                            return ExitCode::from(2);
                        }
                    };
                    commands::run_tgraph(&parsed, *radius, *grid)
                }
                (None, Some(path)) => match std::fs::read_to_string(path) {
                    Ok(text) => commands::run_tgraph_grid(&text),
                    Err(e) => {
                        return usage_error(&format!("cannot read {}: {e}", path.display()))
                    }
                },
                _ => return usage_error("tgraph needs exactly one of --u or --input"),
            };
            match evaluated {
                Ok(out) => {
                    let text = write_csv(&commands::TGRAPH_HEADER, &out.rows);
                    if !out.converged {
                        eprintln!(
                            "warning: admissibility integral did not converge ({} characteristic nodes)",
                            out.characteristic_points
                        );
                        if let Err(e) = emit(&common, text) {
                            return usage_error(&e);
                        }
                        return ExitCode::from(3);
                    }
                    Ok((text, Outcome::Pass))
                }
                Err(e) => Err(e),
            }
        }
        Command::Variation { phi, parity, .. } => {
            commands::run_variation(common.n, phi, parity, common.tol, threads)
                .and_then(|report| {
                    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
                })
                .map(|s| (s, Outcome::Pass))
        }
        Command::Stability { family, count, .. } => {
            commands::run_stability(common.n, family, *count, common.tol, threads).and_then(
                |(json, outcome)| {
                    serde_json::to_string_pretty(&json)
                        .map_err(|e| e.to_string())
                        .map(|s| (s, outcome))
                },
            )
        }
    };

    match result {
        Ok((text, outcome)) => {
            if let Err(e) = emit(&common, text) {
                return usage_error(&e);
            }
            outcome_code(outcome)
        }
        Err(msg) => usage_error(&msg),
    }
}
