//! Command-line surface for the almost-L_p laboratory.
//!
//! Exit codes: 0 pass, 1 property violation, 2 parse error,
//! 3 unsupported input, 4 missing input, 5 inconclusive-only.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use almost_lp::approx::{mollify, rational_simple_net, simple_ladder, truncate_to_lp, GridBox};
use almost_lp::convergence::{
    full_report, vitali_alpha, vitali_classic, vitali_lambda, FnSequence, ModeReport, Verdict,
    DEFAULT_TOL,
};
use almost_lp::error::AlpError;
use almost_lp::functionals::{
    alpha_norm, alpha_seminorm_on, fnorm_axioms_check, frechet_mu, lambda_p_member,
};
use almost_lp::gallery::{list_entries, run_entry, GalleryParams};
use almost_lp::measure::{integrate_p_whole, MeasurableSet};
use almost_lp::report::{to_json, traces_csv, traces_svg};
use almost_lp::{MeasurableFn, MeasureSpace};

const EXIT_VIOLATION: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_MISSING: u8 = 4;
const EXIT_INCONCLUSIVE: u8 = 5;

#[derive(Parser)]
#[command(name = "alp", about = "Laboratory for the F-space of functions almost in L_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpaceFnArgs {
    /// Measure-space JSON file
    #[arg(long)]
    space: PathBuf,
    /// Function JSON file
    #[arg(long)]
    function: PathBuf,
    /// Exponent p >= 1
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Tail summation tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct SeqArgs {
    /// Sequence JSON file ({"family": ..., ...})
    #[arg(long)]
    sequence: PathBuf,
    /// Exponent p >= 1
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Trace tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Index horizon
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ‖f‖_p, ‖f‖_{α_p}, ‖f‖_μ, and optional restricted seminorms
    Norm {
        #[command(flatten)]
        io: SpaceFnArgs,
        /// Cell ids of a set F for the restricted seminorm ‖f‖_{α_p,F}
        #[arg(long, value_delimiter = ',')]
        seminorm_cells: Vec<usize>,
    },
    /// Decide Λ_p membership with witnesses
    Member {
        #[command(flatten)]
        io: SpaceFnArgs,
        /// Witness budgets δ
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.1, 0.01])]
        deltas: Vec<f64>,
    },
    /// Run every convergence checker on a sequence
    Classify {
        #[command(flatten)]
        seq: SeqArgs,
        /// Output format
        #[arg(long, default_value = "json")]
        format: String,
        /// Write an SVG plot of the mode traces
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Vitali theorem legs vs conclusion
    Vitali {
        /// Theorem variant
        #[arg(value_parser = ["classic", "alpha", "lambda"])]
        variant: String,
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// F-norm axiom suite on random functions
    Axioms {
        /// Number of cells in the random space
        #[arg(long, default_value_t = 16)]
        cells: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Constructive approximation operations
    #[command(subcommand)]
    Approx(ApproxCommand),
    /// Counterexample gallery
    #[command(subcommand)]
    Gallery(GalleryCommand),
}

#[derive(Subcommand)]
enum ApproxCommand {
    /// Dyadic simple-function ladder
    Ladder {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: u32,
    },
    /// Truncate a member into L_p with a certificate
    Truncate {
        #[command(flatten)]
        io: SpaceFnArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Mollify grid values with a bump kernel
    Mollify {
        /// Grid JSON file ({"bounds": [[lo,hi],...], "cells": [n,...]})
        #[arg(long)]
        grid: PathBuf,
        /// CSV file of row-major cell values
        #[arg(long)]
        values: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Kernel radius (multiple of the cell side)
        #[arg(long)]
        h: f64,
    },
    /// Nearby element of the countable dyadic net
    Net {
        #[command(flatten)]
        io: SpaceFnArgs,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// Catalog of entries
    List,
    /// Run one entry
    Run {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn exit_code_for(err: &AlpError) -> u8 {
    match err {
        AlpError::Invalid(_) | AlpError::ParamOutOfDomain(_) | AlpError::UnknownEntry(_) => {
            EXIT_PARSE
        }
        AlpError::UnsupportedFamilyCombination(_) => EXIT_UNSUPPORTED,
        AlpError::MissingLimit => EXIT_MISSING,
        _ => EXIT_VIOLATION,
    }
}

fn read_file(path: &PathBuf) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_MISSING
    })
}

fn load_space(path: &PathBuf) -> Result<MeasureSpace, u8> {
    MeasureSpace::from_json(&read_file(path)?).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })
}

fn load_function(path: &PathBuf) -> Result<MeasurableFn, u8> {
    MeasurableFn::from_json(&read_file(path)?).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })
}

fn load_sequence(args: &SeqArgs) -> Result<FnSequence, u8> {
    let mut seq = FnSequence::from_json(&read_file(&args.sequence)?).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    if let Some(n) = args.n_max {
        seq.n_max = n;
    }
    Ok(seq)
}

fn fail(err: AlpError) -> u8 {
    eprintln!("error: {err}");
    exit_code_for(&err)
}

fn run() -> Result<u8, u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Norm { io, seminorm_cells } => {
            let space = load_space(&io.space)?;
            let f = load_function(&io.function)?;
            let p = io.p;
            let result = (|| -> almost_lp::Result<serde_json::Value> {
                let lp = integrate_p_whole(&space, &f, p, io.tol)?.powf(1.0 / p);
                let alpha = alpha_norm(&space, &f, p, io.tol)?;
                let mu = frechet_mu(&space, &f, io.tol)?;
                let seminorm = if seminorm_cells.is_empty() {
                    None
                } else {
                    let set = MeasurableSet::of_cells(seminorm_cells.iter().copied());
                    set.validate(&space)?;
                    Some(alpha_seminorm_on(&space, &f, p, &set, io.tol)?)
                };
                Ok(serde_json::json!({
                    "p": p,
                    "lp": lp.to_string(),
                    "alpha_p": alpha.to_string(),
                    "frechet_mu": mu,
                    "seminorm_on_F": seminorm,
                }))
            })();
            match result {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).unwrap());
                    Ok(0)
                }
                Err(e) => Err(fail(e)),
            }
        }
        Command::Member { io, deltas } => {
            let space = load_space(&io.space)?;
            let f = load_function(&io.function)?;
            match lambda_p_member(&space, &f, io.p, &deltas, io.tol) {
                Ok(rep) => {
                    println!("{}", to_json(&rep).unwrap());
                    Ok(0)
                }
                Err(e) => Err(fail(e)),
            }
        }
        Command::Classify { seq, format, plot } => {
            let s = load_sequence(&seq)?;
            match full_report(&s, seq.p, seq.tol) {
                Ok(modes) => {
                    let traces: Vec<(String, Vec<(f64, f64)>)> = modes
                        .iter()
                        .map(|m| (m.mode.clone(), m.trace.clone()))
                        .collect();
                    if let Some(path) = plot {
                        let svg = traces_svg("convergence traces", &traces);
                        fs::write(&path, svg).map_err(|e| {
                            eprintln!("error: cannot write {}: {e}", path.display());
                            EXIT_MISSING
                        })?;
                    }
                    match format.as_str() {
                        "csv" => print!("{}", traces_csv(&traces)),
                        _ => println!("{}", to_json(&modes).unwrap()),
                    }
                    Ok(verdict_exit(&modes))
                }
                Err(e) => Err(fail(e)),
            }
        }
        Command::Vitali { variant, seq } => {
            let s = load_sequence(&seq)?;
            let rep = match variant.as_str() {
                "classic" => vitali_classic(&s, seq.p, seq.tol),
                "alpha" => vitali_alpha(&s, seq.p, seq.tol),
                _ => vitali_lambda(&s, seq.p, seq.tol),
            };
            match rep {
                Ok(r) => {
                    println!("{}", to_json(&r).unwrap());
                    Ok(if r.consistent { 0 } else { EXIT_VIOLATION })
                }
                Err(e) => Err(fail(e)),
            }
        }
        Command::Axioms {
            cells,
            trials,
            p,
            seed,
        } => {
            let weights = vec![1.0 / cells.max(1) as f64; cells.max(1)];
            let space = MeasureSpace::finite(&weights).map_err(fail)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match fnorm_axioms_check(&space, p, trials, 1e-10, &mut rng) {
                Ok(rep) => {
                    println!("{}", to_json(&rep).unwrap());
                    Ok(if rep.passed() { 0 } else { EXIT_VIOLATION })
                }
                Err(e) => Err(fail(e)),
            }
        }
        Command::Approx(cmd) => run_approx(cmd),
        Command::Gallery(cmd) => run_gallery(cmd),
    }
}

fn verdict_exit(modes: &[ModeReport]) -> u8 {
    if modes.iter().any(|m| m.verdict == Verdict::Holds || m.verdict == Verdict::Fails) {
        0
    } else {
        EXIT_INCONCLUSIVE
    }
}

fn run_approx(cmd: ApproxCommand) -> Result<u8, u8> {
    match cmd {
        ApproxCommand::Ladder { function, k } => {
            let f = load_function(&function)?;
            match simple_ladder(&f, k) {
                Ok(ladder) => {
                    println!("{}", to_json(&ladder).unwrap());
                    Ok(0)
                }
                Err(e) => Err(fail(e)),
            }
        }
        ApproxCommand::Truncate { io, eps } => {
            let space = load_space(&io.space)?;
            let f = load_function(&io.function)?;
            match truncate_to_lp(&space, &f, io.p, eps, io.tol) {
                Ok(cert) => {
                    println!("{}", to_json(&cert).unwrap());
                    Ok(if cert.alpha_dist < eps { 0 } else { EXIT_VIOLATION })
                }
                Err(e) => Err(fail(e)),
            }
        }
        ApproxCommand::Mollify { grid, values, p, h } => {
            let g: GridBox = serde_json::from_str(&read_file(&grid)?).map_err(|e| {
                eprintln!("error: grid JSON: {e}");
                EXIT_PARSE
            })?;
            let vals: Vec<f64> = read_file(&values)?
                .split([',', '\n'])
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| {
                    eprintln!("error: values CSV: {e}");
                    EXIT_PARSE
                })?;
            match mollify(&g, &vals, p, h) {
                Ok(rep) => {
                    println!("{}", to_json(&rep).unwrap());
                    Ok(0)
                }
                Err(e) => Err(fail(e)),
            }
        }
        ApproxCommand::Net { io, eps } => {
            let space = load_space(&io.space)?;
            let f = load_function(&io.function)?;
            match rational_simple_net(&space, &f, io.p, eps, io.tol) {
                Ok(rep) => {
                    println!("{}", to_json(&rep).unwrap());
                    Ok(if rep.alpha_dist <= 2.0 * eps { 0 } else { EXIT_VIOLATION })
                }
                Err(e) => Err(fail(e)),
            }
        }
    }
}

fn run_gallery(cmd: GalleryCommand) -> Result<u8, u8> {
    match cmd {
        GalleryCommand::List => {
            println!("{}", to_json(&list_entries()).unwrap());
            Ok(0)
        }
        GalleryCommand::Run {
            name,
            p,
            eps,
            r,
            d,
            n,
            seed,
            trials,
        } => {
            let params = GalleryParams {
                p,
                eps,
                r,
                d,
                n,
                seed,
                trials,
            };
            match run_entry(&name, &params) {
                Ok(rep) => {
                    println!("{}", to_json(&rep).unwrap());
                    Ok(if rep.passed { 0 } else { EXIT_VIOLATION })
                }
                Err(e) => Err(fail(e)),
            }
        }
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes (e.g. `alp ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run() {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
