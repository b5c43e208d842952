use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orbitapprox::experiments::{self, ExperimentConfig};
use orbitapprox::exponents::classical::{check_correspondence, estimate_e_classical, XiMatrix};
use orbitapprox::exponents::estimate::plot_pairs;
use orbitapprox::exponents::{classify, condition_1_1_margin, estimate_h, min_profile};
use orbitapprox::lattice::covering::{default_kappa_qmax, CoveringConfig};
use orbitapprox::lattice::{verify_meyer_covering, BoxRegion, Budget, SplitSpace, DEFAULT_MAX_CANDIDATES};
use orbitapprox::linalg::{apply, tuple_norm, AnyTuple, IntMatrix, RealTuple};
use orbitapprox::orbit::{
    best_gamma_search, construct_gamma, estimate_e_xy, verify_cor_1_3, ConstructConfig, DetConstraint, Frontier,
};
use orbitapprox::scalar::{parse_list, Precision, Symbolic, PRECISION_ENV};
use orbitapprox::{Error, Result};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "orbitapprox", version, about = "Diophantine approximation by integer matrices with positive determinant")]
struct Cli {
    /// Write the report here (.csv for CSV where supported, JSON otherwise); stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write plot-ready (log q, -log value) pairs as CSV.
    #[arg(long, global = true)]
    plot_data: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on enumerated candidates.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,
    /// Working precision: binary64, extended or extended:BITS.
    #[arg(long, global = true, env = PRECISION_ENV, default_value = "binary64")]
    precision: Precision,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TupleArgs {
    /// Entries of x, column by column (e.g. "sqrt(2),1").
    #[arg(long)]
    x: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    p: usize,
}

#[derive(Args, Debug, Clone)]
struct TargetArgs {
    /// Entries of y, column by column.
    #[arg(long)]
    y: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sup norm of x, or of γx and γ when --gamma is given.
    Norm {
        #[command(flatten)]
        t: TupleArgs,
        /// Row-major entries of γ.
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Exact frontier of (||γ||, ||γx − y||).
    Search {
        #[command(flatten)]
        t: TupleArgs,
        #[command(flatten)]
        y: TargetArgs,
        #[arg(long)]
        qmax: i64,
        /// Drop the det > 0 constraint.
        #[arg(long)]
        any_det: bool,
    },
    /// Explicit γ with ||γx − y|| < ε.
    Construct {
        #[command(flatten)]
        t: TupleArgs,
        #[command(flatten)]
        y: TargetArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 1000)]
        q_check: i64,
    },
    /// Homogeneous exponent estimate h(x).
    ExponentH {
        #[command(flatten)]
        t: TupleArgs,
        #[arg(long)]
        qmax: i64,
    },
    /// Classical exponent estimate e(ξ), or the comparison with h when --theta is given.
    ExponentE {
        /// Entries of the q×p matrix ξ, column by column.
        #[arg(long)]
        xi: String,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        qmax: i64,
        /// Entries of θ (p×p, column by column) for the h/e comparison.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value = "0.5,1,1.5")]
        sandwich_b: String,
        #[arg(long, default_value = "10,100,1000")]
        sandwich_q: String,
    },
    /// Inhomogeneous exponent estimate e(x, y), or the ||γ||^{-ρ} scan with --rho.
    ExponentXy {
        #[command(flatten)]
        t: TupleArgs,
        #[command(flatten)]
        y: TargetArgs,
        #[arg(long)]
        qmax: i64,
        /// Read the frontier from this CSV instead of searching.
        #[arg(long)]
        frontier: Option<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Heuristic class from the homogeneous exponent.
    Classify {
        #[command(flatten)]
        t: TupleArgs,
        #[arg(long)]
        qmax: i64,
    },
    /// Finite-scan margin inf ||ωx||^p ||ω||^{(n−p)(1+φ)}.
    Margin {
        #[command(flatten)]
        t: TupleArgs,
        #[arg(long)]
        qmax: i64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Covering certificate for the split induced by x.
    Meyer {
        #[command(flatten)]
        t: TupleArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value = "0.2,0.1,0.05,0.02,0.01")]
        eps_grid: String,
        #[arg(long, default_value_t = 20)]
        v_samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Norm bound of the κ scan (default depends on the dimension).
        #[arg(long)]
        qmax: Option<i64>,
    },
    /// Counts of γ with ||γ|| ≤ q and γx in B(0, ρ+1).
    CountBox {
        #[command(flatten)]
        t: TupleArgs,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long)]
        qmax: i64,
    },
    /// Counts of rank-r integer matrices with ||γ|| ≤ q.
    CountRank {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        qmax: i64,
    },
    /// Monte-Carlo estimate of e(x, y) over random pairs.
    Montecarlo {
        /// JSON config; flags below are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 2000)]
        qmax: i64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        box_radius: f64,
    },
    /// Share of random x whose margin stays away from zero.
    Genericity {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        chi: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 500)]
        qmax: i64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Report text in the chosen format.
enum Output {
    Json(String),
    Csv { csv: String, json: String },
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

fn symbols(s: &str) -> Result<Vec<Symbolic>> {
    parse_list(s)
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    Ok(symbols(s)?.iter().map(Symbolic::eval_f64).collect())
}

fn integers(s: &str) -> Result<Vec<i64>> {
    s.split(',').map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{v}'")))).collect()
}

fn dims(t: &TupleArgs, len: usize) -> Result<(usize, usize)> {
    let p = t.p;
    let n = t.n.unwrap_or(if p > 0 { len / p } else { 0 });
    if n * p != len {
        return Err(Error::DimensionMismatch(format!("{len} entries for an {n}x{p} tuple")));
    }
    Ok((n, p))
}

fn tuple(t: &TupleArgs, precision: Precision) -> Result<AnyTuple> {
    let syms = symbols(&t.x)?;
    let (n, p) = dims(t, syms.len())?;
    AnyTuple::from_symbolic(n, p, &syms, precision)
}

fn tuple_f64(t: &TupleArgs) -> Result<RealTuple<f64>> {
    let syms = symbols(&t.x)?;
    let (n, p) = dims(t, syms.len())?;
    RealTuple::<f64>::from_symbolic(n, p, &syms)
}

fn target(t: &TupleArgs, y: &TargetArgs) -> Result<RealTuple<f64>> {
    let syms = symbols(&y.y)?;
    let (n, p) = dims(t, symbols(&t.x)?.len())?;
    RealTuple::<f64>::from_symbolic(n, p, &syms)
}

fn plot_csv(pairs: &[(f64, f64)]) -> String {
    let mut s = String::from("log_q,neg_log_value\n");
    for (a, b) in pairs {
        s.push_str(&format!("{a},{b}\n"));
    }
    s
}

macro_rules! with_tuple {
    ($any:expr, |$x:ident| $body:expr) => {
        match $any {
            AnyTuple::Binary64($x) => $body,
            AnyTuple::Extended($x) => $body,
        }
    };
}

#[derive(Serialize)]
struct NormReport {
    tuple_norm: f64,
    gamma_norm: Option<i64>,
    gamma_det: Option<i128>,
    applied_norm: Option<f64>,
}

#[derive(Serialize)]
struct MarginReport {
    margin: f64,
    phi: f64,
    qmax: i64,
}

fn run(cli: &Cli) -> Result<(Output, Option<String>)> {
    let mut budget = Budget::new(cli.max_candidates);
    let budget = &mut budget;
    let precision = cli.precision;
    Ok(match &cli.command {
        Command::Norm { t, gamma } => {
            let x = tuple_f64(t)?;
            let mut r = NormReport { tuple_norm: tuple_norm(&x), gamma_norm: None, gamma_det: None, applied_norm: None };
            if let Some(g) = gamma {
                let g = IntMatrix::new(x.n(), integers(g)?)?;
                r.gamma_norm = Some(g.sup_norm());
                r.gamma_det = Some(g.det()?);
                r.applied_norm = Some(tuple_norm(&apply(&g, &x)?));
            }
            (Output::Json(json(&r)?), None)
        }
        Command::Search { t, y, qmax, any_det } => {
            let x = tuple_f64(t)?;
            let y = target(t, y)?;
            let c = if *any_det { DetConstraint::Any } else { DetConstraint::Positive };
            let f = best_gamma_search(&x, &y, *qmax, c, budget)?;
            let plot = plot_csv(&plot_pairs(&f.points()));
            (Output::Csv { csv: f.to_csv(), json: json(&f)? }, Some(plot))
        }
        Command::Construct { t, y, epsilon, phi, q_check } => {
            let x = tuple_f64(t)?;
            let y = target(t, y)?;
            let cfg = ConstructConfig { q_check: *q_check, ..ConstructConfig::default() };
            let tr = construct_gamma(&x, &y, *epsilon, *phi, &cfg, budget)?;
            (Output::Json(json(&tr)?), None)
        }
        Command::ExponentH { t, qmax } => {
            let (est, pts) = with_tuple!(tuple(t, precision)?, |x| {
                let prof = min_profile(&x, *qmax, budget)?;
                let pts: Vec<(i64, f64)> = prof.records.iter().map(|r| (r.q, r.m)).collect();
                (estimate_h(&prof)?, pts)
            });
            (Output::Json(json(&est)?), Some(plot_csv(&plot_pairs(&pts))))
        }
        Command::ExponentE { xi, q, p, qmax, theta, sandwich_b, sandwich_q } => {
            let syms = symbols(xi)?;
            match theta {
                Some(th) => {
                    let xi = XiMatrix::new(*q, *p, syms.iter().map(Symbolic::eval_f64).collect())?;
                    let th = numbers(th)?;
                    if th.len() != p * p {
                        return Err(Error::DimensionMismatch(format!("theta needs {} entries", p * p)));
                    }
                    let th = nalgebra::DMatrix::from_column_slice(*p, *p, &th);
                    let r = check_correspondence(&xi, &th, *qmax, &numbers(sandwich_b)?, &integers(sandwich_q)?, budget)?;
                    (Output::Json(json(&r)?), None)
                }
                None => {
                    let est = match precision {
                        Precision::Binary64 => {
                            estimate_e_classical(&XiMatrix::new(*q, *p, syms.iter().map(Symbolic::eval_f64).collect())?, *qmax, budget)?
                        }
                        Precision::Extended { bits } => estimate_e_classical(
                            &XiMatrix::new(*q, *p, syms.iter().map(|s| s.eval_fixed(bits)).collect())?,
                            *qmax,
                            budget,
                        )?,
                    };
                    (Output::Json(json(&est)?), None)
                }
            }
        }
        Command::ExponentXy { t, y, qmax, frontier, rho, count } => {
            let x = tuple_f64(t)?;
            let y = target(t, y)?;
            if let Some(rho) = rho {
                let scan = verify_cor_1_3(&x, &y, *rho, *count, *qmax, budget)?;
                (Output::Json(json(&scan)?), None)
            } else {
                let f = match frontier {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(e.to_string()))?;
                        let f = Frontier::from_csv(&text, *qmax)?;
                        f.validate(Some((&x, &y)), true)?;
                        f
                    }
                    None => best_gamma_search(&x, &y, *qmax, DetConstraint::Positive, budget)?,
                };
                let est = estimate_e_xy(&f)?;
                (Output::Json(json(&est)?), Some(plot_csv(&plot_pairs(&f.points()))))
            }
        }
        Command::Classify { t, qmax } => {
            let r = with_tuple!(tuple(t, precision)?, |x| classify(&x, *qmax, budget)?);
            (Output::Json(json(&r)?), None)
        }
        Command::Margin { t, qmax, phi } => {
            let m = with_tuple!(tuple(t, precision)?, |x| condition_1_1_margin(&x, *phi, *qmax, budget)?);
            (Output::Json(json(&MarginReport { margin: m, phi: *phi, qmax: *qmax })?), None)
        }
        Command::Meyer { t, delta, sigma, eps_grid, v_samples, seed, qmax } => {
            let x = tuple_f64(t)?;
            let split = SplitSpace::from_tuple(&x)?;
            let cfg = CoveringConfig {
                delta: *delta,
                r1: BoxRegion::symmetric_unit(split.d1),
                r2: BoxRegion::symmetric_unit(split.d2),
                sigma: *sigma,
                epsilon_grid: numbers(eps_grid)?,
                v_samples: *v_samples,
                seed: *seed,
                qmax: qmax.unwrap_or_else(|| default_kappa_qmax(split.d)),
            };
            let cert = verify_meyer_covering(&split, &cfg, budget)?;
            (Output::Json(json(&cert)?), None)
        }
        Command::CountBox { t, rho, qmax } => {
            let x = tuple_f64(t)?;
            let s = experiments::count_into_box(&x, *rho, *qmax, budget)?;
            let plot = plot_csv(&s.plot_pairs());
            (Output::Csv { csv: s.to_csv(), json: json(&s)? }, Some(plot))
        }
        Command::CountRank { n, r, qmax } => {
            let s = experiments::count_rank_r(*n, *r, *qmax, budget)?;
            let plot = plot_csv(&s.plot_pairs());
            (Output::Csv { csv: s.to_csv(), json: json(&s)? }, Some(plot))
        }
        Command::Montecarlo { config, n, p, qmax, samples, seed, box_radius } => {
            let cfg = match config {
                Some(path) => {
                    ExperimentConfig::from_json(&std::fs::read_to_string(path).map_err(|e| Error::Parse(e.to_string()))?)?
                }
                None => ExperimentConfig { box_radius: *box_radius, precision, ..ExperimentConfig::new(*n, *p, *qmax, *samples, *seed) },
            };
            let r = experiments::monte_carlo_exponent(&cfg)?;
            (Output::Csv { csv: r.to_csv(), json: r.to_json() }, None)
        }
        Command::Genericity { n, p, chi, samples, qmax, seed } => {
            let r = experiments::genericity_scan(*n, *p, *chi, *samples, *qmax, *seed)?;
            (Output::Json(json(&r)?), None)
        }
    })
}

fn write(path: &Option<PathBuf>, out: Output) -> std::io::Result<()> {
    let csv_requested = path.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let text = match out {
        Output::Json(j) => j,
        Output::Csv { csv, json } => {
            if csv_requested || path.is_none() {
                csv
            } else {
                json
            }
        }
    };
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            let res = stdout.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    stdout.write_all(b"\n")
                }
            });
            match res {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_budget() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok((out, plot)) => {
            if let Err(e) = write(&cli.out, out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if let Some(path) = &cli.plot_data {
                let Some(plot) = plot else {
                    eprintln!("error: this command emits no plot data");
                    return ExitCode::from(1);
                };
                if let Err(e) = std::fs::write(path, plot) {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
