//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 numeric failure, 3 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{build_correlation, factor, realization_rng, sample_realization, ChannelRealization, PortGrid};
use crate::error::{Error, Result};
use crate::montecarlo::{run_sweep, ExperimentConfig, ExperimentSummary, RunSettings, Scheme};
use crate::optimizer::{oracle_ej, solve_all_ports, Method};
use crate::rates::GainQuad;
use crate::verify::{oracle_equivalence, DEFAULT_ORACLE_STEPS, EXCESS_TOL, SHORTFALL_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FAS_SECRECY_THREADS";

pub const CSV_HEADER: &str = "scheme,N,W,rho_db,delta,realizations,seed,mean_rate,std_err";

#[derive(Debug, Parser)]
#[command(
    name = "fas-secrecy",
    version,
    about = "Secrecy-rate simulator for fluid-antenna wiretap channels with cooperative jamming",
    after_help = "Set FAS_SECRECY_THREADS to cap the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate versus SNR. Defaults: W=5, N=1,20,50, rho=0,5,...,25 dB, schemes EJ_OPT,GN_OPT.
    Fig1(FigArgs),
    /// Rate versus FAS width. Defaults: rho=10 dB, N=5,10, W=0.5,1,...,9, schemes EJ_OPT,GN_OPT.
    Fig2(FigArgs),
    /// Rate versus port count under imperfect Eve CSI. Defaults: rho=10 dB, W=3,5,
    /// N=1,5,10,...,50, delta=0,0.1,0.5, schemes EJ_OPT,EJ_EQUAL_POWER.
    Fig3(FigArgs),
    /// Solve a single instance and print the chosen port, powers and rates.
    Solve(SolveArgs),
    /// Compare the closed-form solver with the brute-force oracle on random instances.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct FigArgs {
    /// Channel realizations per sweep point.
    #[arg(long, default_value_t = crate::montecarlo::DEFAULT_REALIZATIONS)]
    pub realizations: u64,
    /// Base seed; every sweep point reuses it so schemes share channel draws.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Port counts (comma separated).
    #[arg(long = "N", value_delimiter = ',')]
    pub n_ports: Option<Vec<usize>>,
    /// Normalized FAS widths in wavelengths (comma separated).
    #[arg(long = "W", value_delimiter = ',')]
    pub widths: Option<Vec<f64>>,
    /// SNR values in dB (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rho: Option<Vec<f64>>,
    /// Eve CSI uncertainty values (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Schemes: EJ_OPT, GN_OPT, EJ_EQUAL_POWER (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<String>>,
    /// Scale of Alice antenna 1 to Bob channels.
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    /// Scale of Alice antenna 2 to Bob channels.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Grid resolution of the Gaussian-noise jamming baseline.
    #[arg(long, default_value_t = crate::montecarlo::DEFAULT_GN_STEPS)]
    pub gn_steps: usize,
    /// Output CSV path [default: figN.csv].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["gains", "seed"])))]
pub struct SolveArgs {
    /// Single-port gains |h1|^2,|h2|^2,|g1|^2,|g2|^2.
    #[arg(long, value_delimiter = ',')]
    pub gains: Option<Vec<f64>>,
    /// Draw a correlated realization with this seed instead.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total transmit power budget (linear).
    #[arg(long = "P")]
    pub budget: f64,
    /// Port count for --seed.
    #[arg(long = "N", default_value_t = 10)]
    pub n_ports: usize,
    /// FAS width for --seed.
    #[arg(long = "W", default_value_t = 5.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Cross-check against the brute-force oracle.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = DEFAULT_ORACLE_STEPS)]
    pub oracle_steps: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Edge resolution of the oracle grid.
    #[arg(long, default_value_t = DEFAULT_ORACLE_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl Figure {
    fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

fn range(start: f64, step: f64, end: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Builds the sweep for a figure, applying flag overrides to its defaults.
pub fn figure_config(fig: Figure, args: &FigArgs, threads: Option<usize>) -> Result<ExperimentConfig> {
    let (schemes, n_ports, widths, rho_db, deltas) = match fig {
        Figure::Fig1 => (
            vec![Scheme::EjOpt, Scheme::GnOpt],
            vec![1, 20, 50],
            vec![5.0],
            range(0.0, 5.0, 25.0),
            vec![0.0],
        ),
        Figure::Fig2 => (
            vec![Scheme::EjOpt, Scheme::GnOpt],
            vec![5, 10],
            range(0.5, 0.5, 9.0),
            vec![10.0],
            vec![0.0],
        ),
        Figure::Fig3 => (
            vec![Scheme::EjOpt, Scheme::EjEqualPower],
            std::iter::once(1).chain((5..=50).step_by(5)).collect(),
            vec![3.0, 5.0],
            vec![10.0],
            vec![0.0, 0.1, 0.5],
        ),
    };
    let schemes = match &args.schemes {
        Some(names) => names.iter().map(|s| s.parse()).collect::<Result<Vec<Scheme>>>()?,
        None => schemes,
    };
    Ok(ExperimentConfig {
        schemes,
        n_ports: args.n_ports.clone().unwrap_or(n_ports),
        widths: args.widths.clone().unwrap_or(widths),
        rho_db: args.rho.clone().unwrap_or(rho_db),
        deltas: args.delta.clone().unwrap_or(deltas),
        settings: RunSettings {
            realizations: args.realizations,
            seed: args.seed,
            sigma1: args.sigma1,
            sigma2: args.sigma2,
            gn_grid_steps: args.gn_steps,
            threads,
        },
    })
}

#[derive(Serialize)]
struct CsvRow {
    scheme: String,
    #[serde(rename = "N")]
    n_ports: usize,
    #[serde(rename = "W")]
    width: f64,
    rho_db: f64,
    delta: f64,
    realizations: u64,
    seed: u64,
    mean_rate: f64,
    std_err: f64,
}

/// Writes one CSV row per sweep point with a fixed header and `\n` endings.
pub fn write_summary_csv<W: Write>(summary: &ExperimentSummary, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for row in &summary.rows {
        w.serialize(CsvRow {
            scheme: row.point.scheme.to_string(),
            n_ports: row.point.n_ports,
            width: row.point.width,
            rho_db: row.point.rho_db,
            delta: row.point.delta,
            realizations: row.realizations,
            seed: row.seed,
            mean_rate: row.mean_rate,
            std_err: row.std_err,
        })?;
    }
    if summary.rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::Domain(_) | Error::EigenNonConvergence { .. } | Error::Realization { .. } => EXIT_NUMERIC,
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
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
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    let threads = threads_from_env()?;
    match command {
        Command::Fig1(a) => cmd_figure(Figure::Fig1, &a, threads, out),
        Command::Fig2(a) => cmd_figure(Figure::Fig2, &a, threads, out),
        Command::Fig3(a) => cmd_figure(Figure::Fig3, &a, threads, out),
        Command::Solve(a) => cmd_solve(&a, out),
        Command::OracleCheck(a) => cmd_oracle_check(&a, threads, out),
    }
}

fn cmd_figure(fig: Figure, args: &FigArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<i32> {
    let cfg = figure_config(fig, args, threads)?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", fig.name())));
    let summary = run_sweep(&cfg)?;
    let file = File::create(&path)?;
    write_summary_csv(&summary, BufWriter::new(file))?;
    writeln!(out, "wrote {} rows to {}", summary.rows.len(), path.display())?;
    Ok(EXIT_OK)
}

fn solve_input(args: &SolveArgs) -> Result<ChannelRealization> {
    if let Some(g) = &args.gains {
        if g.len() != 4 {
            return Err(Error::Config(format!(
                "--gains takes exactly four values, got {}",
                g.len()
            )));
        }
        let q = GainQuad::new(g[0], g[1], g[2], g[3]).map_err(|e| Error::Config(e.to_string()))?;
        let amp = |v: f64| Complex64::new(v.sqrt(), 0.0);
        return ChannelRealization::new(vec![amp(q.gh1)], vec![amp(q.gh2)], amp(q.gg1), amp(q.gg2));
    }
    let seed = args.seed.expect("clap requires --gains or --seed");
    let grid = PortGrid::new(args.n_ports, args.width)?;
    let chan = factor(&build_correlation(&grid)?, args.sigma1, args.sigma2)?;
    Ok(sample_realization(&chan, &mut realization_rng(seed, 0)))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    if !(args.budget.is_finite() && args.budget > 0.0) {
        return Err(Error::Config(format!("--P must be positive, got {}", args.budget)));
    }
    let real = solve_input(args)?;
    let r = solve_all_ports(args.budget, &real)?;
    let q = real.gains(r.port);

    writeln!(out, "port:    {} of {}", r.port + 1, real.n_ports())?;
    writeln!(out, "p1:      {:.9}", r.p1)?;
    writeln!(out, "p2:      {:.9}", r.p2)?;
    if let Method::ClosedForm { case, branch, beta } = r.method {
        match beta {
            Some(b) => writeln!(out, "case:    {case} (beta = {b:.9})")?,
            None => writeln!(out, "case:    {case}")?,
        }
        writeln!(out, "branch:  {branch:?}")?;
    }
    writeln!(out, "R_hat:   {:.9}", q.hat(r.p1, r.p2))?;
    writeln!(out, "R_tilde: {:.9}", q.tilde(r.p1, r.p2))?;
    writeln!(out, "R_bar:   {:.9}", q.bar(r.p1))?;
    writeln!(out, "R_GN:    {:.9}", q.gn(r.p1, r.p2))?;
    writeln!(out, "R_EJ:    {:.9}", r.value)?;

    if args.oracle {
        let o = oracle_ej(args.budget, &real, args.oracle_steps)?;
        let gap = r.value - o.value;
        let ok = (-SHORTFALL_TOL..=EXCESS_TOL).contains(&gap);
        writeln!(
            out,
            "oracle:  {:.9} at port {} (p1 = {:.6}, p2 = {:.6}), gap {gap:.3e} {}",
            o.value,
            o.port + 1,
            o.p1,
            o.p2,
            if ok { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle_check(args: &OracleArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<i32> {
    let job = || oracle_equivalence(args.count, args.seed, args.steps);
    let report = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    writeln!(out, "{report}")?;
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        writeln!(out, "worst instance:\n{}", report.worst)?;
        Ok(EXIT_NUMERIC)
    }
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
