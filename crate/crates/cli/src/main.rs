use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctqw_cli::{
    cmd_analyze, cmd_schedule, cmd_simulate, cmd_sweep, parse_gamma, parse_gamma_grid, write_sweep_csv,
    write_trace_csv, CliError, GraphSpec, MarkedSpec, Problem, Result, Tolerances,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ctqw", version, about = "Spectral analysis of multimarked quantum walk search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Instance {
    /// johnson:n=..,k=.. | complete:n=.. | complete-bipartite:a=..,b=.. | hypercube:d=.. | file:<path>
    #[arg(long)]
    graph: String,
    /// Comma-separated vertex indices, part:left|right, or auto-delta:<δ>
    #[arg(long)]
    marked: String,
    /// asymptotic, midpoint, or a positive number
    #[arg(long)]
    gamma: Option<String>,
}

impl Instance {
    fn load(&self) -> Result<(Problem, ctqw_core::framework::GammaChoice)> {
        let problem = Problem::new(self.graph.parse::<GraphSpec>()?, self.marked.parse::<MarkedSpec>()?)?;
        let choice = match &self.gamma {
            Some(g) => parse_gamma(g)?,
            None => problem.default_gamma(),
        };
        Ok((problem, choice))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify λ±, compute overlaps and predictions, write a JSON report
    Analyze {
        #[command(flatten)]
        instance: Instance,
        /// Threshold on the sinusoidal residual
        #[arg(long, default_value_t = ctqw_core::dynamics::DEFAULT_SINUSOIDAL_THRESHOLD)]
        sinusoidal_threshold: f64,
        /// Relative tolerance for finite-n checks against the large-n limits
        #[arg(long, default_value_t = 0.15)]
        asym_tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample p_exact and p_approx on a time grid, write CSV and a summary
    Simulate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// CSV destination; stdout when absent
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Summary JSON destination; defaults to <output>.summary.json, or stderr
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// One analysis per γ on a grid
    SweepGamma {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        marked: String,
        /// Comma-separated values or start:stop:count
        #[arg(long)]
        gammas: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the search for δ = 1..k in turn on J(n,k) with a hidden pair distance
    JohnsonSchedule {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Hidden distance; drawn from the seed when absent
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, mut out: Box<dyn Write>) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { instance, sinusoidal_threshold, asym_tol, output } => {
            let (problem, choice) = instance.load()?;
            let tol = Tolerances { sinusoidal: sinusoidal_threshold, asymptotic: asym_tol };
            write_json(&cmd_analyze(&problem, choice, tol)?, sink(output.as_ref())?)
        }
        Command::Simulate { instance, tmax, dt, output, summary } => {
            let (problem, choice) = instance.load()?;
            let sim = cmd_simulate(&problem, choice, tmax, dt)?;
            write_trace_csv(&sim.rows, sink(output.as_ref())?)?;
            let summary_path = summary.or_else(|| {
                output.map(|p| {
                    let mut s = p.into_os_string();
                    s.push(".summary.json");
                    PathBuf::from(s)
                })
            });
            match summary_path {
                Some(p) => write_json(&sim.summary, sink(Some(&p))?),
                None => write_json(&sim.summary, Box::new(io::stderr().lock())),
            }
        }
        Command::SweepGamma { graph, marked, gammas, output } => {
            let grid = parse_gamma_grid(&gammas)?;
            let problem = Problem::new(graph.parse()?, marked.parse()?)?;
            write_sweep_csv(&cmd_sweep(&problem, &grid), sink(output.as_ref())?)
        }
        Command::JohnsonSchedule { n, k, delta, seed, output } => {
            write_json(&cmd_schedule(n, k, delta, seed)?, sink(output.as_ref())?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[allow(dead_code)]
fn _assert_error_is_send(e: CliError) -> Box<dyn std::error::Error + Send + Sync> {
    Box::new(e)
}
