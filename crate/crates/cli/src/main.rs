//! Command-line front end: generate instances, run solvers, certify
//! constants, and compare methods.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "extragrad", version, about = "Extragradient solvers and certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance from a spec such as `quadratic:d=50,mu=1,L=100,diag=true`.
    Gen {
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on an instance.
    Solve(SolveArgs),
    /// Certify an inequality on an instance by sampling.
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mono: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several algorithms and seeds and report iterations to fixed accuracies.
    Bench {
        #[arg(long = "alg", value_enum, required = true)]
        algs: Vec<Alg>,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "seed", default_values_t = [0u64])]
        seeds: Vec<u64>,
        /// Iteration cap for methods without their own stopping rule.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub alg: Alg,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mono: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `trace.csv` and `summary.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alg {
    MirrorProx,
    DualEx,
    MpStrong,
    Baseline,
    EgAccel,
    EgGennorm,
    EgCoord,
    BoxSimplex,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    RelLip,
    StrongMono,
    RelSmooth,
    Estimator,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen { spec, seed, out } => commands::gen(&spec, seed, &out),
        Command::Solve(args) => commands::solve(&args),
        Command::Verify { check, instance, lambda, mono, samples, seed, out } => {
            commands::verify(check, &instance, lambda, mono, samples, seed, out.as_deref())
        }
        Command::Bench { algs, instance, seeds, iters, eps, out } => commands::bench(&algs, &instance, &seeds, iters, eps, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
