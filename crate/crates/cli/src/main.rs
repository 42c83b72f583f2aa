//! `sthdg`: batch experiment driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sthdg::experiments::{run_experiment, Config, ExperimentKind, Overrides, DEFAULTS};
use sthdg::mesh::MeshMode;
use sthdg::Error;

#[derive(Parser, Debug)]
#[command(name = "sthdg", version, about = "Space-time HDG + AIR experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Space-time L² error and rates on a uniform ladder.
    Converge(RunArgs),
    /// BiCGSTAB iteration counts over meshes and diffusivities.
    Iterations(RunArgs),
    /// Residual and error after every BiCGSTAB step.
    Stagnation(RunArgs),
    /// Adaptive refinement against the uniform ladder.
    Amr(RunArgs),
    /// Iterations per relaxation scheme on the adaptive meshes.
    Relaxcompare(RunArgs),
    /// Topological ordering of the scaled facet system.
    Ordercheck(RunArgs),
    /// Matrix, right-hand side and CF labels for outside study.
    Export(RunArgs),
    /// Print the built-in configuration.
    Defaults,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Slab,
    All,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Config file layered over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    let mut exp = cfg.experiment(kind);
    exp.apply(&Overrides {
        case: args.case.clone(),
        p: args.p,
        nu: args.nu,
        mode: args.mode.map(|m| match m {
            Mode::Slab => MeshMode::SlabBySlab,
            Mode::All => MeshMode::AllAtOnce,
        }),
    })?;
    for f in run_experiment(&exp, &args.out)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Defaults => {
            print!("{DEFAULTS}");
            return ExitCode::SUCCESS;
        }
        Command::Converge(a) => (ExperimentKind::Converge, a),
        Command::Iterations(a) => (ExperimentKind::Iterations, a),
        Command::Stagnation(a) => (ExperimentKind::Stagnation, a),
        Command::Amr(a) => (ExperimentKind::Amr, a),
        Command::Relaxcompare(a) => (ExperimentKind::RelaxCompare, a),
        Command::Ordercheck(a) => (ExperimentKind::OrderCheck, a),
        Command::Export(a) => (ExperimentKind::Export, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sthdg: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
