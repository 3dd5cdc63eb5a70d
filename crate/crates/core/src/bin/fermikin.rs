use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fermikin::experiment::{self, ExperimentKind};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Micro,
    Boltzmann,
    #[value(name = "compare-theorem1")]
    CompareTheorem1,
    #[value(name = "stationarity-theorem2")]
    StationarityTheorem2,
    #[value(name = "fixed-point", alias = "fixed-point-theorem3")]
    FixedPoint,
    Graphs,
    Diagnostics,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Micro => ExperimentKind::Micro,
            Command::Boltzmann => ExperimentKind::Boltzmann,
            Command::CompareTheorem1 => ExperimentKind::CompareTheorem1,
            Command::StationarityTheorem2 => ExperimentKind::StationarityTheorem2,
            Command::FixedPoint => ExperimentKind::FixedPoint,
            Command::Graphs => ExperimentKind::Graphs,
            Command::Diagnostics => ExperimentKind::Diagnostics,
        }
    }
}

/// Run one experiment from a configuration file.
///
/// Exit codes: 0 success, 1 validation error, 2 compute error,
/// 3 results written but not converged.
#[derive(Debug, Parser)]
#[command(name = "fermikin", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `run.out`, defaults to `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long, env = "FERMIKIN_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: &Cli) -> fermikin::Result<i32> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| fermikin::Error::Parse {
        path: cli.config.clone(),
        message: format!("cannot read config: {e}"),
    })?;
    let mut cfg = experiment::parse_config_as(&cli.config, cli.experiment.into())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    cfg.output = Some(out.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| fermikin::Error::Compute(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| experiment::run(&cfg, Some(&text), &out))?;
    for c in &outcome.manifest.checks {
        println!("{} {}: {}", c.status, c.name, c.detail);
    }
    println!("{} -> {} ({:.2} s)", outcome.manifest.status, out.display(), outcome.manifest.wall_clock_s);
    Ok(outcome.exit_code)
}
