use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rmtlab_cli::{exit_code, run, Experiment, ExperimentConfig, OperatorFormat};

#[derive(Parser)]
#[command(
    name = "rmtlab",
    version,
    about = "Random-matrix, quantized-map and entanglement experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Flags given on the command line override values from `--config`.
#[derive(Args)]
struct Global {
    /// Base seed; every sample draws from a stream derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Matrices per ensemble.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON config file or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Default)]
struct Source {
    /// gue:N, cue-gue:N, cue-hurwitz:N, interp:N:delta, cpe:N, pseudo:n:m,
    /// sawtooth:N:k, harper:N:gamma or baker:N.
    spec: Option<String>,
    /// Operator files (JSON or binary) instead of a spec.
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Raise every operator to this power first.
    #[arg(long)]
    power: Option<u32>,
}

#[derive(Args, Default)]
struct Reference {
    /// Reference library file; built there when missing.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Interpolating-ensemble draws per grid δ when building.
    #[arg(long)]
    samples_per_delta: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Generate operators and write them to files.
    Gen {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Element, eigenvector and spacing distributions with KS summaries.
    Stats {
        #[command(flatten)]
        source: Source,
    },
    /// Best-fit interpolation parameter δ of each distribution.
    FitDelta {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        reference: Reference,
    },
    /// Interpolating-ensemble distributions at δ = 0.1, 0.5, 0.9, 0.98.
    Fig1,
    /// Pseudo-random operator distributions, ⟨Q⟩ and δ-fits for m = 2, 4, 8, 16.
    Fig2 {
        #[command(flatten)]
        reference: Reference,
    },
    /// ⟨Q(t)⟩ series of the sawtooth, Harper and baker's maps.
    Fig3 {
        /// Iterations per map (default 50, baker 100).
        #[arg(long)]
        t_max: Option<u32>,
        #[command(flatten)]
        reference: Reference,
    },
    /// Average entanglement of ensembles, circuits and maps.
    QTable,
    /// Run every acceptance criterion against published values.
    PaperCheck {
        #[command(flatten)]
        reference: Reference,
    },
    /// Build an interpolating-ensemble reference library.
    BuildRef {
        /// Matrix dimension N.
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        reference: Reference,
    },
}

fn apply_source(c: &mut ExperimentConfig, s: Source) {
    if s.spec.is_some() {
        c.spec = s.spec;
    }
    if !s.inputs.is_empty() {
        c.inputs = s.inputs;
    }
    if let Some(p) = s.power {
        c.power = p;
    }
}

fn apply_reference(c: &mut ExperimentConfig, r: Reference) {
    if r.reference.is_some() {
        c.reference = r.reference;
    }
    if let Some(k) = r.samples_per_delta {
        c.samples_per_delta = k;
    }
}

fn resolve(cli: Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    c.experiment = match cli.command {
        Command::Gen { source, format } => {
            apply_source(&mut c, source);
            c.format = match format {
                Format::Json => OperatorFormat::Json,
                Format::Binary => OperatorFormat::Binary,
            };
            Experiment::Gen
        }
        Command::Stats { source } => {
            apply_source(&mut c, source);
            Experiment::Stats
        }
        Command::FitDelta { source, reference } => {
            apply_source(&mut c, source);
            apply_reference(&mut c, reference);
            Experiment::FitDelta
        }
        Command::Fig1 => Experiment::Fig1,
        Command::Fig2 { reference } => {
            apply_reference(&mut c, reference);
            Experiment::Fig2
        }
        Command::Fig3 { t_max, reference } => {
            if t_max.is_some() {
                c.t_max = t_max;
            }
            apply_reference(&mut c, reference);
            Experiment::Fig3
        }
        Command::QTable => Experiment::QTable,
        Command::PaperCheck { reference } => {
            apply_reference(&mut c, reference);
            Experiment::PaperCheck
        }
        Command::BuildRef { dim, reference } => {
            if let Some(d) = dim {
                c.reference_dim = d;
            }
            apply_reference(&mut c, reference);
            Experiment::BuildRef
        }
    };
    let g = cli.global;
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(o) = g.out {
        c.out = o;
    }
    if let Some(n) = g.samples {
        c.samples = n;
    }
    if g.threads.is_some() {
        c.threads = g.threads;
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<()> {
    let config = resolve(cli)?;
    config.validate()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let report = run(&config)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    eprintln!(
        "wrote {} files to {}",
        report.files.len(),
        config.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
