use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spikes_core::rng::RngStream;
use spikes_harness::config::{preset, ExperimentConfig, MethodChoice, PRESETS};
use spikes_harness::criteria::{run_criterion, Suite, VerifyOptions};
use spikes_harness::dump::{thermal_limit_sample, trajectory_dump};
use spikes_harness::output::{write_csv, ResultRow};
use spikes_harness::runner::{default_dt, run, sweep_alpha, RunOptions};
use spikes_harness::setup::build;
use spikes_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "spikes", version, about = "Monte Carlo spike statistics for strongly measured qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config or preset and write the result CSV.
    Run(RunArgs),
    /// Unitary model over every (alpha, gamma) pair of the config.
    SweepAlpha(RunArgs),
    /// Run the acceptance criteria; exit 1 if any fails.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        /// Run only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Judge the unitary data against a corrupted 5 omega intensity.
        #[arg(long)]
        mutate_intensity: bool,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Dump one trajectory's event log and sampled path as JSON.
    Dump {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Points of the sampled path.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the limit jump-and-spike process of the resetting thermal model.
    SampleLimit {
        #[arg(long, default_value_t = 0.77)]
        w_minus_plus: f64,
        #[arg(long, default_value_t = 0.23)]
        w_plus_minus: f64,
        #[arg(long, default_value_t = 0.01)]
        a_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long)]
        start_at_one: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the preset names.
    Presets,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// One of the named presets (see `spikes presets`).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// CSV path; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the wall_time_s column.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

fn load(source: &Source) -> Result<ExperimentConfig> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)
        }
        (None, Some(name)) => preset(name),
        (None, None) => Err(HarnessError::Config("give --config or --preset".into())),
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn csv_command(args: &RunArgs, sweep: bool) -> Result<()> {
    let cfg = load(&args.source)?;
    let opts = RunOptions { workers: args.workers, timing: args.timing };
    let rows: Vec<ResultRow> = if sweep { sweep_alpha(&cfg, args.seed, &opts)? } else { run(&cfg, args.seed, &opts)? };
    let out = args.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from));
    write_csv(sink(out.as_ref())?, &rows)
}

fn json_out<T: serde::Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer(&mut w, value).map_err(|e| HarnessError::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => csv_command(&args, false),
        Command::SweepAlpha(args) => csv_command(&args, true),
        Command::Verify { suite, only, mutate_intensity, workers } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let ids = if only.is_empty() { suite.criteria().to_vec() } else { only };
            let opts = VerifyOptions { workers, mutate_unitary: mutate_intensity };
            let mut failed = Vec::new();
            for id in ids {
                let rep = run_criterion(id, &opts)?;
                print!("{rep}");
                if !rep.passed() {
                    failed.push(id);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Verify(format!("criteria {failed:?} failed")))
            }
        }
        Command::Dump { source, gamma, index, seed, grid, out } => {
            let cfg = load(&source)?;
            cfg.validate()?;
            let gamma = gamma.unwrap_or(cfg.gammas[0]);
            let built = build(&cfg.model, gamma)?;
            let dt = cfg.dt.unwrap_or_else(|| default_dt(&built.engine, gamma));
            let method: MethodChoice = cfg.method();
            let d = trajectory_dump(&built, gamma, method, dt, cfg.t_end(), seed.unwrap_or(cfg.master_seed), index, grid)?;
            json_out(&d, out.as_ref())
        }
        Command::SampleLimit { w_minus_plus, w_plus_minus, a_min, t_end, start_at_one, seed, out } => {
            let s = thermal_limit_sample(w_minus_plus, w_plus_minus, a_min, t_end, start_at_one, RngStream::new(seed, 0))?;
            json_out(&s, out.as_ref())
        }
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
