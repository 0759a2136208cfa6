//! `blockfade` command-line tool.
//!
//! Every subcommand resolves its settings from built-in defaults, then the
//! `--config` file, then `--set section.key=value`, then dedicated flags. It
//! writes one CSV (`--out`, default `<subcommand>.csv`) and a manifest next to
//! it that can be passed back through `--config` to rerun the experiment.

mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{Context, Result};
use blockfade::Exec;
use clap::{Args, Parser, Subcommand};

use manifest::RunManifest;
use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "blockfade", version, about = "Rotated coded modulation over Nakagami-m block fading")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path; the manifest is written to `<out>.manifest`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config file (`key = value` lines under `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any setting, e.g. `--set sim.max_frames=1000`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diversity exponents versus R/M (staircase table).
    Exponents(ExponentsArgs),
    /// Mutual information versus SNR for a fixed channel.
    MiSweep(MiArgs),
    /// Monte Carlo outage probability versus SNR.
    OutageSweep(OutageArgs),
    /// Frame error rate of the coded chain.
    FerSim(FerArgs),
    /// Unitarity and full-diversity check of a catalog rotation.
    CheckRotation(RotationArgs),
    /// Log-log slope of a curve CSV over a probability window.
    Slope(SlopeArgs),
}

#[derive(Args, Debug)]
struct ExponentsArgs {
    #[arg(long = "B")]
    blocks: Option<usize>,
    #[arg(long = "N")]
    dim: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    /// Bits per symbol.
    #[arg(long = "M")]
    bits_per_symbol: Option<usize>,
    /// Evaluate a single R/M (`p/q` or decimal) instead of sweeping.
    #[arg(long)]
    rate_ratio: Option<String>,
    /// L / log SNR; `inf` for unbounded length.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Args, Debug)]
struct MiArgs {
    /// Fading amplitudes, comma separated.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    constellation: Option<String>,
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
struct OutageArgs {
    #[arg(long = "B")]
    blocks: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    constellation: Option<String>,
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    ebn0_db: Option<String>,
    #[arg(long)]
    snr_db: Option<String>,
    /// Trials per point for both Gaussian and discrete inputs.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args, Debug)]
struct FerArgs {
    #[arg(long)]
    ebn0_db: Option<String>,
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    labelings: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_frames: Option<u64>,
    /// Print the resolved configuration with every default and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct RotationArgs {
    #[arg(long)]
    rotation: Option<String>,
    #[arg(long)]
    constellation: Option<String>,
    #[arg(long)]
    scan_cap: Option<u128>,
}

#[derive(Args, Debug)]
struct SlopeArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    pmin: Option<f64>,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    x_column: Option<String>,
    #[arg(long)]
    group: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exponents(_) => "exponents",
            Command::MiSweep(_) => "mi-sweep",
            Command::OutageSweep(_) => "outage-sweep",
            Command::FerSim(_) => "fer-sim",
            Command::CheckRotation(_) => "check-rotation",
            Command::Slope(_) => "slope",
        }
    }

    fn defaults(&self) -> Settings {
        match self {
            Command::Exponents(_) => commands::exponents::settings(),
            Command::MiSweep(_) => commands::mi::settings(),
            Command::OutageSweep(_) => commands::outage::settings(),
            Command::FerSim(_) => commands::fer::settings(),
            Command::CheckRotation(_) => commands::rotation::settings(),
            Command::Slope(_) => commands::slope::settings(),
        }
    }

    fn apply_flags(&self, s: &mut Settings) -> Result<()> {
        match self {
            Command::Exponents(a) => {
                s.flag("exponents", "blocks", a.blocks)?;
                s.flag("exponents", "dim", a.dim)?;
                s.flag("exponents", "m", a.m)?;
                s.flag("exponents", "bits_per_symbol", a.bits_per_symbol)?;
                s.flag("exponents", "rate_ratio", a.rate_ratio.as_ref())?;
                s.flag("exponents", "lambda", a.lambda.as_ref())?;
                s.flag("exponents", "steps", a.steps)?;
            }
            Command::MiSweep(a) => {
                s.flag("channel", "h", a.h.as_ref())?;
                s.flag("mi", "constellation", a.constellation.as_ref())?;
                s.flag("mi", "schemes", a.schemes.as_ref())?;
                s.flag("mi", "snr_db", a.snr_db.as_ref())?;
                s.flag("mi", "method", a.method.as_ref())?;
                s.flag("mi", "samples", a.samples)?;
            }
            Command::OutageSweep(a) => {
                s.flag("channel", "blocks", a.blocks)?;
                s.flag("channel", "m", a.m)?;
                s.flag("outage", "rate", a.rate)?;
                s.flag("outage", "constellation", a.constellation.as_ref())?;
                s.flag("outage", "schemes", a.schemes.as_ref())?;
                s.flag("outage", "ebn0_db", a.ebn0_db.as_ref())?;
                s.flag("outage", "snr_db", a.snr_db.as_ref())?;
                s.flag("outage", "trials_gaussian", a.trials)?;
                s.flag("outage", "trials_discrete", a.trials)?;
            }
            Command::FerSim(a) => {
                s.flag("sim", "ebn0_db", a.ebn0_db.as_ref())?;
                s.flag("rotation", "schemes", a.schemes.as_ref())?;
                s.flag("modulation", "labelings", a.labelings.as_ref())?;
                s.flag("decoder", "iterations", a.iterations)?;
                s.flag("sim", "min_errors", a.min_errors)?;
                s.flag("sim", "max_frames", a.max_frames)?;
            }
            Command::CheckRotation(a) => {
                s.flag("check", "rotation", a.rotation.as_ref())?;
                s.flag("check", "constellation", a.constellation.as_ref())?;
                s.flag("check", "scan_cap", a.scan_cap)?;
            }
            Command::Slope(a) => {
                s.flag("slope", "input", a.input.as_ref().map(|p| p.display()))?;
                s.flag("slope", "pmin", a.pmin)?;
                s.flag("slope", "pmax", a.pmax)?;
                s.flag("slope", "x_column", a.x_column.as_ref())?;
                s.flag("slope", "group", a.group.as_ref())?;
            }
        }
        Ok(())
    }

    fn run(&self, s: &Settings, exec: Exec) -> Result<commands::Output> {
        match self {
            Command::Exponents(_) => commands::exponents::run(s),
            Command::MiSweep(_) => commands::mi::run(s, exec),
            Command::OutageSweep(_) => commands::outage::run(s, exec),
            Command::FerSim(_) => commands::fer::run(s, exec),
            Command::CheckRotation(_) => commands::rotation::run(s, exec),
            Command::Slope(_) => commands::slope::run(s),
        }
    }
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let name = cli.command.name();
    let mut s = cli.command.defaults();
    if let Some(path) = &cli.common.config {
        s.merge_file(path, name)?;
    }
    for assignment in &cli.common.set {
        s.set_assignment(assignment)?;
    }
    cli.command.apply_flags(&mut s)?;
    s.flag("run", "seed", cli.common.seed)?;
    s.get::<u64>("run", "seed")?;
    Ok(s)
}

fn executor(threads: Option<usize>) -> Result<(Exec, usize)> {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            anyhow::ensure!(n > 0, "--threads must be positive");
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting the thread pool")?;
        }
        let n = rayon::current_num_threads();
        Ok((if n == 1 { Exec::Sequential } else { Exec::Parallel }, n))
    }
    #[cfg(not(feature = "parallel"))]
    {
        anyhow::ensure!(threads.unwrap_or(1) > 0, "--threads must be positive");
        Ok((Exec::Sequential, 1))
    }
}

fn real_main(cli: Cli) -> Result<i32> {
    let settings = resolve(&cli)?;
    if let Command::FerSim(FerArgs { dump_config: true, .. }) = &cli.command {
        print!("{}", settings.to_ini(true));
        return Ok(0);
    }
    let (exec, threads) = executor(cli.common.threads)?;
    let out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.command.name())));

    let started = SystemTime::now();
    let output = cli.command.run(&settings, exec)?;
    let finished = SystemTime::now();

    let file = std::fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    output.table.write_csv(std::io::BufWriter::new(file))?;
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        seed: settings.get("run", "seed")?,
        started,
        finished,
        output: out.clone(),
        threads,
        settings,
    };
    let manifest_path = manifest.write()?;
    print!("{}", output.summary);
    println!("wrote {} and {}", out.display(), manifest_path.display());
    Ok(output.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code.clamp(1, 255) as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
