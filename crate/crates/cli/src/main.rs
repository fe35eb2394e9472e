use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use cbct_cli::config::{parse_shadow, parse_stages, ConfigFile, PhantomSource, RunConfig, Stage};
use cbct_cli::export::export_slices;
use cbct_cli::pipeline::{run_pipeline, RECONSTRUCTION};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Cone-beam CT reconstruction through a pseudo-polar discrete Radon space.
#[derive(Parser)]
#[command(name = "cbct", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Opts {
    /// JSON config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    nx: Option<usize>,
    #[arg(long, global = true)]
    nu: Option<usize>,
    #[arg(long = "n-proj", global = true)]
    n_proj: Option<usize>,
    /// Builtin phantom name, ellipsoid JSON file or persisted volume.
    #[arg(long, global = true)]
    phantom: Option<String>,
    /// zero, linear or oracle.
    #[arg(long, global = true)]
    shadow: Option<String>,
    #[arg(long = "far-source", global = true)]
    far_source: Option<Switch>,
    /// Comma-separated stages for `pipeline`.
    #[arg(long, global = true)]
    stages: Option<String>,
    /// Thread cap.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Writes the reference phantom volume.
    Phantom,
    /// Cone-beam projections.
    Project,
    /// Detector derivatives, rebinning, radial integration and shadow fill.
    Radon,
    /// Inverse 3D discrete Radon transform.
    Reconstruct,
    /// PSNR, MSSIM and CNR against the reference phantom.
    Metrics,
    /// Runs `--stages`, all of them by default.
    Pipeline,
    /// Writes min-max windowed PGM slices of a persisted volume.
    ExportSlices {
        /// Volume to slice; defaults to the reconstruction in `--out`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        axis: usize,
        /// Comma-separated slice indices; defaults to the middle slice.
        #[arg(long)]
        indices: Option<String>,
        /// Destination directory; defaults to `<out>/slices`.
        #[arg(long)]
        dest: Option<PathBuf>,
    },
}

fn build_config(opts: &Opts) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        cfg = ConfigFile::load(path)?.apply(cfg)?;
    }
    if let Some(out) = &opts.out {
        cfg.out = out.clone();
    }
    if let Some(nx) = opts.nx {
        cfg.geometry.nx = nx;
    }
    if let Some(nu) = opts.nu {
        cfg.geometry.nu = nu;
    }
    if let Some(n) = opts.n_proj {
        cfg.geometry.n_proj = n;
    }
    if let Some(p) = &opts.phantom {
        cfg.phantom = PhantomSource::parse(p);
    }
    if let Some(s) = &opts.shadow {
        cfg.shadow = parse_shadow(s)?;
    }
    if let Some(f) = opts.far_source {
        cfg.far_source = Some(matches!(f, Switch::On));
    }
    if let Some(s) = &opts.stages {
        cfg.stages = parse_stages(s)?;
    }
    if opts.workers.is_some() {
        cfg.workers = opts.workers;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = build_config(&cli.opts)?;
    let single = |s: Stage| vec![s];
    match cli.command {
        Command::Phantom => cfg.stages = single(Stage::Phantom),
        Command::Project => cfg.stages = single(Stage::Project),
        Command::Radon => cfg.stages = single(Stage::Radon),
        Command::Reconstruct => cfg.stages = single(Stage::Reconstruct),
        Command::Metrics => cfg.stages = single(Stage::Metrics),
        Command::Pipeline => {}
        Command::ExportSlices {
            input,
            axis,
            indices,
            dest,
        } => {
            let input = input.unwrap_or_else(|| cfg.out.join(RECONSTRUCTION));
            let (volume, _) = cbct_radon::io::load_volume(&input)
                .with_context(|| format!("export-slices: cannot load {}", input.display()))?;
            let indices = match indices {
                Some(list) => list
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .context("export-slices: bad index list")?,
                None => vec![volume.n() / 2],
            };
            let dest = dest.unwrap_or_else(|| cfg.out.join("slices"));
            for path in export_slices(&volume, axis, &indices, &dest).context("export-slices")? {
                println!("{}", path.display());
            }
            return Ok(());
        }
    }
    let report = run_pipeline(&cfg)?;
    println!("run {} ({})", report.run_id, cfg.out.display());
    for row in &report.metrics {
        println!("{:<12} {:.6}  {}", row.metric, row.value, row.parameters);
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
