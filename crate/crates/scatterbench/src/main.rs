//! Thin command-line front end over the library pipelines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scatterbench::certificate::{bound_integral_i, Verdict};
use scatterbench::config::RunConfig;
use scatterbench::container;
use scatterbench::datatools::add_noise;
use scatterbench::runner;

#[derive(Parser)]
#[command(name = "scatterbench", version, about = "Forward scattering, contraction certificates and Born inversion on cubic grids")]
struct Cli {
    /// Worker threads for record-level parallelism (0 = machine default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the pipelines declared in the config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One forward solve (potential + wave from the config).
    Forward(ConfigArgs),
    /// Generate a far-field dataset.
    Dataset(ConfigArgs),
    /// Run the contraction certificate; exit status reflects the verdict.
    Certify(ConfigArgs),
    /// Born inversion from self-generated backscattering data.
    InvertBorn(ConfigArgs),
    /// Born inversion followed by fixed-point refinement.
    InvertRefine(ConfigArgs),
    /// Uniqueness (data-separation) experiment.
    UniquenessExp(ConfigArgs),
    /// Perturb a stored dataset with bounded noise.
    Perturb {
        /// Container base path (without extension).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the bound integral I(k, eta, l).
    BoundIntegral {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        l: u32,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("failed to configure thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run_pipelines(args: &ConfigArgs, pipelines: &[&str]) -> scatterbench::Result<ExitCode> {
    // materialize a config with the requested pipeline list and overrides
    let mut cfg = RunConfig::from_path(&args.config)?;
    cfg.run.pipelines = pipelines.iter().map(|s| s.to_string()).collect();
    if let Some(t) = args.tol {
        cfg.forward.tol = t;
    }
    let tmp = tempdir_config(&cfg)?;
    let summary = runner::run(&tmp, args.out.as_deref())?;
    std::fs::remove_file(&tmp).ok();
    report_summary(&summary)
}

fn tempdir_config(cfg: &RunConfig) -> scatterbench::Result<PathBuf> {
    let path = std::env::temp_dir().join(format!(
        "scatterbench-config-{}.toml",
        std::process::id()
    ));
    std::fs::write(
        &path,
        toml::to_string_pretty(cfg).map_err(|e| scatterbench::Error::ConfigValidation {
            field: "(serialize)".into(),
            message: e.to_string(),
        })?,
    )?;
    Ok(path)
}

fn report_summary(summary: &runner::RunSummary) -> scatterbench::Result<ExitCode> {
    for f in &summary.failures {
        eprintln!("pipeline failure: {f}");
    }
    if let Some(v) = summary.certificate_verdict {
        println!(
            "certificate verdict: {}",
            match v {
                Verdict::Certified => "certified",
                Verdict::NotCertifiedAtSampledEta => "not-certified-at-sampled-eta",
            }
        );
        if v != Verdict::Certified {
            return Ok(ExitCode::from(2));
        }
    }
    if summary.failures.is_empty() {
        println!("artifacts in {}", summary.out_dir.display());
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn dispatch(cmd: Command) -> scatterbench::Result<ExitCode> {
    match cmd {
        Command::Run { config, out } => {
            let summary = runner::run(&config, out.as_deref())?;
            report_summary(&summary)
        }
        Command::Forward(args) => run_pipelines(&args, &["forward"]),
        Command::Dataset(args) => run_pipelines(&args, &["dataset"]),
        Command::Certify(args) => run_pipelines(&args, &["certificate"]),
        Command::InvertBorn(args) | Command::InvertRefine(args) => {
            run_pipelines(&args, &["invert"])
        }
        Command::UniquenessExp(args) => run_pipelines(&args, &["uniqueness"]),
        Command::Perturb {
            input,
            delta,
            seed,
            out,
        } => {
            let ds = container::load_dataset(&input)?;
            let noisy = add_noise(&ds, delta, seed)?;
            container::save_dataset(&out, &noisy)?;
            println!("perturbed {} records (delta = {delta}, seed = {seed})", noisy.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::BoundIntegral { k, eta, l } => {
            let v = bound_integral_i(k, eta, l)?;
            println!("{v:.12e}");
            Ok(ExitCode::SUCCESS)
        }
    }
}
