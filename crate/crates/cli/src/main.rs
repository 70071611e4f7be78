mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use speclearn::group::{parse_group_spec, set_max_order, Signal};
use speclearn::io::{read_json, write_json};
use speclearn::recover::{composition_self_test, noise_sweep, recover_table, sigma_grid, write_accuracy_csv};
use speclearn::repr::{fourier_transform, inverse_fourier, irreps};
use speclearn::specnet::WeightTensor;
use speclearn::train::train;
use speclearn::verify::verify_group;
use speclearn::Error;

use config::ExperimentConfig;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "speclearn", version, about = "Spectral networks on finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier transform of a signal file.
    Transform {
        #[arg(long)]
        group: String,
        /// JSON array of complex values (`[re, im]` pairs or reals).
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Invert the coefficients again and report the largest error.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Train one network and recover its multiplication table.
    Train(RunArgs),
    /// Table accuracy across noise levels.
    Sweep(RunArgs),
    /// Run the invariant self-tests for a group.
    Verify {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover the multiplication table from a weight file.
    Recover {
        weights: PathBuf,
        /// Group to compare against; defaults to the one stored with the weights.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(self.config.as_deref())?;
        if let Some(g) = &self.group {
            cfg.group_spec = Some(g.clone());
        }
        if let Some(s) = self.seed {
            cfg.train.seed = s;
        }
        if let Some(s) = self.sigma {
            cfg.train.noise_sigma = s;
        }
        if let Some(r) = self.runs {
            if let Some(sweep) = cfg.sweep.as_mut() {
                sweep.runs_per_sigma = r;
            }
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Diverged { .. } => EXIT_DIVERGED,
                Error::InvalidOrder(_)
                | Error::OrderTooLarge { .. }
                | Error::GroupSpec(_)
                | Error::UnsupportedGroup(_)
                | Error::Json(_)
                | Error::Shape { .. }
                | Error::Precondition(_)
                | Error::UnknownActivation(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_FAILURE
}

fn apply_max_order_env() -> Result<()> {
    if let Ok(raw) = std::env::var("SPECLEARN_MAX_ORDER") {
        let max: usize = raw
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("SPECLEARN_MAX_ORDER must be a positive integer, got {raw:?}")))?;
        if max == 0 {
            return Err(Error::Precondition("SPECLEARN_MAX_ORDER must be positive".into()).into());
        }
        set_max_order(max);
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_json(path, value).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}

fn cmd_transform(group: &str, input: &Path, out: Option<&Path>, roundtrip: bool) -> Result<u8> {
    let group = parse_group_spec(group)?;
    let signal: Signal = read_json(input).with_context(|| format!("reading signal {}", input.display()))?;
    let set = irreps(&group)?;
    let coefficients = fourier_transform(&group, &set, &signal)?;
    emit_json(&coefficients, out)?;
    if roundtrip {
        let err = inverse_fourier(&group, &set, &coefficients)?.max_abs_diff(&signal);
        eprintln!("round-trip max error: {err:.3e}");
        if err > ROUND_TRIP_TOL {
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(0)
}

fn cmd_train(args: &RunArgs) -> Result<u8> {
    let cfg = args.resolve()?;
    let group = parse_group_spec(cfg.group_spec()?)?;
    let report = train(&group, &cfg.train, &cfg.model)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(dir.join("train_report.json"), &report)?;
    report.write_curve_csv(fs::File::create(dir.join("loss.csv"))?)?;
    write_json(dir.join("weights.json"), &report.weights)?;
    if let Some(step) = report.diverged_at {
        eprintln!("training diverged at step {step}; partial artifacts in {}", dir.display());
        return Ok(EXIT_DIVERGED);
    }
    let mut recovery = recover_table(&report.weights);
    let isomorphic = recovery.compare(&group.table())?;
    write_json(dir.join("recovery.json"), &recovery)?;
    let outcome = if isomorphic { "recovered" } else { "not recovered" };
    match report.final_loss() {
        Some(l) => println!(
            "group {} seed {}: invariance {:.3e}, orthogonality {:.3e}, table {outcome}",
            group.kind(),
            cfg.train.seed,
            l.invariance,
            l.orthogonality
        ),
        None => println!("group {} seed {}: no optimisation steps taken, table {outcome}", group.kind(), cfg.train.seed),
    }
    Ok(if isomorphic { 0 } else { EXIT_FAILURE })
}

fn cmd_sweep(args: &RunArgs) -> Result<u8> {
    let cfg = args.resolve()?;
    let group = parse_group_spec(cfg.group_spec()?)?;
    let sweep = cfg.validate_sweep()?;
    let sigmas = sigma_grid(sweep.sigma_min, sweep.sigma_max, sweep.sigma_step)?;
    let points = noise_sweep(&group, &cfg.train, &cfg.model, &sigmas, sweep.runs_per_sigma)?;
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join("accuracy.csv");
    write_accuracy_csv(fs::File::create(&path)?, &points)?;
    for p in &points {
        println!("sigma {:.3}: accuracy {:.3} over {} runs", p.sigma, p.accuracy, p.runs);
    }
    Ok(0)
}

fn cmd_verify(group: &str, seed: u64) -> Result<u8> {
    let group = parse_group_spec(group)?;
    let report = verify_group(&group, seed)?;
    for c in &report.checks {
        println!(
            "{} {:<40} residual {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.family,
            c.residual,
            c.tolerance
        );
    }
    if report.passed() {
        Ok(0)
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.family).collect();
        eprintln!("violated: {}", failed.join(", "));
        Ok(EXIT_FAILURE)
    }
}

fn cmd_recover(weights: &Path, group: Option<&str>, out: Option<&Path>) -> Result<u8> {
    let w: WeightTensor = read_json(weights).with_context(|| format!("reading weights {}", weights.display()))?;
    let spec = group.unwrap_or(w.group_spec()).to_string();
    let group = parse_group_spec(&spec)?;
    if group.order() != w.order() {
        return Err(Error::Shape { expected: group.order(), got: w.order() }.into());
    }
    let mut report = recover_table(&w);
    let isomorphic = report.compare(&group.table())?;
    emit_json(&report, out)?;
    Ok(if isomorphic { 0 } else { EXIT_FAILURE })
}

fn run(cli: Cli) -> Result<u8> {
    apply_max_order_env()?;
    composition_self_test().context("startup self-test")?;
    match &cli.command {
        Command::Transform { group, input, out, roundtrip } => cmd_transform(group, input, out.as_deref(), *roundtrip),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify { group, seed } => cmd_verify(group, *seed),
        Command::Recover { weights, group, out } => cmd_recover(weights, group.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
