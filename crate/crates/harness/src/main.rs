use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use persnet::satisfaction::{ingest_csv, write_csv};
use persnet::surrogate::{cross_validate, TrainedSurrogate};
use persnet_harness::config::{salt, ExperimentConfig, ModelChoice, Mode};
use persnet_harness::export::{export_results, ExportFormat, ResultSet};
use persnet_harness::{compare, impact, optimize, scale, setup, simulate, HarnessError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "persnet", version, about = "Personalized resource allocation experiments")]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Full-length simulation and the larger evaluation budget.
    #[arg(long, global = true)]
    paper_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled satisfaction dataset.
    GenData,
    /// Train the satisfaction surrogate and report held-out accuracy.
    Train {
        /// Train on this dataset instead of generating one.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Also run stratified k-fold cross-validation.
        #[arg(long)]
        cv: bool,
    },
    /// Optimize one instance and pick the operating point.
    Optimize {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Statistical comparison of the algorithms.
    Compare {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Time-slot simulation of the NPN, FPN and SPN networks.
    Simulate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Front quality against users and evaluation budget.
    Scale {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Front quality against surrogate training-set size.
    SurrogateImpact,
    /// Re-export a saved result file.
    Export {
        /// A JSON result file written by one of the experiment commands.
        #[arg(long)]
        input: PathBuf,
        /// csv, json or plotdata
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

#[derive(Serialize)]
struct TrainingReport {
    config_hash: String,
    seed: u64,
    dataset_hash: String,
    samples: usize,
    train_samples: usize,
    holdout_samples: usize,
    holdout_accuracy: Option<f64>,
    cv_folds: Option<usize>,
    cv_accuracy: Option<Vec<f64>>,
    cv_mean: Option<f64>,
    cv_std: Option<f64>,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if cli.paper_scale {
        cfg = cfg.paper_scale();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_model(path: &Path) -> Result<TrainedSurrogate, HarnessError> {
    if !path.exists() {
        return Err(HarnessError::MissingSurrogate(format!("{} not found; run `persnet train` first", path.display())));
    }
    Ok(TrainedSurrogate::load(path)?)
}

/// The surrogate, when the experiment needs one.
fn maybe_model(cfg: &ExperimentConfig, out: &Path, explicit: &Option<PathBuf>, needed: bool) -> Result<Option<TrainedSurrogate>, HarnessError> {
    if !needed {
        return Ok(None);
    }
    let path = explicit.clone().unwrap_or_else(|| cfg.model_path(out));
    load_model(&path).map(Some)
}

fn save_results(results: &ResultSet, out: &Path) -> Result<(), HarnessError> {
    let mut files = export_results(results, ExportFormat::Json, out)?;
    files.extend(export_results(results, ExportFormat::Csv, out)?);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let out = &cli.out;
    if let Command::Export { input, format } = &cli.command {
        let format: ExportFormat = format.parse()?;
        let results = ResultSet::load(input)?;
        for f in export_results(&results, format, out)? {
            println!("wrote {}", f.display());
        }
        return Ok(());
    }
    let cfg = load_config(cli)?;
    std::fs::create_dir_all(out)?;
    let surrogate_mode = cfg.experiment.model == ModelChoice::Surrogate;
    match &cli.command {
        Command::GenData => {
            let data = setup::build_dataset(&cfg)?;
            let path = out.join("dataset.csv");
            write_csv(&data, &path)?;
            println!("wrote {} ({} samples)", path.display(), data.len());
        }
        Command::Train { data, cv } => {
            let data = match data {
                Some(path) => {
                    let report = ingest_csv(path)?;
                    if !report.skipped.is_empty() {
                        eprintln!("skipped {} malformed rows", report.skipped.len());
                    }
                    report.samples
                }
                None => setup::build_dataset(&cfg)?,
            };
            let (train, holdout) = setup::split_holdout(&data, cfg.surrogate.holdout, cfg.stream_seed(salt::SPLIT, 0));
            let model = setup::train_surrogate(&cfg, &train)?;
            let holdout_accuracy = (!holdout.is_empty()).then(|| model.accuracy(&holdout));
            let cv_report = if *cv {
                let spec = cfg.training.with_seed(cfg.stream_seed(salt::TRAINING, cfg.training.seed));
                Some(cross_validate(&spec, &data, cfg.surrogate.cv_folds, cfg.stream_seed(salt::SPLIT, 2))?)
            } else {
                None
            };
            let path = cfg.model_path(out);
            model.save(&path)?;
            let report = TrainingReport {
                config_hash: cfg.hash(),
                seed: cfg.experiment.seed,
                dataset_hash: model.meta.dataset_hash.clone(),
                samples: data.len(),
                train_samples: train.len(),
                holdout_samples: holdout.len(),
                holdout_accuracy,
                cv_folds: cv_report.as_ref().map(|r| r.fold_accuracy.len()),
                cv_mean: cv_report.as_ref().map(|r| r.mean),
                cv_std: cv_report.as_ref().map(|r| r.std),
                cv_accuracy: cv_report.map(|r| r.fold_accuracy),
            };
            std::fs::write(out.join("training.json"), serde_json::to_string_pretty(&report)?)?;
            println!("wrote {}", path.display());
            if let Some(a) = report.holdout_accuracy {
                println!("held-out accuracy {a:.4}");
            }
            if let (Some(m), Some(s)) = (report.cv_mean, report.cv_std) {
                println!("cross-validation accuracy {m:.4} ± {s:.4}");
            }
        }
        Command::Optimize { model } => {
            let m = maybe_model(&cfg, out, model, surrogate_mode)?;
            save_results(&ResultSet::Optimize(optimize::run_optimize(&cfg, m.as_ref())?), out)?;
        }
        Command::Compare { model } => {
            let m = maybe_model(&cfg, out, model, surrogate_mode)?;
            save_results(&ResultSet::Compare(compare::run_compare(&cfg, m.as_ref())?), out)?;
        }
        Command::Simulate { model } => {
            let m = maybe_model(&cfg, out, model, cfg.simulation.modes.contains(&Mode::Spn))?;
            save_results(&ResultSet::Simulation(simulate::run_simulation(&cfg, m.as_ref())?), out)?;
        }
        Command::Scale { model } => {
            let m = maybe_model(&cfg, out, model, surrogate_mode)?;
            save_results(&ResultSet::Scalability(scale::run_scalability(&cfg, m.as_ref())?), out)?;
        }
        Command::SurrogateImpact => {
            save_results(&ResultSet::SurrogateImpact(impact::run_surrogate_impact(&cfg)?), out)?;
        }
        Command::Export { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
