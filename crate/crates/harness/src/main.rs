use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evcf_core::model::{train_linear, train_mlp};
use evcf_core::{Classifier, Model};
use evcf_harness::data::{load_sparse_dataset, write_sparse_dataset};
use evcf_harness::experiment::{explain, imbalance_threshold};
use evcf_harness::report::{emit_report, read_records_csv};
use evcf_harness::synthetic::planted_interaction_dataset;
use evcf_harness::{run_experiment, Algorithm, ExperimentConfig, HarnessError, Result, RunSettings};

#[derive(Parser)]
#[command(name = "evcf", version, about = "Evidence counterfactual explanations for sparse data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one instance and print the explanation as JSON.
    Explain {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Zero-based row of the instance in the data file.
        #[arg(long)]
        instance: usize,
        #[arg(long, default_value = "sedc")]
        algorithm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional experiment config to take search and attribution settings from.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the experiment described by a config file and write its report.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rebuild the summary and plot tables from a records CSV.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train a model and write it as JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        kind: ModelKind,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        l2: f64,
        #[arg(long, default_value_t = 16)]
        hidden: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a synthetic dataset with planted feature-pair interactions.
    Generate {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2000)]
        instances: usize,
        #[arg(long, default_value_t = 50)]
        features: usize,
        #[arg(long, default_value_t = 5)]
        pairs: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Linear,
    Mlp,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Explain {
            data,
            model,
            instance,
            algorithm,
            seed,
            config,
        } => {
            let algorithm: Algorithm = algorithm.parse()?;
            let settings = match config {
                Some(path) => ExperimentConfig::load(path)?.settings(),
                None => RunSettings::default(),
            };
            let data = load_sparse_dataset(data)?;
            let text = std::fs::read_to_string(&model).map_err(|e| HarnessError::Data(format!("{}: {e}", model.display())))?;
            let c = Classifier::<Model>::from_json(&text)?;
            let x = data
                .instances()
                .get(instance)
                .ok_or_else(|| HarnessError::Data(format!("instance {instance} out of range ({} rows)", data.len())))?;
            let e = explain(algorithm, &c, x, seed, &settings)?;
            println!("{}", serde_json::to_string_pretty(&e).expect("explanation serializes"));
        }
        Command::Bench { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let records = run_experiment(&cfg)?;
            if records.is_empty() {
                return Err(HarnessError::Data("no positively predicted instances to explain".into()));
            }
            let summary = emit_report(&records, &cfg.output, true)?;
            for a in &summary.algorithms {
                println!("{:<10} {:>6} records  {:>6.2}% explained", a.algorithm, a.records, a.percentage_explained);
            }
            println!("report written to {}", cfg.output.display());
        }
        Command::Report { records, output } => {
            let records = read_records_csv(records)?;
            emit_report(&records, output, false)?;
        }
        Command::Train {
            data,
            kind,
            output,
            l2,
            hidden,
            learning_rate,
            epochs,
            seed,
        } => {
            let data = load_sparse_dataset(data)?;
            let model: Model = match kind {
                ModelKind::Linear => train_linear(&data, l2, epochs, seed)?.into(),
                ModelKind::Mlp => train_mlp(&data, hidden, learning_rate, epochs, seed)?.into(),
            };
            let threshold = imbalance_threshold(&model, &data)?;
            let c = Classifier::new(model, threshold);
            std::fs::write(&output, c.to_json()).map_err(|e| HarnessError::Data(format!("{}: {e}", output.display())))?;
        }
        Command::Generate {
            output,
            instances,
            features,
            pairs,
            noise,
            seed,
        } => {
            if 2 * pairs > features || !(0.0..=1.0).contains(&noise) {
                return Err(HarnessError::Config("need 2 * pairs <= features and noise in [0, 1]".into()));
            }
            let lo = (features / 6).max(1);
            let d = planted_interaction_dataset(instances, features, pairs, lo..=2 * lo, noise, seed);
            write_sparse_dataset(&d, output)?;
        }
    }
    Ok(())
}
