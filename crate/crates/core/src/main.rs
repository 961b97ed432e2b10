use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sme_credit::dataset::{self, Dataset};
use sme_credit::experiment::{self, DataSource, ExperimentConfig, ReportFormat};
use sme_credit::forest::{self, ForestParams};
use sme_credit::logit::{self, LogitHyperparams};
use sme_credit::persist::{self, Model};
use sme_credit::synthgen::{self, GeneratorConfig};
use sme_credit::{Error, Result};

#[derive(Parser)]
#[command(name = "sme-credit", version, about = "SME credit-default scoring: logistic baseline vs. random forest")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled applicant dataset as CSV.
    Generate {
        /// JSON generator config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Strength of the feature-to-default signal (0 = labels independent of features).
        #[arg(long)]
        signal: Option<f64>,
        #[arg(long)]
        base_rate: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train both models on one split and print the comparison table.
    Compare {
        /// JSON experiment config.
        #[arg(long, conflicts_with = "data")]
        config: Option<PathBuf>,
        /// Labeled CSV to use instead of the generator.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Overrides every seed (generator, split, forest).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trees: Option<usize>,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Worker threads for forest training (result does not depend on it).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Train one model on a labeled CSV and save it as JSON.
    Train {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Score a CSV with a saved model.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Print a saved forest's feature importances.
    Importance {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Logistic,
    Forest,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn generate(config: Option<PathBuf>, n: Option<usize>, seed: Option<u64>, signal: Option<f64>, base_rate: Option<f64>, out: &Path) -> Result<()> {
    let mut cfg = match config {
        Some(p) => GeneratorConfig::from_json(&read_text(&p)?)?,
        None => GeneratorConfig::default(),
    };
    if let Some(v) = n {
        cfg.n_samples = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if let Some(v) = signal {
        cfg.signal_strength = v;
    }
    if let Some(v) = base_rate {
        cfg.base_default_rate = v;
    }
    let data = synthgen::generate(&cfg)?;
    dataset::write_csv(&data, out)?;
    eprintln!(
        "wrote {} records (default rate {:.3}) to {}",
        data.len(),
        data.default_rate().unwrap_or(0.0),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn compare(
    config: Option<PathBuf>,
    data: Option<PathBuf>,
    test_fraction: Option<f64>,
    seed: Option<u64>,
    trees: Option<usize>,
    json: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::from_json(&read_text(&p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = data {
        cfg.data_source = DataSource::CsvPath(p);
    }
    if let Some(f) = test_fraction {
        cfg.test_fraction = f;
    }
    if let Some(s) = seed {
        cfg.split_seed = s;
        cfg.forest_params.seed = s;
        if let DataSource::Generator(g) = &mut cfg.data_source {
            g.seed = s;
        }
    }
    if let Some(k) = trees {
        cfg.forest_params.n_trees = k;
    }
    let report = experiment::run_comparison_with(&cfg, threads, &mut ())?;
    print!("{}", experiment::render_report(&report, ReportFormat::Text));
    if let Some(p) = json {
        fs::write(&p, experiment::render_report(&report, ReportFormat::Json)).map_err(|e| Error::Io { path: p, source: e })?;
    }
    Ok(())
}

fn train(kind: ModelKind, data: &Path, out: &Path, trees: Option<usize>, seed: Option<u64>, threads: Option<usize>) -> Result<()> {
    let train = dataset::load_csv(data)?;
    let model: Model = match kind {
        ModelKind::Logistic => logit::train_logistic(&train, &LogitHyperparams::default())?.into(),
        ModelKind::Forest => {
            let mut params = ForestParams::default();
            if let Some(k) = trees {
                params.n_trees = k;
            }
            if let Some(s) = seed {
                params.seed = s;
            }
            match threads {
                Some(t) => forest::train_forest_with_threads(&train, &params, t)?,
                None => forest::train_forest(&train, &params)?,
            }
            .into()
        }
    };
    persist::save_model(&model, out)?;
    eprintln!("saved {} model to {}", model.model_type(), out.display());
    Ok(())
}

fn score(model: &Path, data: &Path, out: &Path, threshold: f64) -> Result<()> {
    let model = persist::load_model(model)?;
    let data: Dataset = dataset::load_csv(data)?;
    let file = File::create(out).map_err(|e| Error::Io { path: out.into(), source: e })?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::Io { path: out.into(), source: e };
    writeln!(w, "row,prob_default,predicted_default").map_err(io)?;
    for (i, r) in data.records().iter().enumerate() {
        let p = model.predict_proba(r);
        let label = logit::label_at(p, threshold)?;
        writeln!(w, "{i},{p},{label}").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

fn importance(model: &Path) -> Result<()> {
    match persist::load_model(model)? {
        Model::Forest(f) => {
            let imp = f.feature_importances();
            if imp.degenerate {
                println!("degenerate: no tree made a split");
            }
            for (name, v) in imp.ranked() {
                println!("{name:<28}{v:.6}");
            }
            Ok(())
        }
        Model::Logistic(_) => Err(Error::InvalidParameter(
            "importance is defined for random_forest models only".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, n, seed, signal, base_rate, out } => generate(config, n, seed, signal, base_rate, &out),
        Command::Compare { config, data, test_fraction, seed, trees, json, threads } => {
            compare(config, data, test_fraction, seed, trees, json, threads)
        }
        Command::Train { model, data, out, trees, seed, threads } => train(model, &data, &out, trees, seed, threads),
        Command::Score { model, data, out, threshold } => score(&model, &data, &out, threshold),
        Command::Importance { model } => importance(&model),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
