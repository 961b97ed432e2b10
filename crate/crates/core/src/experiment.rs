//! End-to-end comparison of the logistic baseline against the random forest
//! on one shared train/test split.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::forest::{self, FeatureImportances, ForestParams};
use crate::logit::{self, LogitHyperparams};
use crate::metrics::{self, fmt2, ConfusionMatrix, MetricsReport};
use crate::synthgen::GeneratorConfig;

pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Generator(GeneratorConfig),
    CsvPath(PathBuf),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Generator(GeneratorConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data_source: DataSource,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub logit_hyper: LogitHyperparams,
    pub forest_params: ForestParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_source: DataSource::default(),
            test_fraction: 0.3,
            split_seed: 42,
            logit_hyper: LogitHyperparams::default(),
            forest_params: ForestParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let DataSource::Generator(g) = &self.data_source {
            g.validate()?;
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::param("test_fraction must lie in (0, 1)"));
        }
        self.logit_hyper.validate()?;
        self.forest_params.validate(dataset::N_FEATURES)
    }

    fn load_data(&self) -> Result<(Dataset, String)> {
        match &self.data_source {
            DataSource::Generator(g) => {
                let d = crate::synthgen::generate(g)?;
                Ok((d, format!("generator(seed={}, signal_strength={})", g.seed, g.signal_strength)))
            }
            DataSource::CsvPath(p) => Ok((dataset::load_csv(p)?, format!("csv({})", p.display()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub default_rate: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub delphi_metrics: MetricsReport,
    pub forest_metrics: MetricsReport,
    pub delphi_confusion: ConfusionMatrix,
    pub forest_confusion: ConfusionMatrix,
    pub feature_importances: FeatureImportances,
    pub dataset_summary: DatasetSummary,
    pub config_echo: ExperimentConfig,
}

/// Which model and partition a set of row indices was handed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    LogisticTrain,
    ForestTrain,
    LogisticTest,
    ForestTest,
}

/// Observer for the row indices each model sees.
pub trait PartitionProbe {
    fn observe(&mut self, stage: Stage, indices: &[usize]);
}

impl PartitionProbe for () {
    fn observe(&mut self, _: Stage, _: &[usize]) {}
}

pub fn run_comparison(config: &ExperimentConfig) -> Result<ComparisonReport> {
    run_comparison_with(config, None, &mut ())
}

/// Like [`run_comparison`], optionally pinning forest training to `threads`
/// workers and reporting partitions to `probe`.
pub fn run_comparison_with(
    config: &ExperimentConfig,
    threads: Option<usize>,
    probe: &mut dyn PartitionProbe,
) -> Result<ComparisonReport> {
    config.validate()?;
    let (data, source) = config.load_data()?;
    data.require_labeled("comparison")?;

    let (train_idx, test_idx) = dataset::split_indices(data.len(), config.test_fraction, config.split_seed)?;
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let train_labels = train.labels()?;
    let positives = train_labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == train_labels.len() {
        return Err(Error::DegenerateLabels(format!(
            "training split (split_seed {}) contains a single class",
            config.split_seed
        )));
    }
    let y_test = test.labels()?;

    probe.observe(Stage::LogisticTrain, &train_idx);
    let logistic = logit::train_logistic(&train, &config.logit_hyper)?;
    probe.observe(Stage::ForestTrain, &train_idx);
    let forest = match threads {
        Some(t) => forest::train_forest_with_threads(&train, &config.forest_params, t)?,
        None => forest::train_forest(&train, &config.forest_params)?,
    };

    probe.observe(Stage::LogisticTest, &test_idx);
    let delphi_pred = test
        .records()
        .iter()
        .map(|r| logistic.predict_label(r, DECISION_THRESHOLD))
        .collect::<Result<Vec<u8>>>()?;
    probe.observe(Stage::ForestTest, &test_idx);
    let forest_pred: Vec<u8> = test.records().iter().map(|r| forest.predict(r).0).collect();

    let delphi_confusion = metrics::confusion_matrix(&y_test, &delphi_pred)?;
    let forest_confusion = metrics::confusion_matrix(&y_test, &forest_pred)?;
    Ok(ComparisonReport {
        delphi_metrics: metrics::compute_metrics(&delphi_confusion)?,
        forest_metrics: metrics::compute_metrics(&forest_confusion)?,
        delphi_confusion,
        forest_confusion,
        feature_importances: forest.feature_importances(),
        dataset_summary: DatasetSummary {
            n: data.len(),
            n_train: train.len(),
            n_test: test.len(),
            default_rate: data.default_rate().unwrap_or(0.0),
            source,
        },
        config_echo: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

pub fn render_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
            s.push('\n');
            s
        }
        ReportFormat::Text => render_text(report),
    }
}

pub fn parse_json_report(text: &str) -> Result<ComparisonReport> {
    Ok(serde_json::from_str(text)?)
}

fn render_text(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let s = &report.dataset_summary;
    let _ = writeln!(
        out,
        "Data: {} ({} records, default rate {}, train {} / test {})",
        s.source,
        s.n,
        fmt2(s.default_rate),
        s.n_train,
        s.n_test
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<20}{:>14}{:>16}", "Performance metric", "Delphi model", "Random forest");
    for ((name, d), (_, f)) in report.delphi_metrics.rows().iter().zip(report.forest_metrics.rows()) {
        let _ = writeln!(out, "{:<20}{:>14}{:>16}", name, fmt2(*d), fmt2(f));
    }
    for (model, m) in [("Delphi model", &report.delphi_metrics), ("Random forest", &report.forest_metrics)] {
        if m.degenerate_flags.any() {
            let _ = writeln!(out, "note: {model} degenerate scores: {}", m.degenerate_flags.names().join(", "));
        }
    }
    let _ = writeln!(out);
    let imp = &report.feature_importances;
    if imp.degenerate || imp.values.is_empty() {
        let _ = writeln!(out, "Feature importance: degenerate (no tree made a split)");
    } else {
        let _ = writeln!(out, "Feature importance (mean decrease in impurity):");
        for (name, v) in imp.ranked() {
            let _ = writeln!(out, "  {name:<28}{}", fmt2(v));
        }
    }
    out
}
