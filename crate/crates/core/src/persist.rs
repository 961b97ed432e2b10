//! Versioned JSON documents for trained models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cart::TreeNode;
use crate::dataset::{SmeRecord, StandardizationParams};
use crate::error::{Error, Result};
use crate::forest::{ForestModel, ForestParams};
use crate::logit::{self, LogisticModel, TrainingMeta};

pub const FORMAT_VERSION: &str = "1";
pub const LOGISTIC_TYPE: &str = "logistic";
pub const FOREST_TYPE: &str = "random_forest";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl Model {
    pub fn model_type(&self) -> &'static str {
        match self {
            Model::Logistic(_) => LOGISTIC_TYPE,
            Model::Forest(_) => FOREST_TYPE,
        }
    }

    /// Probability of default.
    pub fn predict_proba(&self, record: &SmeRecord) -> f64 {
        match self {
            Model::Logistic(m) => m.predict_proba(record),
            Model::Forest(m) => m.predict(record).1,
        }
    }

    pub fn predict_label(&self, record: &SmeRecord, threshold: f64) -> Result<u8> {
        logit::label_at(self.predict_proba(record), threshold)
    }
}

impl From<LogisticModel> for Model {
    fn from(m: LogisticModel) -> Self {
        Model::Logistic(m)
    }
}

impl From<ForestModel> for Model {
    fn from(m: ForestModel) -> Self {
        Model::Forest(m)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogisticDoc {
    format_version: String,
    model_type: String,
    weights: Vec<f64>,
    bias: f64,
    standardization: StandardizationParams,
    training_meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestDoc {
    format_version: String,
    model_type: String,
    params: ForestParams,
    feature_names: Vec<String>,
    trees: Vec<TreeNode>,
    /// Normalized importances; informational, recomputed on load.
    importances: Vec<f64>,
}

pub fn to_json(model: &Model) -> Result<String> {
    let text = match model {
        Model::Logistic(m) => serde_json::to_string_pretty(&LogisticDoc {
            format_version: FORMAT_VERSION.into(),
            model_type: LOGISTIC_TYPE.into(),
            weights: m.weights.clone(),
            bias: m.bias,
            standardization: m.standardization.clone(),
            training_meta: m.training_meta,
        })?,
        Model::Forest(m) => serde_json::to_string_pretty(&ForestDoc {
            format_version: FORMAT_VERSION.into(),
            model_type: FOREST_TYPE.into(),
            params: m.params,
            feature_names: m.feature_names.clone(),
            trees: m.trees.clone(),
            importances: m.feature_importances().values,
        })?,
    };
    Ok(text)
}

pub fn from_json(text: &str) -> Result<Model> {
    // Unbalanced trees can nest deeper than serde_json's default limit.
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let value = Value::deserialize(&mut de)?;
    de.end()?;

    let version = value.get("format_version");
    if version.and_then(Value::as_str) != Some(FORMAT_VERSION) {
        return Err(Error::VersionedFormat(format!(
            "format_version {} is not supported (expected \"{FORMAT_VERSION}\")",
            version.map_or_else(|| "<missing>".to_string(), Value::to_string)
        )));
    }
    let model = match value.get("model_type").and_then(Value::as_str) {
        Some(LOGISTIC_TYPE) => {
            let doc: LogisticDoc = serde_json::from_value(value)?;
            let m = LogisticModel {
                weights: doc.weights,
                bias: doc.bias,
                standardization: doc.standardization,
                training_meta: doc.training_meta,
            };
            m.validate()?;
            Model::Logistic(m)
        }
        Some(FOREST_TYPE) => {
            let doc: ForestDoc = serde_json::from_value(value)?;
            let m = ForestModel::from_trees(doc.trees, doc.params, doc.feature_names);
            m.validate()?;
            Model::Forest(m)
        }
        other => {
            return Err(Error::VersionedFormat(format!(
                "unknown model_type {}",
                other.unwrap_or("<missing>")
            )))
        }
    };
    Ok(model)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json(model)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{self, GeneratorConfig};
    use crate::{forest, logit::LogitHyperparams};

    #[test]
    fn logistic_round_trip_exact() {
        let d = synthgen::generate(&GeneratorConfig { n_samples: 200, ..Default::default() }).unwrap();
        let m = logit::train_logistic(&d, &LogitHyperparams::default()).unwrap();
        let back = from_json(&to_json(&m.clone().into()).unwrap()).unwrap();
        let Model::Logistic(b) = back else { panic!("wrong model type") };
        assert_eq!(b, m);
    }

    #[test]
    fn forest_document_shape() {
        let d = synthgen::generate(&GeneratorConfig { n_samples: 100, ..Default::default() }).unwrap();
        let m = forest::train_forest(&d, &ForestParams { n_trees: 3, ..Default::default() }).unwrap();
        let v: Value = serde_json::from_str(&to_json(&m.clone().into()).unwrap()).unwrap();
        assert_eq!(v["format_version"], "1");
        assert_eq!(v["model_type"], "random_forest");
        assert_eq!(v["trees"].as_array().unwrap().len(), 3);
        assert_eq!(v["feature_names"][2], "Debt_Equity_Ratio");
        assert_eq!(v["importances"].as_array().unwrap().len(), 6);
        let back = from_json(&v.to_string()).unwrap();
        assert_eq!(back, Model::Forest(m));
    }

    #[test]
    fn rejects_unknown_version_and_type() {
        let d = synthgen::generate(&GeneratorConfig { n_samples: 50, ..Default::default() }).unwrap();
        let m = logit::train_logistic(&d, &LogitHyperparams::default()).unwrap();
        let mut v: Value = serde_json::from_str(&to_json(&m.into()).unwrap()).unwrap();
        v["format_version"] = "999".into();
        assert!(matches!(from_json(&v.to_string()), Err(Error::VersionedFormat(_))));
        v["format_version"] = "1".into();
        v["model_type"] = "svm".into();
        assert!(matches!(from_json(&v.to_string()), Err(Error::VersionedFormat(_))));
    }

    #[test]
    fn corrupt_document() {
        assert!(matches!(from_json("{\"format_version\": \"1\", "), Err(Error::Json(_))));
        let bad = r#"{"format_version":"1","model_type":"logistic","weights":[1.0],"bias":0.0}"#;
        assert!(from_json(bad).is_err());
    }
}
