//! Bagged ensemble of gini trees with soft-vote prediction and
//! mean-decrease-in-impurity importances.
//!
//! Tree `t` draws all of its randomness (bootstrap rows, then per-node
//! feature subsets) from `substream(seed, t)`, so the trained model does not
//! depend on how trees are scheduled across threads, and growing a larger
//! forest with the same seed leaves the first trees unchanged.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{self, TreeNode, TreeParams};
use crate::dataset::{Dataset, FeatureMatrix, SmeRecord, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree_params: TreeParams,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree_params: TreeParams::default(),
            bootstrap: true,
            seed: 42,
        }
    }
}

impl ForestParams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::param("n_trees must be >= 1"));
        }
        self.tree_params.validate(n_features)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub params: ForestParams,
    /// Impurity decrease per feature, one vector per tree.
    pub tree_importance: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
}

/// Normalized importances; all zeros with `degenerate` set when no tree ever split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportances {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub degenerate: bool,
}

impl FeatureImportances {
    /// `(name, value)` pairs, highest first; ties keep feature order.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}

/// `n` uniform draws with replacement from `0..n`.
pub fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

pub fn train_forest(train: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    check_labels(train)?;
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    train_forest_matrix(&train.to_matrix(), names, params)
}

/// Trains on a dedicated pool of `threads` workers.
pub fn train_forest_with_threads(train: &Dataset, params: &ForestParams, threads: usize) -> Result<ForestModel> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?;
    pool.install(|| train_forest(train, params))
}

fn check_labels(train: &Dataset) -> Result<()> {
    let labels = train.require_labeled("forest training")?;
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::DegenerateLabels("forest training set contains a single class".into()));
    }
    Ok(())
}

/// Trains on an arbitrary labeled matrix.
pub fn train_forest_matrix(x: &FeatureMatrix, feature_names: Vec<String>, params: &ForestParams) -> Result<ForestModel> {
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::EmptyInput("forest training needs at least one row".into()));
    }
    if x.labels().is_none() {
        return Err(Error::param("forest training needs labeled rows"));
    }
    if feature_names.len() != x.n_features() {
        return Err(Error::param("feature name count differs from matrix width"));
    }
    params.validate(x.n_features())?;

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng::substream(params.seed, t as u64);
            let rows = if params.bootstrap {
                bootstrap_indices(n, &mut stream)
            } else {
                (0..n).collect()
            };
            cart::grow_tree(x, &rows, &params.tree_params, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel::from_trees(trees, *params, feature_names))
}

impl ForestModel {
    /// Assembles a model, deriving importance accumulators from the trees.
    pub fn from_trees(trees: Vec<TreeNode>, params: ForestParams, feature_names: Vec<String>) -> Self {
        let tree_importance = trees
            .iter()
            .map(|t| t.impurity_decrease(feature_names.len()))
            .collect();
        ForestModel {
            trees,
            params,
            tree_importance,
            feature_names,
        }
    }

    /// Mean leaf class-1 fraction across trees; label 1 iff it reaches 0.5.
    pub fn predict_features(&self, x: &[f64]) -> (u8, f64) {
        let sum: f64 = self.trees.iter().map(|t| t.leaf_for(x).prob_1()).sum();
        let p = sum / self.trees.len() as f64;
        (u8::from(p >= 0.5), p)
    }

    pub fn predict(&self, record: &SmeRecord) -> (u8, f64) {
        self.predict_features(&record.features())
    }

    pub fn feature_importances(&self) -> FeatureImportances {
        let k = self.feature_names.len();
        let mut mean = vec![0.0; k];
        for acc in &self.tree_importance {
            for (m, v) in mean.iter_mut().zip(acc) {
                *m += v;
            }
        }
        let n_trees = self.tree_importance.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n_trees);
        let total: f64 = mean.iter().sum();
        let degenerate = !(total > 0.0);
        let values = if degenerate {
            vec![0.0; k]
        } else {
            mean.iter().map(|m| m / total).collect()
        };
        FeatureImportances {
            names: self.feature_names.clone(),
            values,
            degenerate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() || self.trees.len() != self.params.n_trees {
            return Err(Error::param(format!(
                "forest holds {} trees, params say {}",
                self.trees.len(),
                self.params.n_trees
            )));
        }
        self.params.validate(self.feature_names.len())?;
        for t in &self.trees {
            t.validate(self.feature_names.len())?;
        }
        Ok(())
    }
}
