//! Logistic-regression baseline (the "Delphi" proxy).
//!
//! Trained by full-batch gradient descent on L2-regularized mean
//! cross-entropy over standardized features, starting from zero. A step that
//! would raise the loss is halved until it does not.

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset, FeatureMatrix, SmeRecord, StandardizationParams};
use crate::error::{Error, Result};

const PROB_CLAMP: f64 = 1e-12;
const MAX_HALVINGS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogitHyperparams {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the loss by less than this.
    pub tolerance: f64,
}

impl Default for LogitHyperparams {
    fn default() -> Self {
        LogitHyperparams {
            learning_rate: 0.1,
            l2_lambda: 1e-3,
            max_iterations: 5000,
            tolerance: 1e-8,
        }
    }
}

impl LogitHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate must be > 0"));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::param("l2_lambda must be >= 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param("tolerance must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: StandardizationParams,
    pub training_meta: TrainingMeta,
}

/// Logistic function, stable for any finite input.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Regularized mean cross-entropy and its gradient.
///
/// `params` holds the weights followed by the bias; the returned gradient
/// has the same layout. The bias is not penalized.
pub fn loss_and_gradient(params: &[f64], batch: &FeatureMatrix, l2_lambda: f64) -> (f64, Vec<f64>) {
    let d = batch.n_features();
    assert_eq!(params.len(), d + 1, "parameter vector must hold weights plus bias");
    let labels = batch.labels().expect("loss needs labeled rows");
    let n = batch.n_rows();
    let (w, b) = params.split_at(d);
    let b = b[0];

    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (row, &y) in batch.rows().zip(labels) {
        let z = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        let p = sigmoid(z);
        let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        let y = f64::from(y);
        loss -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
        let r = p - y;
        for (g, x) in grad.iter_mut().zip(row) {
            *g += r * x;
        }
        grad[d] += r;
    }
    let inv = 1.0 / n as f64;
    loss *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    loss += 0.5 * l2_lambda * w.iter().map(|v| v * v).sum::<f64>();
    for (g, wi) in grad.iter_mut().zip(w) {
        *g += l2_lambda * wi;
    }
    (loss, grad)
}

/// Full-batch gradient descent from zero. `on_step` sees every accepted
/// iteration's loss.
pub fn gradient_descent(
    batch: &FeatureMatrix,
    hyper: &LogitHyperparams,
    mut on_step: impl FnMut(usize, f64),
) -> Result<(Vec<f64>, TrainingMeta)> {
    hyper.validate()?;
    if batch.n_rows() == 0 {
        return Err(Error::EmptyInput("logistic training needs at least one row".into()));
    }
    let mut params = vec![0.0; batch.n_features() + 1];
    let (mut loss, mut grad) = loss_and_gradient(&params, batch, hyper.l2_lambda);
    let mut iterations = 0;

    'outer: while iterations < hyper.max_iterations {
        let mut step = hyper.learning_rate;
        let mut halvings = 0;
        let (cand, cand_loss, cand_grad) = loop {
            let cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (l, g) = loss_and_gradient(&cand, batch, hyper.l2_lambda);
            if l <= loss {
                break (cand, l, g);
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break 'outer;
            }
            step *= 0.5;
        };
        iterations += 1;
        let decrease = loss - cand_loss;
        params = cand;
        loss = cand_loss;
        grad = cand_grad;
        on_step(iterations, loss);
        if decrease < hyper.tolerance {
            break;
        }
    }
    if params.iter().any(|v| !v.is_finite()) || !loss.is_finite() {
        return Err(Error::param("logistic training diverged"));
    }
    Ok((
        params,
        TrainingMeta {
            iterations,
            final_loss: loss,
        },
    ))
}

pub fn train_logistic(train: &Dataset, hyper: &LogitHyperparams) -> Result<LogisticModel> {
    let labels = train.require_labeled("logistic training")?;
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels(
            "logistic training set contains a single class".into(),
        ));
    }
    let standardization = dataset::fit_standardizer(train)?;
    let batch = dataset::apply_standardizer(&standardization, train)?;
    let (mut params, training_meta) = gradient_descent(&batch, hyper, |_, _| {})?;
    let bias = params.pop().expect("bias slot");
    Ok(LogisticModel {
        weights: params,
        bias,
        standardization,
        training_meta,
    })
}

impl LogisticModel {
    /// Probability of default from a raw feature row.
    pub fn predict_proba_features(&self, raw: &[f64]) -> f64 {
        let mut x = raw.to_vec();
        self.standardization.transform_row(&mut x);
        let z = self.bias + x.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>();
        sigmoid(z)
    }

    pub fn predict_proba(&self, record: &SmeRecord) -> f64 {
        self.predict_proba_features(&record.features())
    }

    /// 1 iff the probability reaches `threshold`; ties go to default.
    pub fn predict_label(&self, record: &SmeRecord, threshold: f64) -> Result<u8> {
        label_at(self.predict_proba(record), threshold)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != dataset::N_FEATURES {
            return Err(Error::param(format!(
                "logistic model has {} weights, expected {}",
                self.weights.len(),
                dataset::N_FEATURES
            )));
        }
        if self.standardization.n_numeric() != dataset::N_NUMERIC {
            return Err(Error::param("logistic model standardization has the wrong width"));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("logistic model has non-finite parameters"));
        }
        Ok(())
    }
}

/// Thresholding shared by both model families: `p >= threshold` is class 1.
pub fn label_at(p: f64, threshold: f64) -> Result<u8> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    Ok(u8::from(p >= threshold))
}
