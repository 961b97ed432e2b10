//! Confusion matrix and the four headline scores. Default (label 1) is the
//! positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// The same matrix with class 0 treated as positive.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

pub fn confusion_matrix(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::param(format!(
            "label vectors differ in length ({} vs {})",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::param("confusion matrix of zero records"));
    }
    let mut cm = ConfusionMatrix::default();
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(Error::param(format!("label outside {{0, 1}} at position {i}"))),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegenerateFlags {
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

impl DegenerateFlags {
    pub fn any(&self) -> bool {
        self.precision_undefined || self.recall_undefined || self.f1_undefined
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.precision_undefined {
            v.push("precision_undefined");
        }
        if self.recall_undefined {
            v.push("recall_undefined");
        }
        if self.f1_undefined {
            v.push("f1_undefined");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate_flags: DegenerateFlags,
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

/// Zero-denominator scores are reported as 0 with the matching flag set.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::param("confusion matrix is empty"));
    }
    let mut flags = DegenerateFlags::default();
    let precision = if cm.tp + cm.fp == 0 {
        flags.precision_undefined = true;
        0.0
    } else {
        ratio(cm.tp, cm.tp + cm.fp)
    };
    let recall = if cm.tp + cm.fn_ == 0 {
        flags.recall_undefined = true;
        0.0
    } else {
        ratio(cm.tp, cm.tp + cm.fn_)
    };
    // P + R = 0 exactly when tp = 0; otherwise 2PR/(P+R) = 2tp/(2tp+fp+fn).
    let f1 = if cm.tp == 0 {
        flags.f1_undefined = true;
        0.0
    } else {
        ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_)
    };
    Ok(MetricsReport {
        accuracy: ratio(cm.tp + cm.tn, total),
        precision,
        recall,
        f1,
        degenerate_flags: flags,
    })
}

/// Two-decimal rendering used in text tables.
pub fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

impl MetricsReport {
    /// `(row label, value)` in table order.
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("Accuracy", self.accuracy),
            ("Precision", self.precision),
            ("Recall", self.recall),
            ("F-1", self.f1),
        ]
    }
}
