//! Credit-default scoring for SME loan applicants.
//!
//! Two models are compared on the same data: a logistic-regression baseline
//! (the bank's traditional "Delphi" scorecard) and a random forest of gini
//! trees. The crate also ships a synthetic applicant generator, CSV ingestion,
//! the usual binary-classification scores, and a harness that trains both
//! models on one split and reports them side by side.
//!
//! ```no_run
//! use sme_credit::experiment::{render_report, run_comparison, ExperimentConfig, ReportFormat};
//!
//! let report = run_comparison(&ExperimentConfig::default()).unwrap();
//! print!("{}", render_report(&report, ReportFormat::Text));
//! ```

pub mod cart;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod logit;
pub mod metrics;
pub mod persist;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
