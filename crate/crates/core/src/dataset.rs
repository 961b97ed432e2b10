//! SME applicant records, CSV ingestion, train/test splitting and feature
//! standardization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const SCHEMA_VERSION: &str = "sme-v1";

/// Canonical CSV header, in file order. The label column is optional.
pub const CANONICAL_COLUMNS: [&str; 7] = [
    "Revenue_Growth",
    "Cash_Flow_Variability",
    "Debt_Equity_Ratio",
    "Profit_Margin",
    "Commodity_Price_Dependency",
    "Industry_Sector",
    "Default_Status",
];

/// Feature names in model order (everything except the label).
pub const FEATURE_NAMES: [&str; 6] = [
    "Revenue_Growth",
    "Cash_Flow_Variability",
    "Debt_Equity_Ratio",
    "Profit_Margin",
    "Commodity_Price_Dependency",
    "Industry_Sector",
];

pub const N_FEATURES: usize = 6;
/// Continuous features occupy indices `0..N_NUMERIC`; the sector code comes last.
pub const N_NUMERIC: usize = 5;
pub const SECTOR_INDEX: usize = 5;

pub const AGRICULTURE: u8 = 0;
pub const MANUFACTURING: u8 = 1;

/// One loan applicant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmeRecord {
    pub revenue_growth: f64,
    pub cash_flow_variability: f64,
    pub debt_equity_ratio: f64,
    pub profit_margin: f64,
    /// Correlation between the firm's revenue and commodity prices.
    pub commodity_price_dependency: f64,
    /// 0 = agriculture, 1 = manufacturing.
    pub industry_sector: u8,
    /// 1 = default, 0 = repaid.
    pub default_status: Option<u8>,
}

impl SmeRecord {
    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.revenue_growth,
            self.cash_flow_variability,
            self.debt_equity_ratio,
            self.profit_margin,
            self.commodity_price_dependency,
            f64::from(self.industry_sector),
        ]
    }

    /// Checks the physical-range invariants, reporting the first violated column.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let finite = [
            (FEATURE_NAMES[0], self.revenue_growth),
            (FEATURE_NAMES[1], self.cash_flow_variability),
            (FEATURE_NAMES[2], self.debt_equity_ratio),
            (FEATURE_NAMES[3], self.profit_margin),
            (FEATURE_NAMES[4], self.commodity_price_dependency),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err((name, format!("value {v} is not finite")));
            }
        }
        if self.cash_flow_variability < 0.0 {
            return Err((FEATURE_NAMES[1], "must be >= 0".into()));
        }
        if self.debt_equity_ratio < 0.0 {
            return Err((FEATURE_NAMES[2], "must be >= 0".into()));
        }
        if !(-1.0..=1.0).contains(&self.commodity_price_dependency) {
            return Err((FEATURE_NAMES[4], "must lie in [-1, 1]".into()));
        }
        if self.industry_sector > 1 {
            return Err((FEATURE_NAMES[5], "must be 0 or 1".into()));
        }
        if matches!(self.default_status, Some(l) if l > 1) {
            return Err((CANONICAL_COLUMNS[6], "must be 0 or 1".into()));
        }
        Ok(())
    }
}

/// An ordered, validated collection of records sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SmeRecord>,
    schema_version: String,
    labeled: bool,
}

impl Dataset {
    pub fn new(records: Vec<SmeRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if let Err((column, message)) = r.validate() {
                return Err(Error::Parse {
                    row: i,
                    column: column.to_string(),
                    message,
                });
            }
        }
        let labeled = !records.is_empty() && records.iter().all(|r| r.default_status.is_some());
        Ok(Dataset {
            records,
            schema_version: SCHEMA_VERSION.to_string(),
            labeled,
        })
    }

    pub fn records(&self) -> &[SmeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    /// Labels in record order. Fails unless every record carries one.
    pub fn labels(&self) -> Result<Vec<u8>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.default_status.ok_or_else(|| {
                    Error::param(format!("record {i} has no Default_Status label"))
                })
            })
            .collect()
    }

    pub fn default_rate(&self) -> Option<f64> {
        if !self.labeled {
            return None;
        }
        let pos = self
            .records
            .iter()
            .filter(|r| r.default_status == Some(1))
            .count();
        Some(pos as f64 / self.records.len() as f64)
    }

    /// Records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let records: Vec<SmeRecord> = indices.iter().map(|&i| self.records[i]).collect();
        let labeled = !records.is_empty() && records.iter().all(|r| r.default_status.is_some());
        Dataset {
            records,
            schema_version: self.schema_version.clone(),
            labeled,
        }
    }

    /// Raw (unstandardized) feature matrix, labels attached when present.
    pub fn to_matrix(&self) -> FeatureMatrix {
        let mut values = Vec::with_capacity(self.records.len() * N_FEATURES);
        for r in &self.records {
            values.extend_from_slice(&r.features());
        }
        let labels = if self.labeled { self.labels().ok() } else { None };
        FeatureMatrix {
            n_features: N_FEATURES,
            values,
            labels,
        }
    }

    pub(crate) fn require_labeled(&self, what: &str) -> Result<Vec<u8>> {
        if self.is_empty() {
            return Err(Error::EmptyInput(format!("{what} needs at least one record")));
        }
        if !self.labeled {
            return Err(Error::param(format!("{what} needs a labeled dataset")));
        }
        self.labels()
    }
}

/// Dense row-major feature matrix with optional binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_features: usize,
    values: Vec<f64>,
    labels: Option<Vec<u8>>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<u8>>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::param("ragged feature rows"));
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(Error::param("label count differs from row count"));
            }
            if l.iter().any(|&y| y > 1) {
                return Err(Error::param("labels must be 0 or 1"));
            }
        }
        Ok(FeatureMatrix {
            n_features,
            values: rows.concat(),
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        if self.n_features == 0 {
            0
        } else {
            self.values.len() / self.n_features
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_features.max(1))
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_features + col]
    }
}

// ---------------------------------------------------------------------------
// CSV

/// Reads a canonical-schema CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Reads canonical-schema CSV from any reader.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();

    let header = match rows.next() {
        None => return Err(Error::EmptyInput("CSV file is empty".into())),
        Some(h) => h.map_err(|e| csv_error(0, e))?,
    };
    let header: Vec<String> = header.iter().map(|s| s.trim_start_matches('\u{feff}').to_string()).collect();
    let labeled = check_header(&header)?;
    let width = header.len();

    let mut records = Vec::new();
    for (row, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| csv_error(row, e))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let num = |col: usize| -> Result<f64> {
            let cell = &rec[col];
            cell.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: CANONICAL_COLUMNS[col].to_string(),
                message: format!("`{cell}` is not a number"),
            })
        };
        let code = |col: usize| -> Result<u8> {
            let v = num(col)?;
            if v == 0.0 {
                Ok(0)
            } else if v == 1.0 {
                Ok(1)
            } else {
                Err(Error::Parse {
                    row,
                    column: CANONICAL_COLUMNS[col].to_string(),
                    message: format!("`{}` is not 0 or 1", &rec[col]),
                })
            }
        };
        let record = SmeRecord {
            revenue_growth: num(0)?,
            cash_flow_variability: num(1)?,
            debt_equity_ratio: num(2)?,
            profit_margin: num(3)?,
            commodity_price_dependency: num(4)?,
            industry_sector: code(5)?,
            default_status: if labeled { Some(code(6)?) } else { None },
        };
        if let Err((column, message)) = record.validate() {
            return Err(Error::Parse {
                row,
                column: column.to_string(),
                message,
            });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("CSV file has a header but no rows".into()));
    }
    Dataset::new(records)
}

fn csv_error(row: usize, e: csv::Error) -> Error {
    Error::Parse {
        row,
        column: String::new(),
        message: e.to_string(),
    }
}

/// Validates the header; returns whether the label column is present.
fn check_header(header: &[String]) -> Result<bool> {
    for name in header {
        if !CANONICAL_COLUMNS.contains(&name.as_str()) {
            return Err(Error::Schema {
                column: name.clone(),
                reason: "unknown column".into(),
            });
        }
    }
    let expected = if header.len() == CANONICAL_COLUMNS.len() {
        &CANONICAL_COLUMNS[..]
    } else {
        &CANONICAL_COLUMNS[..FEATURE_NAMES.len()]
    };
    for (i, want) in expected.iter().enumerate() {
        match header.get(i) {
            None => {
                return Err(Error::Schema {
                    column: want.to_string(),
                    reason: "missing column".into(),
                })
            }
            Some(got) if got != want => {
                let reason = if header.contains(&want.to_string()) {
                    format!("out of order, found `{got}` at position {i}")
                } else {
                    "missing column".to_string()
                };
                return Err(Error::Schema {
                    column: want.to_string(),
                    reason,
                });
            }
            Some(_) => {}
        }
    }
    if header.len() > expected.len() {
        return Err(Error::Schema {
            column: header[expected.len()].clone(),
            reason: "duplicate or extra column".into(),
        });
    }
    Ok(header.len() == CANONICAL_COLUMNS.len())
}

/// Writes the dataset with the canonical header. The label column is
/// emitted only when the dataset is labeled.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if dataset.is_empty() {
        return Err(Error::EmptyInput("refusing to write an empty dataset".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv_to(dataset, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// `Display` for `f64` prints the shortest string that parses back to the
/// same value, so rows round-trip bit-exactly.
pub fn write_csv_to<W: Write>(dataset: &Dataset, out: &mut W) -> std::io::Result<()> {
    let columns = if dataset.is_labeled() {
        &CANONICAL_COLUMNS[..]
    } else {
        &CANONICAL_COLUMNS[..FEATURE_NAMES.len()]
    };
    writeln!(out, "{}", columns.join(","))?;
    for r in dataset.records() {
        write!(
            out,
            "{},{},{},{},{},{}",
            r.revenue_growth,
            r.cash_flow_variability,
            r.debt_equity_ratio,
            r.profit_margin,
            r.commodity_price_dependency,
            r.industry_sector
        )?;
        match (dataset.is_labeled(), r.default_status) {
            (true, Some(y)) => writeln!(out, ",{y}")?,
            _ => writeln!(out)?,
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Splitting

const SPLIT_STREAM: u64 = 0x5350_4c49_54; // "SPLIT"

/// Shuffled index partition `(train, test)` with `round(n * test_fraction)`
/// test indices. Both parts keep shuffle order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::param(format!(
            "splitting {n} records at test_fraction {test_fraction} leaves an empty part"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rng::substream(seed, SPLIT_STREAM);
    idx.shuffle(&mut rng);
    let train = idx.split_off(n_test);
    Ok((train, idx))
}

pub fn split_train_test(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    dataset.require_labeled("split_train_test")?;
    let (train, test) = split_indices(dataset.len(), test_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-feature location/scale for the continuous features. The sector code
/// is never rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
    pub constant: Vec<bool>,
}

impl StandardizationParams {
    /// Number of leading matrix columns these parameters rescale.
    pub fn n_numeric(&self) -> usize {
        self.means.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.means.len();
        if self.std_devs.len() != k || self.constant.len() != k {
            return Err(Error::param("standardization vectors differ in length"));
        }
        for i in 0..k {
            if !(self.std_devs[i] >= 0.0) || (self.std_devs[i] == 0.0) != self.constant[i] {
                return Err(Error::param(format!(
                    "standardization entry {i}: zero std dev must coincide with the constant flag"
                )));
            }
        }
        Ok(())
    }

    /// Standardizes one feature row in place.
    pub fn transform_row(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().take(self.n_numeric()).enumerate() {
            *v = if self.constant[j] {
                0.0
            } else {
                (*v - self.means[j]) / self.std_devs[j]
            };
        }
    }

    /// Inverse of [`transform_row`](Self::transform_row) for non-constant features.
    pub fn inverse_row(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().take(self.n_numeric()).enumerate() {
            *v = if self.constant[j] {
                self.means[j]
            } else {
                *v * self.std_devs[j] + self.means[j]
            };
        }
    }

    /// Applies the parameters to the leading columns of a raw matrix.
    pub fn apply_to_matrix(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check()?;
        if matrix.n_features() < self.n_numeric() {
            return Err(Error::param(format!(
                "matrix has {} features, standardizer expects at least {}",
                matrix.n_features(),
                self.n_numeric()
            )));
        }
        let mut out = matrix.clone();
        for row in out.values.chunks_exact_mut(out.n_features.max(1)) {
            self.transform_row(row);
        }
        Ok(out)
    }
}

/// Mean and population standard deviation of the first `n_numeric` columns.
pub fn fit_matrix_standardizer(matrix: &FeatureMatrix, n_numeric: usize) -> Result<StandardizationParams> {
    let n = matrix.n_rows();
    if n == 0 {
        return Err(Error::EmptyInput("cannot fit a standardizer on zero rows".into()));
    }
    if n_numeric > matrix.n_features() {
        return Err(Error::param("more numeric columns requested than present"));
    }
    let mut means = vec![0.0; n_numeric];
    let mut std_devs = vec![0.0; n_numeric];
    let mut constant = vec![false; n_numeric];
    for j in 0..n_numeric {
        let first = matrix.get(0, j);
        let mean = (0..n).map(|i| matrix.get(i, j)).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (matrix.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
        let is_const = (0..n).all(|i| matrix.get(i, j) == first);
        means[j] = if is_const { first } else { mean };
        std_devs[j] = if is_const { 0.0 } else { var.sqrt() };
        constant[j] = is_const || std_devs[j] == 0.0;
        if constant[j] {
            std_devs[j] = 0.0;
        }
    }
    Ok(StandardizationParams {
        means,
        std_devs,
        constant,
    })
}

pub fn fit_standardizer(train: &Dataset) -> Result<StandardizationParams> {
    fit_matrix_standardizer(&train.to_matrix(), N_NUMERIC)
}

/// Standardized features of `dataset`. The result is a matrix rather than a
/// `Dataset` since rescaled values no longer satisfy the record invariants.
pub fn apply_standardizer(params: &StandardizationParams, dataset: &Dataset) -> Result<FeatureMatrix> {
    if params.n_numeric() != N_NUMERIC {
        return Err(Error::Schema {
            column: "<standardization>".into(),
            reason: format!(
                "parameters cover {} features, schema {} has {N_NUMERIC}",
                params.n_numeric(),
                dataset.schema_version()
            ),
        });
    }
    params.apply_to_matrix(&dataset.to_matrix())
}

// ---------------------------------------------------------------------------

/// Pearson correlation of two equal-length series, clamped to `[-1, 1]`.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "series lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::param("correlation needs at least two observations"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("a series has zero variance".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
