//! Synthetic SME applicant generator.
//!
//! Features are drawn uniformly from configurable ranges (defaults cover the
//! usual SME profile: revenue growth ±20%, cash-flow variability 10–50%,
//! debt/equity 0.2–3, margins 5–25%, commodity correlation 0.5–1) and the
//! sector is a fair coin. Labels are Bernoulli draws from a latent logistic
//! score whose intercept is calibrated so the marginal default rate matches
//! `base_default_rate`. With `signal_strength = 0` the labels are independent
//! Bernoulli(`base_default_rate`) draws.
//!
//! Continuous draws are half-open: a range `(low, high)` yields values in
//! `[low, high)`; a range with `low == high` yields the constant `low`.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SmeRecord};
use crate::error::{Error, Result};
use crate::logit::sigmoid;
use crate::rng::{self, StreamRng};

/// Stream ids, one per generated column.
mod stream {
    pub const REVENUE_GROWTH: u64 = 1;
    pub const CASH_FLOW_VARIABILITY: u64 = 2;
    pub const DEBT_EQUITY: u64 = 3;
    pub const PROFIT_MARGIN: u64 = 4;
    pub const COMMODITY: u64 = 5;
    pub const SECTOR: u64 = 6;
    pub const LABEL: u64 = 7;
}

const CALIBRATION_SEED: u64 = 0xCA11_B8A7_E5EE_D001;
const CALIBRATION_DRAWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureRanges {
    pub revenue_growth: (f64, f64),
    pub cash_flow_variability: (f64, f64),
    pub debt_equity_ratio: (f64, f64),
    pub profit_margin: (f64, f64),
    pub commodity_price_dependency: (f64, f64),
}

impl Default for FeatureRanges {
    fn default() -> Self {
        FeatureRanges {
            revenue_growth: (-0.2, 0.2),
            cash_flow_variability: (0.1, 0.5),
            debt_equity_ratio: (0.2, 3.0),
            profit_margin: (0.05, 0.25),
            commodity_price_dependency: (0.5, 1.0),
        }
    }
}

/// Weights of the latent default score. Each continuous term is centred and
/// scaled by the midpoint/half-width of its default range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalCoefficients {
    /// On `(debt_equity_ratio - 1.6) / 1.4`.
    pub debt_equity_ratio: f64,
    /// On `(cash_flow_variability - 0.3) / 0.2`.
    pub cash_flow_variability: f64,
    /// On `revenue_growth / 0.2`.
    pub revenue_growth: f64,
    /// On `(profit_margin - 0.15) / 0.1`.
    pub profit_margin: f64,
    /// On `commodity_price_dependency * industry_sector`.
    pub commodity_sector: f64,
    /// On the indicator `debt_equity_ratio > 2.0`.
    pub leverage_step: f64,
}

impl Default for SignalCoefficients {
    fn default() -> Self {
        SignalCoefficients {
            debt_equity_ratio: 1.2,
            cash_flow_variability: 0.8,
            revenue_growth: -0.9,
            profit_margin: -0.7,
            commodity_sector: 0.6,
            leverage_step: 1.0,
        }
    }
}

impl SignalCoefficients {
    /// Only leverage carries signal.
    pub fn leverage_only() -> Self {
        SignalCoefficients {
            debt_equity_ratio: 1.2,
            cash_flow_variability: 0.0,
            revenue_growth: 0.0,
            profit_margin: 0.0,
            commodity_sector: 0.0,
            leverage_step: 1.0,
        }
    }

    /// Latent score without intercept or strength.
    pub fn score(&self, r: &SmeRecord) -> f64 {
        let step = if r.debt_equity_ratio > 2.0 { 1.0 } else { 0.0 };
        self.debt_equity_ratio * (r.debt_equity_ratio - 1.6) / 1.4
            + self.cash_flow_variability * (r.cash_flow_variability - 0.3) / 0.2
            + self.revenue_growth * r.revenue_growth / 0.2
            + self.profit_margin * (r.profit_margin - 0.15) / 0.1
            + self.commodity_sector * r.commodity_price_dependency * f64::from(r.industry_sector)
            + self.leverage_step * step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub base_default_rate: f64,
    pub signal_strength: f64,
    pub ranges: FeatureRanges,
    pub coefficients: SignalCoefficients,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_samples: 1000,
            seed: 42,
            base_default_rate: 0.2,
            signal_strength: 1.0,
            ranges: FeatureRanges::default(),
            coefficients: SignalCoefficients::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::param("n_samples must be >= 1"));
        }
        if !(self.base_default_rate > 0.0 && self.base_default_rate < 1.0) {
            return Err(Error::param("base_default_rate must lie in (0, 1)"));
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength.is_finite()) {
            return Err(Error::param("signal_strength must be finite and >= 0"));
        }
        let r = &self.ranges;
        let named = [
            ("revenue_growth", r.revenue_growth, f64::NEG_INFINITY, f64::INFINITY),
            ("cash_flow_variability", r.cash_flow_variability, 0.0, f64::INFINITY),
            ("debt_equity_ratio", r.debt_equity_ratio, 0.0, f64::INFINITY),
            ("profit_margin", r.profit_margin, f64::NEG_INFINITY, f64::INFINITY),
            ("commodity_price_dependency", r.commodity_price_dependency, -1.0, 1.0),
        ];
        for (name, (lo, hi), min, max) in named {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::param(format!("range for {name} must satisfy low <= high")));
            }
            if lo < min || hi > max {
                return Err(Error::param(format!("range for {name} must lie within [{min}, {max}]")));
            }
        }
        let c = &self.coefficients;
        let coefs = [
            c.debt_equity_ratio,
            c.cash_flow_variability,
            c.revenue_growth,
            c.profit_margin,
            c.commodity_sector,
            c.leverage_step,
        ];
        if coefs.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("signal coefficients must be finite"));
        }
        Ok(())
    }
}

/// A validated config together with its calibrated intercept.
#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    config: GeneratorConfig,
    intercept: f64,
}

impl SyntheticGenerator {
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let intercept = calibrate_intercept(&config);
        Ok(SyntheticGenerator { config, intercept })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// `sigmoid(b0 + s * score(record))`.
    pub fn latent_default_probability(&self, record: &SmeRecord) -> f64 {
        if self.config.signal_strength == 0.0 {
            return self.config.base_default_rate;
        }
        sigmoid(self.intercept + self.config.signal_strength * self.config.coefficients.score(record))
    }

    pub fn generate(&self) -> Dataset {
        let mut records = draw_features(&self.config.ranges, self.config.n_samples, self.config.seed);
        let mut labels = rng::substream(self.config.seed, stream::LABEL);
        for r in &mut records {
            let p = self.latent_default_probability(r);
            r.default_status = Some(u8::from(labels.gen::<f64>() < p));
        }
        Dataset::new(records).expect("generated records satisfy the schema")
    }
}

/// Validates, calibrates and draws a dataset in one call.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    Ok(SyntheticGenerator::new(*config)?.generate())
}

fn uniform_column(range: (f64, f64), n: usize, mut rng: StreamRng) -> Vec<f64> {
    let (lo, hi) = range;
    if lo == hi {
        return vec![lo; n];
    }
    let dist = Uniform::new(lo, hi);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Unlabeled feature draws; each column comes from its own substream.
fn draw_features(ranges: &FeatureRanges, n: usize, seed: u64) -> Vec<SmeRecord> {
    let col = |range, id| uniform_column(range, n, rng::substream(seed, id));
    let rg = col(ranges.revenue_growth, stream::REVENUE_GROWTH);
    let cfv = col(ranges.cash_flow_variability, stream::CASH_FLOW_VARIABILITY);
    let de = col(ranges.debt_equity_ratio, stream::DEBT_EQUITY);
    let pm = col(ranges.profit_margin, stream::PROFIT_MARGIN);
    let cpd = col(ranges.commodity_price_dependency, stream::COMMODITY);
    let mut sector_rng = rng::substream(seed, stream::SECTOR);
    (0..n)
        .map(|i| SmeRecord {
            revenue_growth: rg[i],
            cash_flow_variability: cfv[i],
            debt_equity_ratio: de[i],
            profit_margin: pm[i],
            commodity_price_dependency: cpd[i],
            industry_sector: u8::from(sector_rng.gen_bool(0.5)),
            default_status: None,
        })
        .collect()
}

/// Bisection on the intercept so the mean latent probability over a fixed
/// probe sample equals the base rate.
fn calibrate_intercept(config: &GeneratorConfig) -> f64 {
    let target = config.base_default_rate;
    let logit = (target / (1.0 - target)).ln();
    if config.signal_strength == 0.0 {
        return logit;
    }
    let s = config.signal_strength;
    let scores: Vec<f64> = draw_features(&config.ranges, CALIBRATION_DRAWS, CALIBRATION_SEED)
        .iter()
        .map(|r| s * config.coefficients.score(r))
        .collect();
    let mean_p = |b: f64| scores.iter().map(|&g| sigmoid(b + g)).sum::<f64>() / scores.len() as f64;

    let spread = scores.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let (mut lo, mut hi) = (logit - spread - 1.0, logit + spread + 1.0);
    while mean_p(lo) > target {
        lo -= spread + 1.0;
    }
    while mean_p(hi) < target {
        hi += spread + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_p(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
