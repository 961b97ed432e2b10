//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use rand::Rng;
use sme_credit::cart::TreeNode;
use sme_credit::dataset::{FeatureMatrix, SmeRecord};

/// Tree shape used to compare the grower against the brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Shape>,
        right: Box<Shape>,
    },
    Leaf(u64, u64),
}

pub fn shape_of(t: &TreeNode) -> Shape {
    match t {
        TreeNode::Leaf(c) => Shape::Leaf(c.count_0, c.count_1),
        TreeNode::Internal {
            feature,
            threshold,
            left,
            right,
        } => Shape::Split {
            feature: *feature,
            threshold: *threshold,
            left: Box::new(shape_of(left)),
            right: Box::new(shape_of(right)),
        },
    }
}

pub fn shape_predict(s: &Shape, x: &[f64]) -> f64 {
    match s {
        Shape::Leaf(c0, c1) => *c1 as f64 / (*c0 + *c1) as f64,
        Shape::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if x[*feature] <= *threshold {
                shape_predict(left, x)
            } else {
                shape_predict(right, x)
            }
        }
    }
}

/// Exact fraction `num / den` with `den > 0`.
#[derive(Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn lt(self, o: Frac) -> bool {
        self.num * o.den < o.num * self.den
    }
}

/// `n * gini` of a node with counts `(a, b)`, i.e. `(n^2 - a^2 - b^2) / n`.
fn scaled_gini(a: i128, b: i128) -> Frac {
    let n = a + b;
    Frac {
        num: n * n - a * a - b * b,
        den: n,
    }
}

fn add(x: Frac, y: Frac) -> Frac {
    Frac {
        num: x.num * y.den + y.num * x.den,
        den: x.den * y.den,
    }
}

/// Exhaustive greedy grower: unlimited depth, min split 2, all features.
/// Enumerates every (feature, midpoint) pair by filtering the rows.
pub fn oracle_grow(rows: &[(Vec<f64>, u8)], n_features: usize) -> Shape {
    let c1 = rows.iter().filter(|r| r.1 == 1).count() as i128;
    let c0 = rows.len() as i128 - c1;
    if c0 == 0 || c1 == 0 || rows.len() < 2 {
        return Shape::Leaf(c0 as u64, c1 as u64);
    }
    let parent = scaled_gini(c0, c1);
    let mut best: Option<(Frac, usize, f64)> = None;
    for f in 0..n_features {
        let mut vals: Vec<f64> = rows.iter().map(|r| r.0[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let t = if t < w[1] { t } else { w[0] };
            let (mut l0, mut l1, mut r0, mut r1) = (0i128, 0i128, 0i128, 0i128);
            for (x, y) in rows {
                match (x[f] <= t, *y) {
                    (true, 0) => l0 += 1,
                    (true, _) => l1 += 1,
                    (false, 0) => r0 += 1,
                    (false, _) => r1 += 1,
                }
            }
            let child = add(scaled_gini(l0, l1), scaled_gini(r0, r1));
            if !child.lt(parent) {
                continue;
            }
            if best.as_ref().map_or(true, |(b, _, _)| child.lt(*b)) {
                best = Some((child, f, t));
            }
        }
    }
    match best {
        None => Shape::Leaf(c0 as u64, c1 as u64),
        Some((_, f, t)) => {
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|(x, _)| x[f] <= t);
            Shape::Split {
                feature: f,
                threshold: t,
                left: Box::new(oracle_grow(&l, n_features)),
                right: Box::new(oracle_grow(&r, n_features)),
            }
        }
    }
}

/// Random instance for the tree oracle: `n` rows, `k` features, values on a
/// coarse grid (many ties) or continuous.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, k: usize, grid: bool) -> (Vec<Vec<f64>>, Vec<u8>) {
    let rows = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if grid {
                        f64::from(rng.gen_range(0..6))
                    } else {
                        rng.gen_range(-10.0..10.0)
                    }
                })
                .collect()
        })
        .collect();
    let p1 = rng.gen_range(0.2..0.8);
    let labels = (0..n).map(|_| u8::from(rng.gen_bool(p1))).collect();
    (rows, labels)
}

pub fn matrix(rows: &[Vec<f64>], labels: &[u8]) -> FeatureMatrix {
    FeatureMatrix::from_rows(rows, Some(labels.to_vec())).unwrap()
}

/// Mean cross-entropy plus `(lambda/2)|w|^2`, written out directly.
pub fn reference_loss(params: &[f64], rows: &[Vec<f64>], labels: &[u8], lambda: f64) -> f64 {
    let d = params.len() - 1;
    let mut total = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let z: f64 = params[d] + (0..d).map(|j| params[j] * x[j]).sum::<f64>();
        let p = 1.0 / (1.0 + (-z).exp());
        total += if y == 1 { -p.ln() } else { -(1.0 - p).ln() };
    }
    total / rows.len() as f64 + 0.5 * lambda * params[..d].iter().map(|w| w * w).sum::<f64>()
}

/// Uniform random record inside the default generator ranges.
pub fn random_record<R: Rng>(rng: &mut R) -> SmeRecord {
    SmeRecord {
        revenue_growth: rng.gen_range(-0.3..0.3),
        cash_flow_variability: rng.gen_range(0.0..0.6),
        debt_equity_ratio: rng.gen_range(0.0..3.5),
        profit_margin: rng.gen_range(0.0..0.3),
        commodity_price_dependency: rng.gen_range(-1.0..1.0),
        industry_sector: rng.gen_range(0..2),
        default_status: None,
    }
}
