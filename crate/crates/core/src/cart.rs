//! Binary classification trees grown greedily on gini impurity.
//!
//! Thresholds are midpoints between consecutive distinct feature values and
//! rows with `value <= threshold` go left. Split quality is compared in exact
//! integer arithmetic, so ties resolve deterministically: lowest feature
//! index first, then lowest threshold.

use std::cmp::Ordering;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, SmeRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub count_0: u64,
    pub count_1: u64,
}

impl ClassCounts {
    pub fn new(count_0: u64, count_1: u64) -> Self {
        ClassCounts { count_0, count_1 }
    }

    pub fn total(&self) -> u64 {
        self.count_0 + self.count_1
    }

    pub fn add(&mut self, label: u8) {
        if label == 1 {
            self.count_1 += 1;
        } else {
            self.count_0 += 1;
        }
    }

    fn sum_sq(&self) -> u128 {
        u128::from(self.count_0).pow(2) + u128::from(self.count_1).pow(2)
    }

    fn is_pure(&self) -> bool {
        self.count_0 == 0 || self.count_1 == 0
    }

    /// Fraction of class 1.
    pub fn prob_1(&self) -> f64 {
        self.count_1 as f64 / self.total() as f64
    }
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;

    fn add(self, rhs: Self) -> Self {
        ClassCounts::new(self.count_0 + rhs.count_0, self.count_1 + rhs.count_1)
    }
}

/// `1 - p0^2 - p1^2`.
pub fn gini_impurity(counts: ClassCounts) -> Result<f64> {
    let n = counts.total();
    if n == 0 {
        return Err(Error::param("gini impurity of an empty node"));
    }
    Ok(gini_unchecked(counts))
}

fn gini_unchecked(c: ClassCounts) -> f64 {
    let n = c.total() as f64;
    let (p0, p1) = (c.count_0 as f64 / n, c.count_1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf(ClassCounts),
}

impl TreeNode {
    /// Leaf reached by `x`.
    pub fn leaf_for(&self, x: &[f64]) -> ClassCounts {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(c) => return *c,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Training class counts under this node.
    pub fn counts(&self) -> ClassCounts {
        match self {
            TreeNode::Leaf(c) => *c,
            TreeNode::Internal { left, right, .. } => left.counts() + right.counts(),
        }
    }

    /// Per-feature sum of `(n_node / n_root) * (gini(node) - weighted child gini)`
    /// over every split.
    pub fn impurity_decrease(&self, n_features: usize) -> Vec<f64> {
        fn walk(node: &TreeNode, n_root: f64, acc: &mut [f64]) -> ClassCounts {
            match node {
                TreeNode::Leaf(c) => *c,
                TreeNode::Internal {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    let l = walk(left, n_root, acc);
                    let r = walk(right, n_root, acc);
                    let here = l + r;
                    let n = here.total() as f64;
                    let child = (l.total() as f64 * gini_unchecked(l)
                        + r.total() as f64 * gini_unchecked(r))
                        / n;
                    acc[*feature] += (n / n_root) * (gini_unchecked(here) - child);
                    here
                }
            }
        }
        let mut acc = vec![0.0; n_features];
        let n_root = self.counts().total() as f64;
        walk(self, n_root, &mut acc);
        acc
    }

    /// Structural checks for deserialized trees.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        match self {
            TreeNode::Leaf(c) if c.total() == 0 => Err(Error::param("tree leaf with no samples")),
            TreeNode::Leaf(_) => Ok(()),
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                if *feature >= n_features {
                    return Err(Error::param(format!("tree splits on unknown feature {feature}")));
                }
                if !threshold.is_finite() {
                    return Err(Error::param("tree threshold is not finite"));
                }
                left.validate(n_features)?;
                right.validate(n_features)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features drawn (without replacement) at each node.
    pub features_per_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            // floor(sqrt(6))
            features_per_split: 2,
        }
    }
}

impl TreeParams {
    /// Every feature is a candidate at every node.
    pub fn all_features(n_features: usize) -> Self {
        TreeParams {
            features_per_split: n_features,
            ..Default::default()
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::param("max_depth must be positive"));
        }
        if self.min_samples_split < 1 {
            return Err(Error::param("min_samples_split must be positive"));
        }
        if self.features_per_split < 1 || self.features_per_split > n_features {
            return Err(Error::param(format!(
                "features_per_split must lie in 1..={n_features}, got {}",
                self.features_per_split
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_child_impurity: f64,
}

/// `sum_sq(L)/|L| + sum_sq(R)/|R|` as an exact fraction. Larger means purer
/// children.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(l: ClassCounts, r: ClassCounts) -> Self {
        let (nl, nr) = (u128::from(l.total()), u128::from(r.total()));
        Purity {
            num: l.sum_sq() * nr + r.sum_sq() * nl,
            den: nl * nr,
        }
    }

    fn of_node(c: ClassCounts) -> Self {
        Purity {
            num: c.sum_sq(),
            den: u128::from(c.total()),
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi` so
/// that `hi` routes right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = (lo + hi) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

/// Best gini split of `rows` over `candidate_features`, or `None` when no
/// split strictly lowers impurity.
pub fn best_split(x: &FeatureMatrix, rows: &[usize], candidate_features: &[usize]) -> Option<Split> {
    let labels = x.labels().expect("splitting needs labels");
    let mut parent = ClassCounts::default();
    for &i in rows {
        parent.add(labels[i]);
    }
    if rows.is_empty() || parent.is_pure() {
        return None;
    }
    let parent_purity = Purity::of_node(parent);

    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<(Purity, usize, f64, ClassCounts, ClassCounts)> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        let mut left = ClassCounts::default();
        for k in 0..order.len() - 1 {
            left.add(labels[order[k]]);
            let (lo, hi) = (x.get(order[k], f), x.get(order[k + 1], f));
            if lo == hi {
                continue;
            }
            let right = ClassCounts::new(parent.count_0 - left.count_0, parent.count_1 - left.count_1);
            let purity = Purity::of(left, right);
            if purity.cmp(&parent_purity) != Ordering::Greater {
                continue;
            }
            let better = match &best {
                None => true,
                Some((b, ..)) => purity.cmp(b) == Ordering::Greater,
            };
            if better {
                best = Some((purity, f, midpoint(lo, hi), left, right));
            }
        }
    }
    best.map(|(_, feature, threshold, l, r)| Split {
        feature,
        threshold,
        weighted_child_impurity: (l.total() as f64 * gini_unchecked(l)
            + r.total() as f64 * gini_unchecked(r))
            / parent.total() as f64,
    })
}

/// Grows a tree on `rows` (indices into `x`, repeats allowed). `sampler`
/// supplies the per-node feature subsets, drawn depth-first, left before right.
pub fn grow_tree<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    rows: &[usize],
    params: &TreeParams,
    sampler: &mut R,
) -> Result<TreeNode> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("cannot grow a tree on zero rows".into()));
    }
    if x.labels().is_none() {
        return Err(Error::param("tree growth needs labeled rows"));
    }
    params.validate(x.n_features())?;
    Ok(grow_node(x, rows.to_vec(), params, sampler, 0))
}

fn grow_node<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    rows: Vec<usize>,
    params: &TreeParams,
    sampler: &mut R,
    depth: usize,
) -> TreeNode {
    let labels = x.labels().expect("checked by grow_tree");
    let mut counts = ClassCounts::default();
    for &i in &rows {
        counts.add(labels[i]);
    }
    let stop = counts.is_pure()
        || rows.len() < params.min_samples_split
        || params.max_depth.is_some_and(|d| depth >= d);
    if stop {
        return TreeNode::Leaf(counts);
    }
    let features = index::sample(sampler, x.n_features(), params.features_per_split).into_vec();
    let Some(split) = best_split(x, &rows, &features) else {
        return TreeNode::Leaf(counts);
    };
    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| x.get(i, split.feature) <= split.threshold);
    let left = grow_node(x, left, params, sampler, depth + 1);
    let right = grow_node(x, right, params, sampler, depth + 1);
    TreeNode::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// `(label, prob_1)` for a raw feature row; label is 1 iff `prob_1 >= 0.5`.
pub fn predict_tree_features(tree: &TreeNode, x: &[f64]) -> (u8, f64) {
    let p = tree.leaf_for(x).prob_1();
    (u8::from(p >= 0.5), p)
}

pub fn predict_tree(tree: &TreeNode, record: &SmeRecord) -> (u8, f64) {
    predict_tree_features(tree, &record.features())
}
