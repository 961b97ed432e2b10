mod common;

use common::{matrix, oracle_grow, random_instance, shape_of, shape_predict};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sme_credit::cart::{self, TreeNode, TreeParams};

fn grow_all(rows: &[Vec<f64>], labels: &[u8], seed: u64) -> TreeNode {
    let x = matrix(rows, labels);
    let idx: Vec<usize> = (0..rows.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cart::grow_tree(&x, &idx, &TreeParams::all_features(rows[0].len()), &mut rng).unwrap()
}

fn splits_reduce_impurity(t: &TreeNode) -> bool {
    match t {
        TreeNode::Leaf(_) => true,
        TreeNode::Internal { left, right, .. } => {
            let (l, r) = (left.counts(), right.counts());
            let parent = cart::gini_impurity(t.counts()).unwrap();
            let n = t.counts().total() as f64;
            let child = (l.total() as f64 * cart::gini_impurity(l).unwrap()
                + r.total() as f64 * cart::gini_impurity(r).unwrap())
                / n;
            child < parent && splits_reduce_impurity(left) && splits_reduce_impurity(right)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn grower_matches_brute_force(seed in any::<u64>(), n in 1usize..=50, grid in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_instance(&mut rng, n, 4, grid);
        let tree = grow_all(&rows, &labels, seed);
        let pairs: Vec<(Vec<f64>, u8)> = rows.iter().cloned().zip(labels.iter().copied()).collect();
        let oracle = oracle_grow(&pairs, 4);
        prop_assert_eq!(shape_of(&tree), oracle.clone());
        for r in &rows {
            prop_assert_eq!(cart::predict_tree_features(&tree, r).1, shape_predict(&oracle, r));
        }
        prop_assert!(splits_reduce_impurity(&tree));
    }

    #[test]
    fn consistent_data_is_fit_exactly(seed in any::<u64>(), n in 2usize..=60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, _) = random_instance(&mut rng, n, 3, false);
        // labels as a deterministic function of the features: no conflicts
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] * r[1] > r[2])).collect();
        let tree = grow_all(&rows, &labels, seed);
        for (r, &y) in rows.iter().zip(&labels) {
            prop_assert_eq!(cart::predict_tree_features(&tree, r).0, y);
        }
    }

    #[test]
    fn monotone_feature_transform_keeps_predictions(seed in any::<u64>(), n in 2usize..=40, grid in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_instance(&mut rng, n, 3, grid);
        let warped: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![(r[0] / 4.0).exp(), r[1], r[2].powi(3) + r[2]])
            .collect();
        let params = TreeParams { features_per_split: 2, ..TreeParams::all_features(3) };
        let idx: Vec<usize> = (0..n).collect();
        let a = cart::grow_tree(&matrix(&rows, &labels), &idx, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = cart::grow_tree(&matrix(&warped, &labels), &idx, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for (r, w) in rows.iter().zip(&warped) {
            prop_assert_eq!(cart::predict_tree_features(&a, r), cart::predict_tree_features(&b, w));
        }
    }

    #[test]
    fn growth_is_deterministic(seed in any::<u64>(), n in 1usize..=40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_instance(&mut rng, n, 4, true);
        let params = TreeParams { features_per_split: 2, ..TreeParams::all_features(4) };
        let idx: Vec<usize> = (0..n).collect();
        let x = matrix(&rows, &labels);
        let a = cart::grow_tree(&x, &idx, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = cart::grow_tree(&x, &idx, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}
