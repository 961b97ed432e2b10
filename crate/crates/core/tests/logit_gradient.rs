mod common;

use common::{matrix, reference_loss};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sme_credit::logit::{self, LogitHyperparams};
use sme_credit::synthgen::{self, GeneratorConfig};

fn random_batch(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let rows = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let labels = (0..n).map(|_| rng.gen_range(0..2)).collect();
    (rows, labels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_batch(&mut rng, 20, 6);
        let lambda = rng.gen_range(0.0..0.1);
        let params: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let batch = matrix(&rows, &labels);
        let (loss, grad) = logit::loss_and_gradient(&params, &batch, lambda);
        prop_assert!((loss - reference_loss(&params, &rows, &labels, lambda)).abs() < 1e-12);
        let h = 1e-5;
        for j in 0..params.len() {
            let mut up = params.clone();
            up[j] += h;
            let mut dn = params.clone();
            dn[j] -= h;
            let fd = (logit::loss_and_gradient(&up, &batch, lambda).0
                - logit::loss_and_gradient(&dn, &batch, lambda).0) / (2.0 * h);
            let scale = grad[j].abs().max(fd.abs()).max(1e-8);
            prop_assert!((grad[j] - fd).abs() <= 1e-6 * scale, "coord {}: {} vs {}", j, grad[j], fd);
        }
    }

    #[test]
    fn accepted_steps_never_raise_loss(seed in any::<u64>(), lr in 0.05f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_batch(&mut rng, 30, 3);
        let hyper = LogitHyperparams { learning_rate: lr, max_iterations: 300, ..Default::default() };
        let mut prev = f64::INFINITY;
        let mut ok = true;
        logit::gradient_descent(&matrix(&rows, &labels), &hyper, |_, l| {
            ok &= l <= prev;
            prev = l;
        }).unwrap();
        prop_assert!(ok);
    }
}

#[test]
fn training_is_deterministic() {
    let d = synthgen::generate(&GeneratorConfig { n_samples: 300, ..Default::default() }).unwrap();
    let a = logit::train_logistic(&d, &LogitHyperparams::default()).unwrap();
    let b = logit::train_logistic(&d, &LogitHyperparams::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn final_loss_recorded() {
    let d = synthgen::generate(&GeneratorConfig { n_samples: 300, ..Default::default() }).unwrap();
    let m = logit::train_logistic(&d, &LogitHyperparams::default()).unwrap();
    assert!(m.training_meta.final_loss < 2.0_f64.ln());
    assert!(m.training_meta.iterations <= 5000);
}
