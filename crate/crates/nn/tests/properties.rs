use proptest::prelude::*;
use scc_nn::functional::{softmax, softmax_xent};
use scc_nn::{Optimizer, OptimizerConfig, ParamStore, Tensor};

proptest! {
    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0f64..50.0, 1..20)) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn softmax_ignores_a_common_shift(logits in prop::collection::vec(-30.0f64..30.0, 1..20), shift in -100.0f64..100.0) {
        let a = softmax(&logits);
        let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
        let b = softmax(&shifted);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn xent_is_finite_and_matches_log_prob(logits in prop::collection::vec(-500.0f64..500.0, 1..12), pick in 0usize..12) {
        let target = pick % logits.len();
        let (p, loss) = softmax_xent(&logits, target).unwrap();
        prop_assert!(loss.is_finite() && loss >= 0.0);
        if p[target] > 1e-300 {
            prop_assert!((loss + p[target].ln()).abs() < 1e-6 * loss.max(1.0));
        }
    }

    #[test]
    fn zero_gradient_step_is_identity(values in prop::collection::vec(-10.0f64..10.0, 1..16), adam in any::<bool>()) {
        let mut store = ParamStore::new();
        let id = store.add("w", Tensor::vector(values.clone())).unwrap();
        let config = if adam { OptimizerConfig::adam(0.01) } else { OptimizerConfig::sgd(0.1, 0.9) };
        let mut opt = Optimizer::new(config).unwrap();
        opt.step(&mut store).unwrap();
        prop_assert_eq!(store.value(id).data(), &values[..]);
    }
}

#[test]
fn sgd_examples() {
    let mut store = ParamStore::new();
    let id = store.add("w", Tensor::scalar(1.0)).unwrap();
    store.get_mut(id).grad = Tensor::scalar(1.0);
    let mut opt = Optimizer::new(OptimizerConfig { clip_norm: None, ..OptimizerConfig::sgd(0.1, 0.0) }).unwrap();
    opt.step(&mut store).unwrap();
    assert!((store.value(id).item() - 0.9).abs() < 1e-15);

    let mut store = ParamStore::new();
    let id = store.add("w", Tensor::scalar(0.0)).unwrap();
    store.get_mut(id).grad = Tensor::scalar(10.0);
    let mut opt = Optimizer::new(OptimizerConfig { clip_norm: Some(1.0), ..OptimizerConfig::sgd(1.0, 0.0) }).unwrap();
    opt.step(&mut store).unwrap();
    assert!((store.value(id).item() + 1.0).abs() < 1e-15);
}
