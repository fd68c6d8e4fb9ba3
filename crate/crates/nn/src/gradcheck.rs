//! Central finite-difference gradient checker.
//!
//! A sampled coordinate is compared at two step sizes first; when the two
//! numeric estimates disagree the loss is not smooth there (a ReLU hinge or
//! an argmax switch within one step) and the coordinate is skipped and
//! counted rather than scored.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::NnError;
use crate::graph::{Graph, Var};
use crate::param::{Gradients, ParamId, ParamStore};

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub tolerance: f64,
    /// Coordinates sampled per parameter tensor (all of them if smaller).
    pub samples_per_param: usize,
    /// Denominator floor of the relative error.
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig { epsilon: 1e-5, tolerance: 1e-4, samples_per_param: 8, abs_floor: 1e-4, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateCheck {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped_nonsmooth: usize,
    pub worst: Option<CoordinateCheck>,
    /// Coordinates whose relative error reached the tolerance.
    pub failures: Vec<CoordinateCheck>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.max_rel_error < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

fn evaluate<F, E>(store: &ParamStore, loss_fn: &mut F) -> Result<f64, E>
where
    F: FnMut(&mut Graph<'_>) -> Result<Var, E>,
    E: From<NnError>,
{
    let mut g = Graph::new(store);
    let loss = loss_fn(&mut g)?;
    Ok(g.scalar(loss))
}

/// Checks d(loss)/d(param) for `params` (every parameter when empty).
/// `store` is restored to its original values on return.
pub fn gradient_check<F, E>(
    store: &mut ParamStore,
    params: &[ParamId],
    config: &GradCheckConfig,
    mut loss_fn: F,
) -> Result<GradCheckReport, E>
where
    F: FnMut(&mut Graph<'_>) -> Result<Var, E>,
    E: From<NnError>,
{
    let mut grads = Gradients::for_store(store);
    {
        let mut g = Graph::new(store);
        let loss = loss_fn(&mut g)?;
        g.backward(loss, &mut grads)?;
    }
    let ids: Vec<ParamId> = if params.is_empty() { store.ids().collect() } else { params.to_vec() };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = GradCheckReport { tolerance: config.tolerance, ..GradCheckReport::default() };
    let eps = config.epsilon;

    for id in ids {
        let n = store.value(id).len();
        let coords: Vec<usize> = if n <= config.samples_per_param {
            (0..n).collect()
        } else {
            sample(&mut rng, n, config.samples_per_param).into_vec()
        };
        for k in coords {
            let original = store.value(id).data()[k];
            let at = |store: &mut ParamStore, delta: f64, f: &mut F| -> Result<f64, E> {
                store.value_mut(id).data_mut()[k] = original + delta;
                let v = evaluate(store, f);
                store.value_mut(id).data_mut()[k] = original;
                v
            };
            let plus = at(store, eps, &mut loss_fn)?;
            let minus = at(store, -eps, &mut loss_fn)?;
            let plus_half = at(store, eps / 2.0, &mut loss_fn)?;
            let minus_half = at(store, -eps / 2.0, &mut loss_fn)?;
            let numeric = (plus - minus) / (2.0 * eps);
            let numeric_half = (plus_half - minus_half) / eps;
            if relative_error(numeric, numeric_half, config.abs_floor) > config.tolerance / 2.0 {
                report.skipped_nonsmooth += 1;
                continue;
            }
            let analytic = grads.get(id).map_or(0.0, |t| t.data()[k]);
            let rel_error = relative_error(analytic, numeric, config.abs_floor);
            let check = CoordinateCheck { param: store.get(id).name.clone(), index: k, analytic, numeric, rel_error };
            report.checked += 1;
            if rel_error >= config.tolerance {
                report.failures.push(check.clone());
            }
            if report.worst.as_ref().is_none_or(|w| rel_error > w.rel_error) {
                report.max_rel_error = rel_error;
                report.worst = Some(check);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{BiRnn, Conv2d, Dense, LstmCell};
    use crate::tensor::Tensor;
    use rand::Rng;

    fn cfg(seed: u64) -> GradCheckConfig {
        GradCheckConfig { seed, samples_per_param: 12, ..GradCheckConfig::default() }
    }

    /// Weighted sum of outputs, so every output coordinate matters.
    fn probe(g: &mut Graph, y: Var, seed: u64) -> Result<Var, NnError> {
        let n = g.value(y).len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
        let w = g.constant((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        g.dot(y, w)
    }

    fn assert_pass(report: &GradCheckReport) {
        assert!(report.passed(), "{report:#?}");
        assert!(report.skipped_nonsmooth * 4 <= report.checked, "{report:#?}");
    }

    #[test]
    fn quadratic_matches_closed_form() {
        let mut store = ParamStore::new();
        let id = store.add("theta", Tensor::scalar(3.0)).unwrap();
        let report = gradient_check::<_, NnError>(&mut store, &[id], &cfg(0), |g| {
            let t = g.param(id);
            let sq = g.square(t);
            Ok(g.affine(sq, 0.5, 0.0))
        })
        .unwrap();
        let worst = report.worst.clone().unwrap();
        assert!((worst.analytic - 3.0).abs() < 1e-12);
        assert!((worst.numeric - 3.0).abs() < 1e-8);
        assert!(report.passed());
        assert_eq!(store.value(id).item(), 3.0);
    }

    #[test]
    fn constant_loss_has_zero_gradients() {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        store.add_glorot("w", &[3, 3], &mut rng).unwrap();
        let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(0), |g| Ok(g.constant(vec![2.5]))).unwrap();
        assert!(report.passed());
        assert!(report.worst.unwrap().numeric.abs() < 1e-12);
    }

    #[test]
    fn conv2d_gradients() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let conv = Conv2d::new(&mut store, "c", 2, 3, &mut rng).unwrap();
            let input: Vec<f64> = (0..128).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x_id = store.add("x", Tensor::new(vec![2, 8, 8], input).unwrap()).unwrap();
            let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(seed), |g| {
                let x = g.param(x_id);
                let y = conv.forward(g, x)?;
                let y = g.tanh(y);
                probe(g, y, seed)
            })
            .unwrap();
            assert_pass(&report);
        }
    }

    #[test]
    fn dense_gradients() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let d = Dense::new(&mut store, "d", 7, 5, true, &mut rng).unwrap();
            let input: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x_id = store.add("x", Tensor::vector(input)).unwrap();
            let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(seed), |g| {
                let x = g.param(x_id);
                let y = d.forward(g, x)?;
                let rows = d.forward_rows(g, x, &[4, 1])?;
                let a = probe(g, y, seed)?;
                let b = g.softmax_xent(rows, 1)?;
                g.add(a, b)
            })
            .unwrap();
            assert_pass(&report);
        }
    }

    #[test]
    fn lstm_gradients_through_three_steps() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let cell = LstmCell::new(&mut store, "l", 4, 5, &mut rng).unwrap();
            let xs: Vec<ParamId> = (0..3)
                .map(|t| {
                    let v = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    store.add(&format!("x{t}"), Tensor::vector(v)).unwrap()
                })
                .collect();
            let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(seed), |g| {
                let mut s = cell.zero_state(g);
                for &x in &xs {
                    let x = g.param(x);
                    s = cell.step(g, x, s)?;
                }
                let both = g.concat(&[s.h, s.c])?;
                probe(g, both, seed)
            })
            .unwrap();
            assert_pass(&report);
        }
    }

    #[test]
    fn birnn_gradients_on_six_steps() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let rnn = BiRnn::new(&mut store, "r", 3, 4, &mut rng).unwrap();
            let xs: Vec<ParamId> = (0..6)
                .map(|t| {
                    let v = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    store.add(&format!("x{t}"), Tensor::vector(v)).unwrap()
                })
                .collect();
            let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(seed), |g| {
                let inputs: Vec<Var> = xs.iter().map(|&x| g.param(x)).collect();
                let ys = rnn.forward(g, &inputs)?;
                let all = g.concat(&ys)?;
                probe(g, all, seed)
            })
            .unwrap();
            assert_pass(&report);
        }
    }

    #[test]
    fn elementwise_and_attention_ops() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let mut vec_param = |name: &str, n: usize, store: &mut ParamStore| {
                let v = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                store.add(name, Tensor::vector(v)).unwrap()
            };
            let a = vec_param("a", 4, &mut store);
            let b = vec_param("b", 4, &mut store);
            let c = vec_param("c", 4, &mut store);
            let s = vec_param("s", 1, &mut store);
            let report = gradient_check::<_, NnError>(&mut store, &[], &cfg(seed), |g| {
                let (a, b, c, s) = (g.param(a), g.param(b), g.param(c), g.param(s));
                let scores = g.concat(&[a, b])?;
                let scores = g.gather(scores, vec![0, 5, 2])?;
                let w = g.softmax(scores);
                let z = g.weighted_sum(&[a, b, c], w)?;
                let z = g.scale_by(z, s)?;
                let d = g.sub(z, c)?;
                let m = g.mul(d, a)?;
                let sq = g.square(m);
                let sg = g.sigmoid(sq);
                let tail = g.slice(sg, 1, 3)?;
                let r = g.reshape(tail, vec![3])?;
                let p = g.pick(r, 2)?;
                let dd = g.dot(a, c)?;
                let total = g.sum(&[p, dd])?;
                g.mean(&[total, p])
            })
            .unwrap();
            assert_pass(&report);
        }
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // Loss evaluated with one formula, backward built from another.
        let mut store = ParamStore::new();
        let id = store.add("t", Tensor::scalar(2.0)).unwrap();
        let mut calls = 0;
        let report = gradient_check::<_, NnError>(&mut store, &[id], &cfg(0), |g| {
            calls += 1;
            let t = g.param(id);
            if calls == 1 {
                Ok(g.affine(t, 3.0, 0.0))
            } else {
                Ok(g.affine(t, 2.0, 0.0))
            }
        })
        .unwrap();
        assert!(!report.passed());
        assert_eq!(report.failures.len(), 1);
    }
}
