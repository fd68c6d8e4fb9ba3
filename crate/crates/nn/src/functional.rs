//! Pure numeric helpers shared by the tape and by inference code.

use crate::error::NnError;

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

/// `log(softmax(logits))`, computed with the log-sum-exp shift.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&x| x - lse).collect()
}

/// Softmax probabilities and the cross-entropy loss `-log p[target]`.
pub fn softmax_xent(logits: &[f64], target: usize) -> Result<(Vec<f64>, f64), NnError> {
    if logits.is_empty() || target >= logits.len() {
        return Err(NnError::TargetOutOfRange { index: target, classes: logits.len() });
    }
    let logp = log_softmax(logits);
    Ok((softmax(logits), -logp[target]))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((i, x));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let p = softmax(&[0.0, 3f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn xent_of_half_is_ln2() {
        let (_, loss) = softmax_xent(&[1.0, 1.0], 0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(matches!(softmax_xent(&[1.0, 1.0], 2), Err(NnError::TargetOutOfRange { .. })));
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let (p, loss) = softmax_xent(&[1000.0, -1000.0, 0.0], 1).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!(loss.is_finite() && loss > 1999.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }
}
