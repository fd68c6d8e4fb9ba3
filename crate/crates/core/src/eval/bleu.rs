use std::collections::HashMap;

use super::EvalPair;
use crate::error::{CoreError, Result};

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and hypothesis n-gram total, summed over the corpus.
pub fn modified_precision_counts(pairs: &[EvalPair], n: usize) -> (usize, usize) {
    let mut matched = 0;
    let mut total = 0;
    for p in pairs {
        let hyp = ngram_counts(&p.hypothesis, n);
        let reference = ngram_counts(&p.reference, n);
        total += p.hypothesis.len().saturating_sub(n - 1);
        matched += hyp.iter().map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0))).sum::<usize>();
    }
    (matched, total)
}

/// Corpus BLEU with uniform weights over orders `1..=max_n`, no smoothing and
/// brevity penalty `exp(1 - r/c)` when the hypotheses are shorter.
pub fn bleu_corpus(pairs: &[EvalPair], max_n: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(CoreError::Empty("evaluation pairs"));
    }
    if max_n == 0 {
        return Err(CoreError::Config("BLEU order must be positive".into()));
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (matched, total) = modified_precision_counts(pairs, n);
        if matched == 0 || total == 0 {
            return Ok(0.0);
        }
        log_sum += (matched as f64 / total as f64).ln();
    }
    let c: usize = pairs.iter().map(|p| p.hypothesis.len()).sum();
    let r: usize = pairs.iter().map(|p| p.reference.len()).sum();
    let brevity = if c < r { 1.0 - r as f64 / c as f64 } else { 0.0 };
    Ok((brevity + log_sum / max_n as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exactly_one() {
        let pairs = vec![
            EvalPair::new("the cat sat on the mat", "the cat sat on the mat"),
            EvalPair::new("a b c d", "a b c d"),
        ];
        assert_eq!(bleu_corpus(&pairs, 4).unwrap(), 1.0);
        assert_eq!(bleu_corpus(&pairs, 2).unwrap(), 1.0);
    }

    #[test]
    fn short_hypothesis_fixture() {
        let pairs = vec![EvalPair::new("the cat sat", "the cat sat on the mat")];
        // unigrams 3/3, bigrams 2/2, brevity exp(1 - 6/3)
        let expected = (-1f64).exp();
        assert!((bleu_corpus(&pairs, 2).unwrap() - expected).abs() < 1e-12);
        assert!((bleu_corpus(&pairs, 2).unwrap() - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn no_shared_bigram_gives_zero() {
        let pairs = vec![EvalPair::new("cat the", "the cat")];
        assert_eq!(bleu_corpus(&pairs, 2).unwrap(), 0.0);
        assert!(bleu_corpus(&[], 2).is_err());
    }

    #[test]
    fn counts_are_clipped() {
        let pairs = vec![EvalPair::new("the the the", "the cat")];
        assert_eq!(modified_precision_counts(&pairs, 1), (1, 3));
    }
}
