//! Corpus metrics: BLEU-2/BLEU-4 and the simplified METEOR (`meteor_s`,
//! exact and stem matches only).

mod bleu;
mod meteor;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

pub use bleu::{bleu_corpus, modified_precision_counts};
pub use meteor::{align, candidates, count_chunks, meteor_pair, meteor_s, stem, AlignmentStats};

use crate::error::{CoreError, Result};

/// One hypothesis scored against one reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPair {
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
}

impl EvalPair {
    /// Whitespace-tokenised pair.
    pub fn new(hypothesis: &str, reference: &str) -> EvalPair {
        let split = |s: &str| s.split_whitespace().map(str::to_string).collect();
        EvalPair { hypothesis: split(hypothesis), reference: split(reference) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bleu2,
    Bleu4,
    MeteorS,
}

impl std::str::FromStr for Metric {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "bleu2" => Ok(Metric::Bleu2),
            "bleu4" => Ok(Metric::Bleu4),
            "meteor_s" => Ok(Metric::MeteorS),
            _ => Err(CoreError::Config(format!("unknown metric {s:?}"))),
        }
    }
}

impl Metric {
    pub fn score(self, pairs: &[EvalPair]) -> Result<f64> {
        match self {
            Metric::Bleu2 => bleu_corpus(pairs, 2),
            Metric::Bleu4 => bleu_corpus(pairs, 4),
            Metric::MeteorS => {
                if pairs.is_empty() {
                    return Err(CoreError::Empty("evaluation pairs"));
                }
                Ok(meteor_s(pairs))
            }
        }
    }
}

/// Scores of one group of pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub category: String,
    pub pairs: usize,
    pub bleu4: f64,
    pub bleu2: f64,
    pub meteor_s: f64,
}

impl MetricRow {
    fn compute(category: &str, pairs: &[EvalPair]) -> Result<MetricRow> {
        Ok(MetricRow {
            category: category.to_string(),
            pairs: pairs.len(),
            bleu4: bleu_corpus(pairs, 4)?,
            bleu2: bleu_corpus(pairs, 2)?,
            meteor_s: Metric::MeteorS.score(pairs)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub categories: Vec<MetricRow>,
    /// All pairs pooled into one corpus.
    pub overall: MetricRow,
}

impl MetricReport {
    /// Fixed-width table with scores as percentages.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12} {:>6} {:>8} {:>8} {:>9}\n", "category", "pairs", "BLEU-4", "BLEU-2", "meteor_s");
        for row in self.categories.iter().chain(std::iter::once(&self.overall)) {
            writeln!(
                out,
                "{:<12} {:>6} {:>8.2} {:>8.2} {:>9.2}",
                row.category,
                row.pairs,
                row.bleu4 * 100.0,
                row.bleu2 * 100.0,
                row.meteor_s * 100.0
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Per-group scores plus the pooled overall row, groups in input order.
pub fn report(groups: &[(String, Vec<EvalPair>)]) -> Result<MetricReport> {
    if groups.is_empty() {
        return Err(CoreError::Empty("report categories"));
    }
    let categories = groups.iter().map(|(c, p)| MetricRow::compute(c, p)).collect::<Result<Vec<_>>>()?;
    let all: Vec<EvalPair> = groups.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
    Ok(MetricReport { categories, overall: MetricRow::compute("overall", &all)? })
}

/// Groups pairs by a parallel list of labels, keeping first-seen order.
pub fn group_by_label(pairs: Vec<EvalPair>, labels: &[String]) -> Result<Vec<(String, Vec<EvalPair>)>> {
    if pairs.len() != labels.len() {
        return Err(CoreError::Data(format!("{} pairs but {} category labels", pairs.len(), labels.len())));
    }
    let mut groups: Vec<(String, Vec<EvalPair>)> = Vec::new();
    for (pair, label) in pairs.into_iter().zip(labels) {
        match groups.iter_mut().find(|(l, _)| l == label) {
            Some((_, v)) => v.push(pair),
            None => groups.push((label.clone(), vec![pair])),
        }
    }
    Ok(groups)
}

/// Lines of a UTF-8 file, one sentence per line.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Pairs line `i` of the hypotheses with line `i` of the references.
pub fn pair_lines(hyps: &[String], refs: &[String]) -> Result<Vec<EvalPair>> {
    if hyps.len() != refs.len() {
        return Err(CoreError::Data(format!("{} hypotheses but {} references", hyps.len(), refs.len())));
    }
    Ok(hyps.iter().zip(refs).map(|(h, r)| EvalPair::new(h, r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_category_overall_matches() {
        let r = report(&[("quality".into(), r_pairs())]).unwrap();
        assert_eq!(r.categories[0].bleu4, r.overall.bleu4);
        assert_eq!(r.categories[0].meteor_s, r.overall.meteor_s);
        assert_eq!(r.overall.pairs, 2);
        for row in [&r.categories[0], &r.overall] {
            for v in [row.bleu2, row.bleu4, row.meteor_s] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert_eq!(r.to_table(), report(&[("quality".into(), r_pairs())]).unwrap().to_table());
        assert!(r.to_json().contains("\"meteor_s\""));
    }

    fn r_pairs() -> Vec<EvalPair> {
        vec![EvalPair::new("the knight moves", "the knight moves forward"), EvalPair::new("a b c d e", "a b c d e")]
    }

    #[test]
    fn grouping_keeps_order_and_checks_lengths() {
        let pairs = vec![EvalPair::new("a", "a"), EvalPair::new("b", "b"), EvalPair::new("c", "c")];
        let labels: Vec<String> = ["x", "y", "x"].iter().map(|s| s.to_string()).collect();
        let g = group_by_label(pairs.clone(), &labels).unwrap();
        assert_eq!(g.iter().map(|(l, p)| (l.as_str(), p.len())).collect::<Vec<_>>(), [("x", 2), ("y", 1)]);
        assert!(group_by_label(pairs, &labels[..2]).is_err());
    }
}
