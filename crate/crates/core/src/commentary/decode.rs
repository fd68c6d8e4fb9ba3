use scc_nn::{functional, Graph, LstmState, Var};
use serde::{Deserialize, Serialize};

use super::context::ContextPlan;
use super::model::CommentaryModel;
use crate::data::vocab::{BOS, EOS, PAD};
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// 1 is greedy decoding.
    pub beam_width: usize,
    pub max_tokens: usize,
    /// Exponent of the `((5 + len) / 6)` length normaliser used to rank
    /// finished beams.
    pub length_penalty: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig { beam_width: 4, max_tokens: 50, length_penalty: 0.6 }
    }
}

impl GenerationConfig {
    pub fn greedy() -> GenerationConfig {
        GenerationConfig { beam_width: 1, ..GenerationConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.max_tokens == 0 {
            return Err(CoreError::Config("beam width and token limit must be at least 1".into()));
        }
        if !self.length_penalty.is_finite() || self.length_penalty < 0.0 {
            return Err(CoreError::Config("length penalty must be finite and non-negative".into()));
        }
        Ok(())
    }
}

pub fn length_normalizer(len: usize, alpha: f64) -> f64 {
    ((5.0 + len as f64) / 6.0).powf(alpha)
}

/// Log-probabilities of the next token, with padding and the start marker
/// excluded.
fn next_log_probs(g: &Graph, logits: Var) -> Vec<f64> {
    let mut lp = functional::log_softmax(g.value(logits).data());
    lp[PAD] = f64::NEG_INFINITY;
    lp[BOS] = f64::NEG_INFINITY;
    lp
}

struct Hypothesis {
    tokens: Vec<usize>,
    log_prob: f64,
    state: LstmState,
    input: Var,
}

/// Greedy decoding: the most probable token at every step, the lowest id
/// among equals.
pub fn greedy_decode(model: &CommentaryModel, plan: &ContextPlan, max_tokens: usize) -> Result<Vec<usize>> {
    let mut g = Graph::new(model.store());
    let ctx = model.encode_context(&mut g, plan)?;
    let mut state = model.zero_state(&mut g, plan.category)?;
    let mut input = model.first_input(&mut g, plan.category, &ctx)?;
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    while tokens.len() < max_tokens {
        let (logits, next) = model.step(&mut g, plan.category, &ctx, input, state)?;
        state = next;
        let scores: Vec<f64> = next_log_probs(&g, logits).iter().map(|lp| log_prob + lp).collect();
        let token = functional::argmax(&scores).expect("nonempty vocabulary");
        if token == EOS {
            break;
        }
        log_prob = scores[token];
        tokens.push(token);
        input = model.token_input(&mut g, plan.category, token)?;
    }
    Ok(tokens)
}

/// Beam search. Each step keeps the `beam_width` best extensions of the live
/// beams (ties to the lower token id); extensions ending in the end marker
/// retire. The result is the retired or length-capped beam with the best
/// length-normalised log-probability. Width 1 reproduces greedy decoding.
pub fn beam_decode(model: &CommentaryModel, plan: &ContextPlan, config: &GenerationConfig) -> Result<Vec<usize>> {
    config.validate()?;
    let mut g = Graph::new(model.store());
    let ctx = model.encode_context(&mut g, plan)?;
    let state = model.zero_state(&mut g, plan.category)?;
    let input = model.first_input(&mut g, plan.category, &ctx)?;
    let mut live = vec![Hypothesis { tokens: Vec::new(), log_prob: 0.0, state, input }];
    let mut finished: Vec<(Vec<usize>, f64, usize)> = Vec::new();

    while !live.is_empty() {
        let mut expanded = Vec::with_capacity(live.len());
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (k, hyp) in live.iter().enumerate() {
            let (logits, next) = model.step(&mut g, plan.category, &ctx, hyp.input, hyp.state)?;
            expanded.push(next);
            for (token, lp) in next_log_probs(&g, logits).into_iter().enumerate() {
                if lp.is_finite() {
                    candidates.push((hyp.log_prob + lp, token, k));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        candidates.truncate(config.beam_width);
        let mut next_live = Vec::with_capacity(candidates.len());
        for (score, token, k) in candidates {
            if token == EOS {
                finished.push((live[k].tokens.clone(), score, live[k].tokens.len() + 1));
                continue;
            }
            let mut tokens = live[k].tokens.clone();
            tokens.push(token);
            if tokens.len() == config.max_tokens {
                let len = tokens.len();
                finished.push((tokens, score, len));
                continue;
            }
            let input = model.token_input(&mut g, plan.category, token)?;
            next_live.push(Hypothesis { tokens, log_prob: score, state: expanded[k], input });
        }
        live = next_live;
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for (tokens, log_prob, len) in finished {
        let normalized = log_prob / length_normalizer(len, config.length_penalty);
        if best.as_ref().is_none_or(|(b, _)| normalized > *b) {
            best = Some((normalized, tokens));
        }
    }
    Ok(best.map(|(_, t)| t).unwrap_or_default())
}

/// Decodes with `config`; width 1 takes the greedy path.
pub fn decode(model: &CommentaryModel, plan: &ContextPlan, config: &GenerationConfig) -> Result<Vec<usize>> {
    config.validate()?;
    if config.beam_width == 1 {
        greedy_decode(model, plan, config.max_tokens)
    } else {
        beam_decode(model, plan, config)
    }
}
