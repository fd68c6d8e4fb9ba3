use rand::Rng;
use scc_nn::{Graph, ParamId, ParamStore, Var};

use crate::error::{CoreError, Result};

/// Bilinear attention: `score_j = row_j . (W h)`, weights `softmax(score)`,
/// context `sum_j weight_j row_j`.
#[derive(Clone, Debug)]
pub struct Attention {
    pub weight: ParamId,
}

/// Output of one attention read.
#[derive(Clone, Debug)]
pub struct Attended {
    pub context: Var,
    /// Attention weights, one per row (flattened across choices for the
    /// multi-choice read).
    pub weights: Var,
}

impl Attention {
    /// `row_width` is the context width, `query_width` the decoder width.
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        row_width: usize,
        query_width: usize,
        rng: &mut R,
    ) -> Result<Attention> {
        Ok(Attention { weight: store.add_glorot(&format!("{name}.weight"), &[row_width, query_width], rng)? })
    }

    pub fn attach(store: &ParamStore, name: &str) -> Result<Attention> {
        Ok(Attention { weight: store.id(&format!("{name}.weight"))? })
    }

    fn projected_query(&self, g: &mut Graph, query: Var) -> Result<Var> {
        let w = g.param(self.weight);
        Ok(g.matvec(w, query)?)
    }

    fn scores(g: &mut Graph, rows: &[Var], q: Var) -> Result<Var> {
        let parts = rows.iter().map(|&r| g.dot(r, q)).collect::<Result<Vec<_>, _>>()?;
        Ok(g.concat(&parts)?)
    }

    pub fn attend(&self, g: &mut Graph, rows: &[Var], query: Var) -> Result<Attended> {
        if rows.is_empty() {
            return Err(CoreError::Empty("attention rows"));
        }
        let q = self.projected_query(g, query)?;
        let scores = Self::scores(g, rows, q)?;
        let weights = g.softmax(scores);
        let context = g.weighted_sum(rows, weights)?;
        Ok(Attended { context, weights })
    }

    /// Nested read over several choices: inner attention within each
    /// choice's rows, scaled by that choice's weight in `choice_weights`.
    pub fn attend_choices(
        &self,
        g: &mut Graph,
        choices: &[Vec<Var>],
        choice_weights: Var,
        query: Var,
    ) -> Result<Attended> {
        if choices.is_empty() || choices.iter().any(Vec::is_empty) {
            return Err(CoreError::Empty("choice rows"));
        }
        if g.value(choice_weights).len() != choices.len() {
            return Err(CoreError::Config(format!(
                "{} choice weights for {} choices",
                g.value(choice_weights).len(),
                choices.len()
            )));
        }
        let q = self.projected_query(g, query)?;
        let mut blocks = Vec::with_capacity(choices.len());
        for (i, rows) in choices.iter().enumerate() {
            let scores = Self::scores(g, rows, q)?;
            let inner = g.softmax(scores);
            let ci = g.pick(choice_weights, i)?;
            blocks.push(g.scale_by(inner, ci)?);
        }
        let weights = g.concat(&blocks)?;
        let all_rows: Vec<Var> = choices.iter().flatten().copied().collect();
        let context = g.weighted_sum(&all_rows, weights)?;
        Ok(Attended { context, weights })
    }
}

/// Experience vector `g`: `c = softmax(g . state_i)`.
#[derive(Clone, Debug)]
pub struct ChoiceScorer {
    pub experience: ParamId,
}

impl ChoiceScorer {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, width: usize, rng: &mut R) -> Result<ChoiceScorer> {
        Ok(ChoiceScorer { experience: store.add_glorot(name, &[width], rng)? })
    }

    pub fn attach(store: &ParamStore, name: &str) -> Result<ChoiceScorer> {
        Ok(ChoiceScorer { experience: store.id(name)? })
    }

    pub fn weights(&self, g: &mut Graph, states: &[Var]) -> Result<Var> {
        if states.is_empty() {
            return Err(CoreError::Empty("choice states"));
        }
        let e = g.param(self.experience);
        let parts = states.iter().map(|&s| g.dot(e, s)).collect::<Result<Vec<_>, _>>()?;
        let scores = g.concat(&parts)?;
        Ok(g.softmax(scores))
    }
}
