//! Move encoder and multi-choice encoder: everything that turns moves,
//! boards and win rates into attention rows.

mod attention;
mod features;

use rand::Rng;
use scc_nn::{BiRnn, Embedding, Graph, ParamId, ParamStore, Var};

pub use attention::{Attended, Attention, ChoiceScorer};
pub use features::{move_features, MoveFeatures, FEATURE_LEN, FEATURE_VOCAB};

use crate::error::Result;

/// What a context row was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    MoveFeature,
    BoardState,
    ValueEmbed,
    DiffEmbed,
}

/// Attention memory for one read: rows of a common width with their kinds.
#[derive(Clone, Debug, Default)]
pub struct ContextRows {
    pub rows: Vec<Var>,
    pub kinds: Vec<RowKind>,
}

impl ContextRows {
    pub fn push(&mut self, row: Var, kind: RowKind) {
        self.rows.push(row);
        self.kinds.push(kind);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Var>, kind: RowKind) {
        for r in rows {
            self.push(r, kind);
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Token embeddings of the six move features run through a bidirectional
/// LSTM; one output row per feature.
#[derive(Clone, Debug)]
pub struct MoveEncoder {
    pub embed: Embedding,
    pub rnn: BiRnn,
}

impl MoveEncoder {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        embed_width: usize,
        width: usize,
        rng: &mut R,
    ) -> Result<MoveEncoder> {
        Ok(MoveEncoder {
            embed: Embedding::new(store, &format!("{name}.embed"), FEATURE_VOCAB, embed_width, rng)?,
            rnn: BiRnn::new(store, &format!("{name}.rnn"), embed_width, width, rng)?,
        })
    }

    pub fn attach(store: &ParamStore, name: &str) -> Result<MoveEncoder> {
        Ok(MoveEncoder {
            embed: Embedding::from_store(store, &format!("{name}.embed"))?,
            rnn: BiRnn::from_store(store, &format!("{name}.rnn"))?,
        })
    }

    pub fn width(&self) -> usize {
        self.rnn.width()
    }

    pub fn encode(&self, g: &mut Graph, features: &MoveFeatures) -> Result<Vec<Var>> {
        let xs = features.tokens().iter().map(|&t| self.embed.lookup(g, t)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.rnn.forward(g, &xs)?)
    }
}

/// Bias-free linear map over a concatenation of inputs.
#[derive(Clone, Debug)]
pub struct JointProjection {
    pub weight: ParamId,
}

impl JointProjection {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Result<JointProjection> {
        Ok(JointProjection { weight: store.add_glorot(&format!("{name}.weight"), &[outputs, inputs], rng)? })
    }

    pub fn attach(store: &ParamStore, name: &str) -> Result<JointProjection> {
        Ok(JointProjection { weight: store.id(&format!("{name}.weight"))? })
    }

    pub fn forward(&self, g: &mut Graph, parts: &[Var]) -> Result<Var> {
        let x = g.concat(parts)?;
        let w = g.param(self.weight);
        Ok(g.matvec(w, x)?)
    }
}

/// `W_val [state; v]`.
pub fn value_embed(g: &mut Graph, w_val: &JointProjection, state: Var, win_rate: Var) -> Result<Var> {
    w_val.forward(g, &[state, win_rate])
}

/// `W_diff [state_before; state_after; v_after - v_before]`.
pub fn diff_embed(g: &mut Graph, w_diff: &JointProjection, before: Var, after: Var, delta: Var) -> Result<Var> {
    w_diff.forward(g, &[before, after, delta])
}

/// One candidate continuation as seen by the multi-choice encoder.
#[derive(Clone, Debug)]
pub struct ChoiceRows {
    pub moves: Vec<Var>,
    pub state: Var,
    pub value: Var,
}

impl ChoiceRows {
    /// Six move rows, then the board state, then the value embedding.
    pub fn rows(&self) -> Vec<Var> {
        let mut rows = self.moves.clone();
        rows.push(self.state);
        rows.push(self.value);
        rows
    }
}

/// Choice weights from the experience vector, then the nested attention
/// read across all choices.
pub fn multi_choice_context(
    g: &mut Graph,
    attention: &Attention,
    scorer: &ChoiceScorer,
    choices: &[ChoiceRows],
    query: Var,
) -> Result<(Attended, Var)> {
    let states: Vec<Var> = choices.iter().map(|c| c.state).collect();
    let weights = scorer.weights(g, &states)?;
    let rows: Vec<Vec<Var>> = choices.iter().map(ChoiceRows::rows).collect();
    Ok((attention.attend_choices(g, &rows, weights, query)?, weights))
}
