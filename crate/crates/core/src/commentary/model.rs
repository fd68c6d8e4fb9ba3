use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_chess::{game_status, Board};
use scc_nn::{functional, Checkpoint, Dense, Embedding, Graph, LstmCell, LstmState, ParamId, ParamStore, Var};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::context::ContextPlan;
use super::CommentCategory;
use crate::data::vocab::BOS;
use crate::encoders::{
    diff_embed, move_features, value_embed, Attention, ChoiceScorer, ContextRows, JointProjection, MoveEncoder, RowKind,
};
use crate::engine::{terminal_value, Engine, EngineConfig, EngineNet, ENGINE_PREFIX};
use crate::error::{CoreError, Result};

const MOVE_ENCODER: &str = "move_encoder";
const EXPERIENCE: &str = "mce.g";
const W_VAL: &str = "mce.w_val";
const W_DIFF: &str = "quality.w_diff";

/// Widths of the commentary-specific layers; the board-state width comes
/// from the engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommentaryConfig {
    /// Embedding width of the six move-feature tokens.
    pub feature_width: usize,
    pub word_width: usize,
    pub decoder_hidden: usize,
    /// Weight of the engine's policy loss on the played move, added to the
    /// generation loss while fine-tuning. Zero leaves the policy head out of
    /// the model entirely.
    pub engine_loss_weight: f64,
}

impl Default for CommentaryConfig {
    fn default() -> Self {
        CommentaryConfig { feature_width: 32, word_width: 128, decoder_hidden: 256, engine_loss_weight: 0.0 }
    }
}

impl CommentaryConfig {
    pub fn tiny() -> CommentaryConfig {
        CommentaryConfig { feature_width: 3, word_width: 4, decoder_hidden: 5, engine_loss_weight: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_width == 0 || self.word_width == 0 || self.decoder_hidden == 0 {
            return Err(CoreError::Config("commentary widths must be positive".into()));
        }
        if !(self.engine_loss_weight.is_finite() && self.engine_loss_weight >= 0.0) {
            return Err(CoreError::Config("engine loss weight must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// One category's generator: word embeddings, LSTM, bilinear attention and
/// the output layer over `[h; z]`.
#[derive(Clone, Debug)]
pub struct Decoder {
    pub embed: Embedding,
    /// Projects the initial board state onto the first input.
    pub init: Dense,
    pub lstm: LstmCell,
    pub attention: Attention,
    pub output: Dense,
}

fn decoder_name(category: CommentCategory) -> String {
    format!("dec.{category}")
}

impl Decoder {
    fn new(
        store: &mut ParamStore,
        name: &str,
        vocab: usize,
        d: usize,
        c: &CommentaryConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Decoder> {
        Ok(Decoder {
            embed: Embedding::new(store, &format!("{name}.embed"), vocab, c.word_width, rng)?,
            init: Dense::new(store, &format!("{name}.init"), d, c.word_width, false, rng)?,
            lstm: LstmCell::new(store, &format!("{name}.lstm"), c.word_width, c.decoder_hidden, rng)?,
            attention: Attention::new(store, &format!("{name}.attn"), d, c.decoder_hidden, rng)?,
            output: Dense::new(store, &format!("{name}.out"), c.decoder_hidden + d, vocab, true, rng)?,
        })
    }

    fn attach(store: &ParamStore, name: &str) -> Result<Decoder> {
        Ok(Decoder {
            embed: Embedding::from_store(store, &format!("{name}.embed"))?,
            init: Dense::from_store(store, &format!("{name}.init"))?,
            lstm: LstmCell::from_store(store, &format!("{name}.lstm"))?,
            attention: Attention::attach(store, &format!("{name}.attn"))?,
            output: Dense::from_store(store, &format!("{name}.out"))?,
        })
    }
}

/// Attention memory of one sample.
#[derive(Clone, Debug)]
pub enum Memory {
    Rows(ContextRows),
    /// Rows of every choice plus the choice weights.
    Choices {
        rows: Vec<Vec<Var>>,
        weights: Var,
    },
}

/// A sample's encoded context inside one graph.
#[derive(Clone, Debug)]
pub struct EncodedContext {
    pub memory: Memory,
    /// Board state before the move; seeds the decoder.
    pub initial_state: Var,
}

/// Engine trunk, encoders and per-category decoders in one parameter store.
#[derive(Clone, Debug)]
pub struct CommentaryModel {
    config: CommentaryConfig,
    engine_config: EngineConfig,
    vocab_size: usize,
    categories: Vec<CommentCategory>,
    store: ParamStore,
    trunk: EngineNet,
    move_encoder: Option<MoveEncoder>,
    scorer: Option<ChoiceScorer>,
    w_val: Option<JointProjection>,
    w_diff: Option<JointProjection>,
    decoders: BTreeMap<CommentCategory, Decoder>,
}

fn sorted_categories(categories: &[CommentCategory]) -> Result<Vec<CommentCategory>> {
    let mut cats = categories.to_vec();
    cats.sort();
    cats.dedup();
    if cats.is_empty() {
        return Err(CoreError::Config("a commentary model needs at least one category".into()));
    }
    Ok(cats)
}

impl CommentaryModel {
    /// A fresh model whose trunk starts from `base`. One decoder per
    /// category; the move encoder, experience vector and value map are
    /// shared by every category that uses them.
    pub fn new(
        base: &Engine,
        categories: &[CommentCategory],
        vocab_size: usize,
        config: CommentaryConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let categories = sorted_categories(categories)?;
        if vocab_size < 5 {
            return Err(CoreError::Config(format!("vocabulary of {vocab_size} has no ordinary words")));
        }
        let with_policy = config.engine_loss_weight > 0.0;
        let mut store = ParamStore::new();
        for (_, p) in base.store().iter() {
            if with_policy || !p.name.starts_with(&format!("{ENGINE_PREFIX}.policy.")) {
                store.add(&p.name, p.value.clone())?;
            }
        }
        let engine_config = base.config().clone();
        let trunk = EngineNet::attach(&store, ENGINE_PREFIX, engine_config.conv_layers)?;
        let d = trunk.state_width();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let needs_moves = categories.iter().any(|&c| c != CommentCategory::Quality);
        let needs_choices = categories.iter().any(|c| c.uses_choices());
        let move_encoder = needs_moves
            .then(|| MoveEncoder::new(&mut store, MOVE_ENCODER, config.feature_width, d, &mut rng))
            .transpose()?;
        let scorer = needs_choices.then(|| ChoiceScorer::new(&mut store, EXPERIENCE, d, &mut rng)).transpose()?;
        let w_val = needs_choices.then(|| JointProjection::new(&mut store, W_VAL, d + 1, d, &mut rng)).transpose()?;
        let w_diff = categories
            .contains(&CommentCategory::Quality)
            .then(|| JointProjection::new(&mut store, W_DIFF, 2 * d + 1, d, &mut rng))
            .transpose()?;
        let mut decoders = BTreeMap::new();
        for &c in &categories {
            decoders.insert(c, Decoder::new(&mut store, &decoder_name(c), vocab_size, d, &config, &mut rng)?);
        }
        Ok(CommentaryModel {
            config,
            engine_config,
            vocab_size,
            categories,
            store,
            trunk,
            move_encoder,
            scorer,
            w_val,
            w_diff,
            decoders,
        })
    }

    fn attach(
        config: CommentaryConfig,
        engine_config: EngineConfig,
        vocab_size: usize,
        categories: Vec<CommentCategory>,
        store: ParamStore,
    ) -> Result<Self> {
        let trunk = EngineNet::attach(&store, ENGINE_PREFIX, engine_config.conv_layers)?;
        let optional = |name: &str| store.contains(&format!("{name}.weight"));
        let move_encoder = store
            .contains(&format!("{MOVE_ENCODER}.embed.table"))
            .then(|| MoveEncoder::attach(&store, MOVE_ENCODER))
            .transpose()?;
        let scorer = store.contains(EXPERIENCE).then(|| ChoiceScorer::attach(&store, EXPERIENCE)).transpose()?;
        let w_val = optional(W_VAL).then(|| JointProjection::attach(&store, W_VAL)).transpose()?;
        let w_diff = optional(W_DIFF).then(|| JointProjection::attach(&store, W_DIFF)).transpose()?;
        let decoders =
            categories.iter().map(|&c| Ok((c, Decoder::attach(&store, &decoder_name(c))?))).collect::<Result<_>>()?;
        let model = CommentaryModel {
            config,
            engine_config,
            vocab_size,
            categories,
            store,
            trunk,
            move_encoder,
            scorer,
            w_val,
            w_diff,
            decoders,
        };
        for &c in &model.categories {
            model.check_components(c)?;
        }
        Ok(model)
    }

    fn check_components(&self, category: CommentCategory) -> Result<()> {
        let missing = |what: &str| Err(CoreError::Data(format!("{category} model lacks its {what}")));
        if category != CommentCategory::Quality && self.move_encoder.is_none() {
            return missing("move encoder");
        }
        if category.uses_choices() && (self.scorer.is_none() || self.w_val.is_none()) {
            return missing("multi-choice encoder");
        }
        if category == CommentCategory::Quality && self.w_diff.is_none() {
            return missing("difference map");
        }
        Ok(())
    }

    pub fn config(&self) -> &CommentaryConfig {
        &self.config
    }

    pub fn engine_config(&self) -> &EngineConfig {
        &self.engine_config
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn categories(&self) -> &[CommentCategory] {
        &self.categories
    }

    pub fn has_category(&self, category: CommentCategory) -> bool {
        self.decoders.contains_key(&category)
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn trunk(&self) -> &EngineNet {
        &self.trunk
    }

    /// Ids of the engine trunk parameters.
    pub fn engine_params(&self) -> Vec<ParamId> {
        let prefix = format!("{ENGINE_PREFIX}.");
        self.store.iter().filter(|(_, p)| p.name.starts_with(&prefix)).map(|(id, _)| id).collect()
    }

    pub fn decoder(&self, category: CommentCategory) -> Result<&Decoder> {
        self.decoders.get(&category).ok_or_else(|| CoreError::MissingCategory(category.to_string()))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let header = json!({
            "kind": "commentary",
            "config": self.config,
            "engine": self.engine_config,
            "vocab_size": self.vocab_size,
            "categories": self.categories,
        });
        Checkpoint::new(header, self.store.clone())
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        if ck.header.get("kind").and_then(|k| k.as_str()) != Some("commentary") {
            return Err(CoreError::Data("checkpoint is not a commentary model".into()));
        }
        let field = |name: &str| {
            ck.header.get(name).cloned().ok_or_else(|| CoreError::Data(format!("model header lacks {name}")))
        };
        let parse_err = |e: serde_json::Error| CoreError::Data(format!("model header: {e}"));
        let config: CommentaryConfig = serde_json::from_value(field("config")?).map_err(parse_err)?;
        let engine_config: EngineConfig = serde_json::from_value(field("engine")?).map_err(parse_err)?;
        let vocab_size: usize = serde_json::from_value(field("vocab_size")?).map_err(parse_err)?;
        let categories: Vec<CommentCategory> = serde_json::from_value(field("categories")?).map_err(parse_err)?;
        let categories = sorted_categories(&categories)?;
        CommentaryModel::attach(config, engine_config, vocab_size, categories, ck.store)
    }

    pub fn save(&self, path: &Path) -> Result<String> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        CommentaryModel::from_checkpoint(Checkpoint::load(path)?)
    }

    /// Board state and side-to-move win rate from the trunk; finished games
    /// use their exact result.
    fn state_value(&self, g: &mut Graph, board: &Board) -> Result<(Var, Var)> {
        let state = self.trunk.board_state(g, board)?;
        let v = match terminal_value(game_status(board)) {
            Some(v) => g.constant(vec![v]),
            None => self.trunk.win_rate(g, state)?,
        };
        Ok((state, v))
    }

    /// Win rate `v` (side to move on `board`) seen by the player who made
    /// the commented move.
    fn for_mover(g: &mut Graph, plan: &ContextPlan, board: &Board, v: Var) -> Var {
        if board.side_to_move() == plan.board.side_to_move() {
            v
        } else {
            g.affine(v, -1.0, 1.0)
        }
    }

    /// Records the category's context rows for `plan` onto `g`.
    pub fn encode_context(&self, g: &mut Graph, plan: &ContextPlan) -> Result<EncodedContext> {
        self.decoder(plan.category)?;
        self.check_components(plan.category)?;
        let (s0, v0) = self.state_value(g, &plan.board)?;
        let memory = match plan.category {
            CommentCategory::Description => {
                let encoder = self.move_encoder.as_ref().expect("checked");
                let mut rows = ContextRows::default();
                rows.extend(encoder.encode(g, &move_features(&plan.board, &plan.mv)?)?, RowKind::MoveFeature);
                rows.push(s0, RowKind::BoardState);
                Memory::Rows(rows)
            }
            CommentCategory::Quality => {
                let (s1, v1) = self.state_value(g, &plan.after)?;
                let v0 = Self::for_mover(g, plan, &plan.board, v0);
                let v1 = Self::for_mover(g, plan, &plan.after, v1);
                let delta = g.sub(v1, v0)?;
                let diff = diff_embed(g, self.w_diff.as_ref().expect("checked"), s0, s1, delta)?;
                let mut rows = ContextRows::default();
                rows.push(s0, RowKind::BoardState);
                rows.push(s1, RowKind::BoardState);
                rows.push(diff, RowKind::DiffEmbed);
                Memory::Rows(rows)
            }
            _ => {
                if plan.choices.is_empty() {
                    return Err(CoreError::NoContinuation(format!("{} context has no choices", plan.category)));
                }
                let encoder = self.move_encoder.as_ref().expect("checked");
                let w_val = self.w_val.as_ref().expect("checked");
                let mut rows = Vec::with_capacity(plan.choices.len());
                let mut states = Vec::with_capacity(plan.choices.len());
                for choice in &plan.choices {
                    let mut r = encoder.encode(g, &move_features(&choice.before, &choice.mv)?)?;
                    let (s, v) = self.state_value(g, &choice.after)?;
                    let v = Self::for_mover(g, plan, &choice.after, v);
                    r.push(s);
                    r.push(value_embed(g, w_val, s, v)?);
                    states.push(s);
                    rows.push(r);
                }
                let weights = self.scorer.as_ref().expect("checked").weights(g, &states)?;
                Memory::Choices { rows, weights }
            }
        };
        Ok(EncodedContext { memory, initial_state: s0 })
    }

    fn read(&self, g: &mut Graph, decoder: &Decoder, memory: &Memory, h: Var) -> Result<Var> {
        Ok(match memory {
            Memory::Rows(rows) => decoder.attention.attend(g, &rows.rows, h)?.context,
            Memory::Choices { rows, weights } => decoder.attention.attend_choices(g, rows, *weights, h)?.context,
        })
    }

    /// Input of the first decoding step: the start-marker embedding plus the
    /// projected initial board state.
    pub fn first_input(&self, g: &mut Graph, category: CommentCategory, ctx: &EncodedContext) -> Result<Var> {
        let dec = self.decoder(category)?;
        let bos = dec.embed.lookup(g, BOS)?;
        let seed = dec.init.forward(g, ctx.initial_state)?;
        Ok(g.add(bos, seed)?)
    }

    pub fn token_input(&self, g: &mut Graph, category: CommentCategory, token: usize) -> Result<Var> {
        self.check_token(token)?;
        Ok(self.decoder(category)?.embed.lookup(g, token)?)
    }

    pub fn zero_state(&self, g: &mut Graph, category: CommentCategory) -> Result<LstmState> {
        Ok(self.decoder(category)?.lstm.zero_state(g))
    }

    /// One decoder step: returns the output logits and the new state.
    pub fn step(
        &self,
        g: &mut Graph,
        category: CommentCategory,
        ctx: &EncodedContext,
        input: Var,
        state: LstmState,
    ) -> Result<(Var, LstmState)> {
        let dec = self.decoder(category)?;
        let state = dec.lstm.step(g, input, state)?;
        let z = self.read(g, dec, &ctx.memory, state.h)?;
        let hz = g.concat(&[state.h, z])?;
        Ok((dec.output.forward(g, hz)?, state))
    }

    fn check_token(&self, id: usize) -> Result<()> {
        if id >= self.vocab_size {
            return Err(CoreError::TokenOutOfRange { id, size: self.vocab_size });
        }
        Ok(())
    }

    /// Teacher-forced logits for every target position.
    pub fn teacher_forced_logits(&self, g: &mut Graph, plan: &ContextPlan, targets: &[usize]) -> Result<Vec<Var>> {
        if targets.is_empty() {
            return Err(CoreError::Empty("target tokens"));
        }
        for &t in targets {
            self.check_token(t)?;
        }
        let ctx = self.encode_context(g, plan)?;
        let mut state = self.zero_state(g, plan.category)?;
        let mut input = self.first_input(g, plan.category, &ctx)?;
        let mut out = Vec::with_capacity(targets.len());
        for (i, &t) in targets.iter().enumerate() {
            let (logits, next) = self.step(g, plan.category, &ctx, input, state)?;
            out.push(logits);
            state = next;
            if i + 1 < targets.len() {
                input = self.token_input(g, plan.category, t)?;
            }
        }
        Ok(out)
    }

    /// Mean token cross-entropy of `targets` (which end with the end marker).
    pub fn generation_loss(&self, g: &mut Graph, plan: &ContextPlan, targets: &[usize]) -> Result<Var> {
        let logits = self.teacher_forced_logits(g, plan, targets)?;
        let losses =
            logits.into_iter().zip(targets).map(|(l, &t)| g.softmax_xent(l, t)).collect::<Result<Vec<_>, _>>()?;
        Ok(g.mean(&losses)?)
    }

    /// Generation loss plus the weighted policy loss of the played move.
    pub fn training_loss(&self, g: &mut Graph, plan: &ContextPlan, targets: &[usize]) -> Result<Var> {
        let gen = self.generation_loss(g, plan, targets)?;
        let weight = self.config.engine_loss_weight;
        if weight == 0.0 {
            return Ok(gen);
        }
        let legal = plan.board.legal_moves();
        let target = legal.iter().position(|m| *m == plan.mv).expect("plans hold legal moves");
        let state = self.trunk.board_state(g, &plan.board)?;
        let logits = self.trunk.policy_logits(g, state, &legal)?;
        let policy = g.softmax_xent(logits, target)?;
        let policy = g.affine(policy, weight, 0.0);
        Ok(g.add(gen, policy)?)
    }

    /// Teacher-forced argmax predictions, one per target position.
    pub fn teacher_forced_predictions(&self, plan: &ContextPlan, targets: &[usize]) -> Result<Vec<usize>> {
        let mut g = Graph::new(&self.store);
        let logits = self.teacher_forced_logits(&mut g, plan, targets)?;
        Ok(logits.into_iter().map(|l| functional::argmax(g.value(l).data()).expect("nonempty vocabulary")).collect())
    }
}
