use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use scc_chess::{Board, Color, Move};
use scc_nn::content_hash;
use serde::{Deserialize, Serialize};

use super::context::{check_horizon, plan_context, DEFAULT_HORIZON};
use super::decode::{decode, GenerationConfig};
use super::model::{CommentaryConfig, CommentaryModel};
use super::train::{prepare_samples, train_commentary, CommentaryTrainConfig, TrainReport};
use super::CommentCategory;
use crate::data::{prepare_commentary, CommentRecord, SplitManifest, VocabConfig, Vocabulary};
use crate::engine::{win_rate_for, Engine};
use crate::error::{CoreError, Result};

const MANIFEST: &str = "bundle.json";
const ENGINE_FILE: &str = "engine.ckpt";
const VOCAB_FILE: &str = "vocab.txt";
const SPLIT_FILE: &str = "split.tsv";
const FORMAT: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    /// One independent model per category.
    Single,
    /// One model with shared engine, encoders and value map.
    Mult,
}

impl std::str::FromStr for TrainMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<TrainMode> {
        match s {
            "single" => Ok(TrainMode::Single),
            "mult" => Ok(TrainMode::Mult),
            _ => Err(CoreError::Config(format!("unknown training mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub file: String,
    pub categories: Vec<CommentCategory>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format: u32,
    pub mode: TrainMode,
    pub horizon: usize,
    pub generation: GenerationConfig,
    pub engine: String,
    pub vocab: String,
    pub models: Vec<ModelEntry>,
}

/// Frozen base engine, vocabulary and commentary models, as served.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub manifest: BundleManifest,
    pub vocab: Vocabulary,
    pub engine: Engine,
    pub models: Vec<CommentaryModel>,
    model_id: String,
}

/// One category's result inside a [`CommentOutput`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryComment {
    pub category: CommentCategory,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Comments on one move plus the engine's view of it. Win rates are White's.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommentOutput {
    pub fen: String,
    pub mv: String,
    pub comments: Vec<CategoryComment>,
    pub win_rate_before: f64,
    pub win_rate_after: f64,
    pub best_alternative: String,
    /// The played move was the only legal move.
    pub only_move: bool,
    pub rollout: Vec<String>,
    pub model_id: String,
}

fn model_file(entry_categories: &[CommentCategory], mode: TrainMode) -> String {
    match mode {
        TrainMode::Mult => "models/mult.ckpt".into(),
        TrainMode::Single => format!("models/{}.ckpt", entry_categories[0]),
    }
}

impl Bundle {
    pub fn new(
        mode: TrainMode,
        vocab: Vocabulary,
        engine: Engine,
        models: Vec<CommentaryModel>,
        horizon: usize,
        generation: GenerationConfig,
    ) -> Result<Bundle> {
        check_horizon(horizon)?;
        generation.validate()?;
        let mut seen = BTreeSet::new();
        for m in &models {
            if m.vocab_size() != vocab.len() {
                return Err(CoreError::Data(format!(
                    "model vocabulary {} differs from bundle vocabulary {}",
                    m.vocab_size(),
                    vocab.len()
                )));
            }
            for &c in m.categories() {
                if !seen.insert(c) {
                    return Err(CoreError::Data(format!("category {c} is served by two models")));
                }
            }
        }
        if models.is_empty() {
            return Err(CoreError::Empty("bundle models"));
        }
        let entries = models
            .iter()
            .map(|m| ModelEntry { file: model_file(m.categories(), mode), categories: m.categories().to_vec() })
            .collect();
        let manifest = BundleManifest {
            format: FORMAT,
            mode,
            horizon,
            generation,
            engine: ENGINE_FILE.into(),
            vocab: VOCAB_FILE.into(),
            models: entries,
        };
        let mut bundle = Bundle { manifest, vocab, engine, models, model_id: String::new() };
        bundle.model_id = bundle.compute_id()?;
        Ok(bundle)
    }

    fn compute_id(&self) -> Result<String> {
        let mut parts = String::new();
        parts.push_str(&self.engine.model_id()?);
        for m in &self.models {
            parts.push_str(&m.to_checkpoint().hash()?);
        }
        parts.push_str(&content_hash(self.vocab.to_text().as_bytes()));
        Ok(content_hash(parts.as_bytes()))
    }

    /// Hash over the engine, model and vocabulary contents.
    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn categories(&self) -> Vec<CommentCategory> {
        let mut c: Vec<CommentCategory> = self.models.iter().flat_map(|m| m.categories().iter().copied()).collect();
        c.sort();
        c
    }

    pub fn model_for(&self, category: CommentCategory) -> Result<&CommentaryModel> {
        self.models
            .iter()
            .find(|m| m.has_category(category))
            .ok_or_else(|| CoreError::MissingCategory(category.to_string()))
    }

    pub fn save(&self, dir: &Path, split: Option<&SplitManifest>) -> Result<()> {
        std::fs::create_dir_all(dir.join("models")).map_err(|e| CoreError::io(dir, e))?;
        self.engine.save(&dir.join(ENGINE_FILE))?;
        self.vocab.save(&dir.join(VOCAB_FILE))?;
        for (m, entry) in self.models.iter().zip(&self.manifest.models) {
            m.save(&dir.join(&entry.file))?;
        }
        if let Some(split) = split {
            split.save(&dir.join(SPLIT_FILE))?;
        }
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serialises");
        let path = dir.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| CoreError::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Bundle> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| CoreError::io(&path, e))?;
        let manifest: BundleManifest =
            serde_json::from_str(&text).map_err(|e| CoreError::Data(format!("{}: {e}", path.display())))?;
        if manifest.format != FORMAT {
            return Err(CoreError::Data(format!("unsupported bundle format {}", manifest.format)));
        }
        let engine = Engine::load(&dir.join(&manifest.engine))?;
        let vocab = Vocabulary::load(&dir.join(&manifest.vocab))?;
        let models = manifest
            .models
            .iter()
            .map(|e| {
                let m = CommentaryModel::load(&dir.join(&e.file))?;
                if m.categories() != e.categories.as_slice() {
                    return Err(CoreError::Data(format!(
                        "{} holds different categories than the manifest lists",
                        e.file
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Bundle::new(manifest.mode, vocab, engine, models, manifest.horizon, manifest.generation)
    }

    /// Decoded text of one category, or the reason it could not be produced.
    pub fn comment_text(
        &self,
        category: CommentCategory,
        board: &Board,
        mv: &Move,
        generation: &GenerationConfig,
        horizon: usize,
    ) -> Result<String> {
        let model = self.model_for(category)?;
        let plan = plan_context(category, board, mv, &self.engine, horizon)?;
        let tokens = decode(model, &plan, generation)?;
        Ok(self.vocab.decode(&tokens))
    }

    /// Comments for every requested category plus win rates, the engine's
    /// alternative and its continuation after the move. Per-category
    /// failures (category not trained, no continuation) are reported inside
    /// the output; an illegal move fails the whole request.
    pub fn comment(
        &self,
        board: &Board,
        mv: &Move,
        categories: &[CommentCategory],
        generation: &GenerationConfig,
        horizon: usize,
    ) -> Result<CommentOutput> {
        check_horizon(horizon)?;
        generation.validate()?;
        let mv = *board
            .legal_moves()
            .iter()
            .find(|m| *m == mv)
            .ok_or_else(|| CoreError::MoveNotLegal { mv: mv.to_uci(), fen: board.to_fen() })?;
        let after = board.apply_move(&mv)?;
        let (_, before_v) = self.engine.state_and_value(board)?;
        let (_, after_v) = self.engine.state_and_value(&after)?;
        let alternative = self.engine.select_alternative(board, &mv)?;
        let rollout = self.engine.rollout(&after, horizon)?.into_iter().map(|(_, m)| m.to_uci()).collect();
        let comments = categories
            .iter()
            .map(|&category| match self.comment_text(category, board, &mv, generation, horizon) {
                Ok(text) => Ok(CategoryComment { category, text: Some(text), error: None }),
                Err(e @ (CoreError::MissingCategory(_) | CoreError::NoContinuation(_))) => {
                    Ok(CategoryComment { category, text: None, error: Some(e.to_string()) })
                }
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CommentOutput {
            fen: board.to_fen(),
            mv: mv.to_uci(),
            comments,
            win_rate_before: win_rate_for(board, before_v, Color::White),
            win_rate_after: win_rate_for(&after, after_v, Color::White),
            best_alternative: alternative.mv.to_uci(),
            only_move: alternative.degenerate,
            rollout,
            model_id: self.model_id.clone(),
        })
    }
}

pub const GENERATED_HEADER: &str = "fen\tmove\tcategory\ttext\twin_rate_before\twin_rate_after\talternative";

/// Tab-separated generated-output lines (after a header line), one per
/// category comment of each output.
pub fn generated_tsv(outputs: &[CommentOutput]) -> String {
    let mut out = format!("{GENERATED_HEADER}\n");
    for o in outputs {
        for c in &o.comments {
            let text = c.text.as_deref().unwrap_or("").replace(['\t', '\n'], " ");
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
                o.fen, o.mv, c.category, text, o.win_rate_before, o.win_rate_after, o.best_alternative
            )
            .expect("writing to a String");
        }
    }
    out
}

/// Options of [`train_bundle`].
#[derive(Clone, Debug)]
pub struct BundleTrainOptions {
    pub model: CommentaryConfig,
    pub training: CommentaryTrainConfig,
    pub vocab: VocabConfig,
    pub horizon: usize,
    pub split_seed: u64,
    pub generation: GenerationConfig,
}

impl Default for BundleTrainOptions {
    fn default() -> Self {
        BundleTrainOptions {
            model: CommentaryConfig::default(),
            training: CommentaryTrainConfig::default(),
            vocab: VocabConfig::default(),
            horizon: DEFAULT_HORIZON,
            split_seed: 0,
            generation: GenerationConfig::default(),
        }
    }
}

/// A trained bundle with its split and per-model training reports.
pub struct TrainedBundle {
    pub bundle: Bundle,
    pub split: SplitManifest,
    pub reports: Vec<(Vec<CommentCategory>, TrainReport)>,
    /// Samples dropped because their context could not be built.
    pub unplannable: usize,
}

/// Splits `records` by game, builds the vocabulary on the training games and
/// trains either one model per category or one shared model.
pub fn train_bundle(
    records: &[CommentRecord],
    engine: &Engine,
    mode: TrainMode,
    categories: &[CommentCategory],
    options: &BundleTrainOptions,
) -> Result<TrainedBundle> {
    let prepared = prepare_commentary(records, options.split_seed, &options.vocab);
    let (train, bad_train) = prepare_samples(&prepared.train, engine, options.horizon);
    let (valid, bad_valid) = prepare_samples(&prepared.valid, engine, options.horizon);
    let groups: Vec<Vec<CommentCategory>> = match mode {
        TrainMode::Single => categories.iter().map(|&c| vec![c]).collect(),
        TrainMode::Mult => vec![categories.to_vec()],
    };
    let mut models = Vec::new();
    let mut reports = Vec::new();
    for (i, group) in groups.into_iter().enumerate() {
        if !train.iter().any(|s| group.contains(&s.plan.category)) {
            log::warn!("no training samples for {group:?}; no model trained");
            continue;
        }
        let mut model = CommentaryModel::new(
            engine,
            &group,
            prepared.vocab.len(),
            options.model.clone(),
            options.training.seed + i as u64,
        )?;
        let report = train_commentary(&mut model, &train, &valid, &options.training)?;
        models.push(model);
        reports.push((group, report));
    }
    let bundle = Bundle::new(mode, prepared.vocab, engine.clone(), models, options.horizon, options.generation)?;
    Ok(TrainedBundle { bundle, split: prepared.split, reports, unplannable: bad_train.len() + bad_valid.len() })
}
