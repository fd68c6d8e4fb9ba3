use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_nn::{Gradients, Graph, Optimizer, OptimizerConfig};

use super::context::{plan_context, ContextPlan};
use super::model::CommentaryModel;
use super::CommentCategory;
use crate::data::CommentarySample;
use crate::engine::Engine;
use crate::error::{CoreError, Result};

/// A sample with its context already resolved by the base engine.
#[derive(Clone, Debug)]
pub struct PreparedSample {
    pub plan: ContextPlan,
    pub tokens: Vec<usize>,
}

/// Plans every sample; samples whose context cannot be built (for example
/// planning after a mating move) are returned separately with the reason.
pub fn prepare_samples(
    samples: &[CommentarySample],
    engine: &Engine,
    horizon: usize,
) -> (Vec<PreparedSample>, Vec<(usize, CoreError)>) {
    let mut ok = Vec::with_capacity(samples.len());
    let mut failed = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        match plan_context(s.category, &s.board, &s.mv, engine, horizon) {
            Ok(plan) => ok.push(PreparedSample { plan, tokens: s.tokens.clone() }),
            Err(e) => failed.push((i, e)),
        }
    }
    (ok, failed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommentaryTrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    /// Keep the engine trunk fixed instead of fine-tuning it.
    pub freeze_engine: bool,
    /// Validation interval in steps; `None` validates once per pass over the
    /// training samples.
    pub validate_every: Option<usize>,
}

impl Default for CommentaryTrainConfig {
    fn default() -> Self {
        CommentaryTrainConfig {
            steps: 2000,
            batch_size: 8,
            optimizer: OptimizerConfig::default(),
            seed: 0,
            freeze_engine: false,
            validate_every: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss of every step.
    pub losses: Vec<f64>,
    /// `(step, mean validation loss)` after each validation pass.
    pub validation: Vec<(usize, f64)>,
    /// Step whose parameters were kept; `None` when there was no
    /// validation data and the final parameters were kept.
    pub best_step: Option<usize>,
    /// Model categories without training samples.
    pub skipped: Vec<CommentCategory>,
}

/// Mean loss of `samples` that belong to the model's categories.
pub fn mean_loss(model: &CommentaryModel, samples: &[PreparedSample]) -> Result<Option<f64>> {
    let mut total = 0.0;
    let mut n = 0usize;
    for s in samples.iter().filter(|s| model.has_category(s.plan.category)) {
        let mut g = Graph::new(model.store());
        let loss = model.generation_loss(&mut g, &s.plan, &s.tokens)?;
        total += g.scalar(loss);
        n += 1;
    }
    Ok((n > 0).then(|| total / n as f64))
}

/// Fraction of target tokens (end marker included) that the teacher-forced
/// model ranks first.
pub fn teacher_forced_accuracy(model: &CommentaryModel, samples: &[PreparedSample]) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for s in samples.iter().filter(|s| model.has_category(s.plan.category)) {
        let pred = model.teacher_forced_predictions(&s.plan, &s.tokens)?;
        hits += pred.iter().zip(&s.tokens).filter(|(p, t)| p == t).count();
        total += s.tokens.len();
    }
    if total == 0 {
        return Err(CoreError::Empty("samples for this model"));
    }
    Ok(hits as f64 / total as f64)
}

/// Per-category shuffled cursor.
struct Stream {
    indices: Vec<usize>,
    order: Vec<usize>,
    cursor: usize,
}

impl Stream {
    fn next(&mut self, rng: &mut ChaCha8Rng) -> usize {
        if self.cursor >= self.order.len() {
            self.order.clone_from(&self.indices);
            self.order.shuffle(rng);
            self.cursor = 0;
        }
        self.cursor += 1;
        self.order[self.cursor - 1]
    }
}

/// Minibatch training of the generation loss. Batches rotate through the
/// model's categories, so a multi-category model sees each category in turn.
/// The parameters with the lowest validation loss are kept.
pub fn train_commentary(
    model: &mut CommentaryModel,
    train: &[PreparedSample],
    valid: &[PreparedSample],
    config: &CommentaryTrainConfig,
) -> Result<TrainReport> {
    if config.batch_size == 0 {
        return Err(CoreError::Config("batch size must be positive".into()));
    }
    let mut report = TrainReport::default();
    let mut streams: BTreeMap<CommentCategory, Stream> = BTreeMap::new();
    for &c in model.categories() {
        let indices: Vec<usize> =
            train.iter().enumerate().filter(|(_, s)| s.plan.category == c).map(|(i, _)| i).collect();
        if indices.is_empty() {
            log::warn!("no training samples for {c}; skipping it");
            report.skipped.push(c);
        } else {
            streams.insert(c, Stream { cursor: 0, order: Vec::new(), indices });
        }
    }
    if streams.is_empty() {
        return Err(CoreError::Empty("training samples for the model's categories"));
    }
    let used: usize = streams.values().map(|s| s.indices.len()).sum();
    let validate_every = config.validate_every.unwrap_or_else(|| used.div_ceil(config.batch_size)).max(1);

    let mut optimizer = Optimizer::new(config.optimizer)?;
    if config.freeze_engine {
        optimizer.freeze(model.engine_params());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut grads = Gradients::for_store(model.store());
    let scale = 1.0 / config.batch_size as f64;
    let categories: Vec<CommentCategory> = streams.keys().copied().collect();
    let mut best: Option<(f64, usize, scc_nn::ParamStore)> = None;

    for step in 0..config.steps {
        let category = categories[step % categories.len()];
        let stream = streams.get_mut(&category).expect("listed category");
        grads.clear();
        let mut total = 0.0;
        for _ in 0..config.batch_size {
            let sample = &train[stream.next(&mut rng)];
            let mut g = Graph::new(model.store());
            let loss = model.training_loss(&mut g, &sample.plan, &sample.tokens)?;
            total += g.scalar(loss);
            let scaled = g.affine(loss, scale, 0.0);
            g.backward(scaled, &mut grads)?;
        }
        let mean = total * scale;
        if !mean.is_finite() {
            model.store_mut().zero_grads();
            return Err(CoreError::NonFiniteLoss { step });
        }
        model.store_mut().accumulate(&grads);
        if let Err(e) = optimizer.step(model.store_mut()) {
            model.store_mut().zero_grads();
            return Err(e.into());
        }
        report.losses.push(mean);

        let done = step + 1;
        if done % validate_every == 0 || done == config.steps {
            if let Some(v) = mean_loss(model, valid)? {
                log::info!("step {done}: train {mean:.4} valid {v:.4}");
                report.validation.push((done, v));
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, done, model.store().clone()));
                }
            }
        }
    }
    if let Some((_, step, store)) = best {
        *model.store_mut() = store;
        report.best_step = Some(step);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commentary::model::CommentaryConfig;
    use crate::data::vocab::EOS;
    use crate::engine::EngineConfig;
    use rand::Rng;
    use scc_chess::{Board, Color, GameStatus, PieceKind};

    /// Positions from seeded random games, each with a move whose comment
    /// names the mover's colour, the moved piece and whether it captures.
    fn toy_set(engine: &Engine, category: CommentCategory, n: usize, seed: u64) -> Vec<PreparedSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < n {
            let mut b = Board::start();
            for _ in 0..rng.gen_range(2..40) {
                let moves = b.legal_moves();
                if moves.is_empty() {
                    break;
                }
                b = b.apply_move(moves.choose(&mut rng).unwrap()).unwrap();
            }
            if scc_chess::game_status(&b) != GameStatus::Ongoing {
                continue;
            }
            let mv = *b.legal_moves().choose(&mut rng).unwrap();
            let Ok(plan) = plan_context(category, &b, &mv, engine, 2) else { continue };
            let colour = if b.side_to_move() == Color::White { 4 } else { 5 };
            let piece = 6 + match b.piece_at(mv.from).unwrap().kind {
                PieceKind::Pawn => 0,
                PieceKind::Knight => 1,
                PieceKind::Bishop => 2,
                PieceKind::Rook => 3,
                PieceKind::Queen => 4,
                PieceKind::King => 5,
            };
            let capture = if b.piece_at(mv.to).is_some() { 12 } else { 13 };
            out.push(PreparedSample { plan, tokens: vec![colour, piece, capture, EOS] });
        }
        out
    }

    #[test]
    fn toy_set_is_memorised() {
        let engine = Engine::new(EngineConfig::tiny(), 1).unwrap();
        let category = CommentCategory::Description;
        let samples = toy_set(&engine, category, 32, 2);
        let config = CommentaryConfig { feature_width: 8, word_width: 16, decoder_hidden: 32, engine_loss_weight: 0.0 };
        let mut model = CommentaryModel::new(&engine, &[category], 14, config, 3).unwrap();
        let train = CommentaryTrainConfig {
            steps: 2000,
            optimizer: OptimizerConfig::adam(5e-3),
            ..CommentaryTrainConfig::default()
        };
        let t = std::time::Instant::now();
        let report = train_commentary(&mut model, &samples, &[], &train).unwrap();
        let acc = teacher_forced_accuracy(&model, &samples).unwrap();
        eprintln!("accuracy {acc} in {:?}, last loss {:?}", t.elapsed(), report.losses.last());
        assert!(acc >= 0.95, "{acc}");
        assert_eq!(report.best_step, None);
    }

    #[test]
    fn frozen_engine_stays_bit_identical() {
        let engine = Engine::new(EngineConfig::tiny(), 4).unwrap();
        let cats = [CommentCategory::Quality, CommentCategory::Comparison];
        let samples: Vec<_> = cats.iter().flat_map(|&c| toy_set(&engine, c, 6, 5)).collect();
        let fresh = CommentaryModel::new(&engine, &cats, 14, CommentaryConfig::tiny(), 6).unwrap();
        let snapshot = |m: &CommentaryModel, prefix: &str| {
            m.store()
                .iter()
                .filter(|(_, p)| p.name.starts_with(prefix))
                .map(|(_, p)| p.value.clone())
                .collect::<Vec<_>>()
        };
        for freeze_engine in [true, false] {
            let mut model = fresh.clone();
            let config =
                CommentaryTrainConfig { steps: 20, batch_size: 2, freeze_engine, ..CommentaryTrainConfig::default() };
            train_commentary(&mut model, &samples, &[], &config).unwrap();
            assert_eq!(snapshot(&model, "engine.") == snapshot(&fresh, "engine."), freeze_engine);
            assert_ne!(snapshot(&model, "dec."), snapshot(&fresh, "dec."));
        }
    }

    #[test]
    fn categories_without_samples_are_skipped() {
        let engine = Engine::new(EngineConfig::tiny(), 7).unwrap();
        let samples = toy_set(&engine, CommentCategory::Description, 4, 8);
        let mut model = CommentaryModel::new(
            &engine,
            &[CommentCategory::Description, CommentCategory::Planning],
            14,
            CommentaryConfig::tiny(),
            9,
        )
        .unwrap();
        let config = CommentaryTrainConfig { steps: 4, batch_size: 2, ..CommentaryTrainConfig::default() };
        let report = train_commentary(&mut model, &samples, &[], &config).unwrap();
        assert_eq!(report.skipped, vec![CommentCategory::Planning]);
        assert_eq!(report.losses.len(), 4);
        let mut planning_only =
            CommentaryModel::new(&engine, &[CommentCategory::Planning], 14, CommentaryConfig::tiny(), 9).unwrap();
        assert!(matches!(train_commentary(&mut planning_only, &samples, &[], &config), Err(CoreError::Empty(_))));
    }

    #[test]
    fn best_validation_parameters_are_kept() {
        let engine = Engine::new(EngineConfig::tiny(), 10).unwrap();
        let category = CommentCategory::Description;
        let train = toy_set(&engine, category, 8, 11);
        let valid = toy_set(&engine, category, 4, 12);
        let mut model = CommentaryModel::new(&engine, &[category], 14, CommentaryConfig::tiny(), 13).unwrap();
        let config = CommentaryTrainConfig {
            steps: 30,
            batch_size: 2,
            validate_every: Some(5),
            ..CommentaryTrainConfig::default()
        };
        let report = train_commentary(&mut model, &train, &valid, &config).unwrap();
        assert_eq!(report.validation.iter().map(|v| v.0).collect::<Vec<_>>(), vec![5, 10, 15, 20, 25, 30]);
        let (best_step, best) = report.validation.iter().cloned().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(report.best_step, Some(best_step));
        assert!((mean_loss(&model, &valid).unwrap().unwrap() - best).abs() < 1e-12);
    }
}
