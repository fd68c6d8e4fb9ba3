use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_chess::{Board, Move};
use scc_nn::{Gradients, Graph, Optimizer, OptimizerConfig, Var};

use super::{Engine, EngineNet};
use crate::error::{CoreError, Result};

/// Game result from one player's point of view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Loss,
    Draw,
    Win,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::Loss => 0.0,
            Outcome::Draw => 0.5,
            Outcome::Win => 1.0,
        }
    }

    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Loss => Outcome::Win,
            Outcome::Draw => Outcome::Draw,
            Outcome::Win => Outcome::Loss,
        }
    }

    pub fn from_half_points(half: u8) -> Option<Outcome> {
        match half {
            0 => Some(Outcome::Loss),
            1 => Some(Outcome::Draw),
            2 => Some(Outcome::Win),
            _ => None,
        }
    }

    pub fn half_points(self) -> u8 {
        match self {
            Outcome::Loss => 0,
            Outcome::Draw => 1,
            Outcome::Win => 2,
        }
    }
}

/// A position, the move played in it and the eventual result for the mover.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingTuple {
    pub board: Board,
    pub mv: Move,
    pub outcome: Outcome,
}

/// `-ln p(move) + (v - target)^2` for known probabilities.
pub fn engine_loss_value(move_prob: f64, win_rate: f64, target: f64) -> f64 {
    -move_prob.ln() + (win_rate - target).powi(2)
}

/// Records the per-tuple engine loss onto `g` and returns it.
pub fn engine_loss(g: &mut Graph, net: &EngineNet, tuple: &TrainingTuple) -> Result<Var> {
    let legal = tuple.board.legal_moves();
    let target = legal
        .iter()
        .position(|m| *m == tuple.mv)
        .ok_or_else(|| CoreError::MoveNotLegal { mv: tuple.mv.to_uci(), fen: tuple.board.to_fen() })?;
    let state = net.board_state(g, &tuple.board)?;
    let logits = net.policy_logits(g, state, &legal)?;
    let policy = g.softmax_xent(logits, target)?;
    let v = net.win_rate(g, state)?;
    let err = g.affine(v, 1.0, -tuple.outcome.value());
    let value = g.square(err);
    Ok(g.add(policy, value)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { steps: 1000, batch_size: 16, optimizer: OptimizerConfig::default(), seed: 0 }
    }
}

/// Minibatch training of the engine loss. Returns the mean batch loss of
/// every step. On a non-finite loss or gradient the step is abandoned, the
/// engine keeps the parameters of the last completed step and the error is
/// returned.
pub fn train_supervised(engine: &mut Engine, tuples: &[TrainingTuple], config: &TrainConfig) -> Result<Vec<f64>> {
    if tuples.is_empty() {
        return Err(CoreError::Empty("training tuples"));
    }
    if config.batch_size == 0 {
        return Err(CoreError::Config("batch size must be positive".into()));
    }
    let mut optimizer = Optimizer::new(config.optimizer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..tuples.len()).collect();
    let mut cursor = order.len();
    let mut grads = Gradients::for_store(engine.store());
    let mut losses = Vec::with_capacity(config.steps);
    let scale = 1.0 / config.batch_size as f64;

    for step in 0..config.steps {
        let mut total = 0.0;
        grads.clear();
        for _ in 0..config.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let tuple = &tuples[order[cursor]];
            cursor += 1;
            let mut g = Graph::new(&engine.store);
            let loss = engine_loss(&mut g, &engine.net, tuple)?;
            total += g.scalar(loss);
            let scaled = g.affine(loss, scale, 0.0);
            g.backward(scaled, &mut grads)?;
        }
        let mean = total * scale;
        if !mean.is_finite() {
            engine.store.zero_grads();
            return Err(CoreError::NonFiniteLoss { step });
        }
        engine.store.accumulate(&grads);
        if let Err(e) = optimizer.step(&mut engine.store) {
            engine.store.zero_grads();
            return Err(e.into());
        }
        losses.push(mean);
    }
    Ok(losses)
}

/// `step,loss` lines, one per step, steps counted from 1.
pub fn write_loss_curve(path: &Path, losses: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(losses.len() * 24);
    for (i, l) in losses.iter().enumerate() {
        writeln!(text, "{},{l}", i + 1).expect("writing to a String");
    }
    std::fs::write(path, text).map_err(|e| CoreError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;
    use scc_chess::parse_move_text;
    use scc_nn::{gradient_check, GradCheckConfig};

    fn tuple(fen_moves: &[&str], mv: &str, outcome: Outcome) -> TrainingTuple {
        let mut b = Board::start();
        for m in fen_moves {
            b = b.apply_move(&parse_move_text(&b, m).unwrap()).unwrap();
        }
        let mv = parse_move_text(&b, mv).unwrap();
        TrainingTuple { board: b, mv, outcome }
    }

    #[test]
    fn spot_values() {
        assert!((engine_loss_value(0.5, 0.5, 1.0) - 0.943147).abs() < 1e-5);
        assert_eq!(engine_loss_value(1.0, 0.7, 0.7), 0.0);
    }

    #[test]
    fn graph_loss_matches_closed_form() {
        let engine = Engine::new(EngineConfig::tiny(), 3).unwrap();
        let t = tuple(&["e2e4"], "e7e5", Outcome::Win);
        let eval = engine.evaluate(&t.board).unwrap();
        let mut g = Graph::new(engine.store());
        let loss = engine_loss(&mut g, engine.net(), &t).unwrap();
        let expected = engine_loss_value(eval.prob_of(&t.mv), eval.win_rate, 1.0);
        assert!((g.scalar(loss) - expected).abs() < 1e-12);
    }

    #[test]
    fn illegal_tuple_move_is_an_error() {
        let engine = Engine::new(EngineConfig::tiny(), 3).unwrap();
        let mut t = tuple(&[], "e2e4", Outcome::Draw);
        t.mv = Move::new(t.mv.from, t.mv.from.offset(0, 3).unwrap(), None);
        let mut g = Graph::new(engine.store());
        assert!(matches!(engine_loss(&mut g, engine.net(), &t), Err(CoreError::MoveNotLegal { .. })));
    }

    #[test]
    fn loss_gradient_check() {
        for seed in 0..5 {
            let mut engine = Engine::new(EngineConfig::tiny(), seed).unwrap();
            let t = tuple(&["e2e4", "c7c5"], "g1f3", Outcome::Loss);
            let net = engine.net().clone();
            let config = GradCheckConfig { seed, samples_per_param: 6, ..GradCheckConfig::default() };
            let report =
                gradient_check::<_, CoreError>(engine.store_mut(), &[], &config, |g| engine_loss(g, &net, &t)).unwrap();
            assert!(report.passed(), "{report:#?}");
        }
    }

    #[test]
    fn training_is_deterministic_and_writes_a_curve() {
        let tuples = vec![tuple(&[], "e2e4", Outcome::Win), tuple(&["d2d4"], "d7d5", Outcome::Draw)];
        let config = TrainConfig { steps: 5, batch_size: 2, optimizer: OptimizerConfig::adam(1e-2), seed: 7 };
        let mut a = Engine::new(EngineConfig::tiny(), 1).unwrap();
        let mut b = Engine::new(EngineConfig::tiny(), 1).unwrap();
        let la = train_supervised(&mut a, &tuples, &config).unwrap();
        let lb = train_supervised(&mut b, &tuples, &config).unwrap();
        assert_eq!(la, lb);
        assert_eq!(a.model_id().unwrap(), b.model_id().unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loss.csv");
        write_loss_curve(&path, &la).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("1,"));
    }

    #[test]
    fn diverging_training_keeps_the_last_good_parameters() {
        let tuples = vec![tuple(&[], "e2e4", Outcome::Win)];
        let mut engine = Engine::new(EngineConfig::tiny(), 1).unwrap();
        let before = engine.model_id().unwrap();
        let id = engine.store().id("engine.conv0.weight").unwrap();
        engine.store_mut().value_mut(id).fill(f64::MAX);
        let poisoned = engine.model_id().unwrap();
        assert_ne!(before, poisoned);
        let config = TrainConfig { steps: 3, batch_size: 1, ..TrainConfig::default() };
        let err = train_supervised(&mut engine, &tuples, &config).unwrap_err();
        assert!(err.is_numeric(), "{err}");
        assert_eq!(engine.model_id().unwrap(), poisoned);
    }
}
