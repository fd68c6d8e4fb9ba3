//! Policy/value chess engine over the 20-plane board encoding.

mod net;
pub mod planes;
mod play;
mod train;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_chess::{game_status, move_index, Board, Color, GameStatus, Move, MOVE_INDEX_SPACE};
use scc_nn::{functional, Checkpoint, Graph, ParamStore, Var};
use serde_json::json;

pub use net::{EngineConfig, EngineNet};
pub use play::{
    games_to_pgn, gate, improve, self_play, GameRecord, GateConfig, GatingReport, IterationLog, IterationSchedule,
    SelfPlayConfig,
};
pub use train::{
    engine_loss, engine_loss_value, train_supervised, write_loss_curve, Outcome, TrainConfig, TrainingTuple,
};

use crate::error::{CoreError, Result};

pub const ENGINE_PREFIX: &str = "engine";

/// Engine output on a non-terminal board.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineEval {
    pub board_state: Vec<f64>,
    /// Legal moves in generation order, with their probabilities.
    pub legal: Vec<Move>,
    pub probs: Vec<f64>,
    /// Win rate for the side to move.
    pub win_rate: f64,
}

impl EngineEval {
    pub fn prob_of(&self, mv: &Move) -> f64 {
        self.legal.iter().position(|m| m == mv).map_or(0.0, |i| self.probs[i])
    }

    /// Probabilities over the whole move index space; illegal slots are 0.
    pub fn dense_policy(&self) -> Vec<f64> {
        let mut out = vec![0.0; MOVE_INDEX_SPACE];
        for (mv, p) in self.legal.iter().zip(&self.probs) {
            out[move_index(mv)] = *p;
        }
        out
    }

    /// Most probable move; the earliest legal move wins ties.
    pub fn best_move(&self) -> Move {
        self.legal[functional::argmax(&self.probs).expect("nonempty")]
    }
}

/// Exact result for the side to move on a finished game.
pub fn terminal_value(status: GameStatus) -> Option<f64> {
    match status {
        GameStatus::Ongoing => None,
        GameStatus::Checkmate => Some(0.0),
        _ => Some(0.5),
    }
}

/// Converts a side-to-move win rate into `perspective`'s win rate.
pub fn win_rate_for(board: &Board, win_rate: f64, perspective: Color) -> f64 {
    if board.side_to_move() == perspective {
        win_rate
    } else {
        1.0 - win_rate
    }
}

/// Result of excluding the played move from the engine's choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alternative {
    pub mv: Move,
    /// The played move was the only legal move, so it is returned itself.
    pub degenerate: bool,
}

/// A standalone engine: configuration plus its own parameters.
#[derive(Clone, Debug)]
pub struct Engine {
    config: EngineConfig,
    store: ParamStore,
    net: EngineNet,
}

impl Engine {
    pub fn new(config: EngineConfig, seed: u64) -> Result<Engine> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let net = EngineNet::build(&mut store, ENGINE_PREFIX, &config, &mut rng)?;
        Ok(Engine { config, store, net })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn net(&self) -> &EngineNet {
        &self.net
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let header = json!({ "kind": "engine", "config": self.config });
        Checkpoint::new(header, self.store.clone())
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Engine> {
        if ck.header.get("kind").and_then(|k| k.as_str()) != Some("engine") {
            return Err(CoreError::Data("checkpoint is not an engine checkpoint".into()));
        }
        let config: EngineConfig = serde_json::from_value(ck.header["config"].clone())
            .map_err(|e| CoreError::Data(format!("engine header: {e}")))?;
        let net = EngineNet::attach(&ck.store, ENGINE_PREFIX, config.conv_layers)?;
        if !net.has_policy() {
            return Err(CoreError::Data("engine checkpoint lacks a policy head".into()));
        }
        Ok(Engine { config, store: ck.store, net })
    }

    /// Writes the checkpoint and returns its content hash.
    pub fn save(&self, path: &Path) -> Result<String> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: &Path) -> Result<Engine> {
        Engine::from_checkpoint(Checkpoint::load(path)?)
    }

    pub fn model_id(&self) -> Result<String> {
        Ok(self.to_checkpoint().hash()?)
    }

    pub fn evaluate(&self, board: &Board) -> Result<EngineEval> {
        let legal = board.legal_moves();
        if legal.is_empty() {
            return Err(CoreError::Terminal(format!("{:?}", game_status(board))));
        }
        let status = game_status(board);
        if status.is_terminal() {
            return Err(CoreError::Terminal(format!("{status:?}")));
        }
        let mut g = Graph::new(&self.store);
        let state = self.net.board_state(&mut g, board)?;
        let logits = self.net.policy_logits(&mut g, state, &legal)?;
        let v = self.net.win_rate(&mut g, state)?;
        Ok(EngineEval {
            board_state: g.value(state).data().to_vec(),
            probs: functional::softmax(g.value(logits).data()),
            legal,
            win_rate: g.scalar(v),
        })
    }

    /// Board state and side-to-move win rate for any board; finished games
    /// report their exact result instead of the value head.
    pub fn state_and_value(&self, board: &Board) -> Result<(Vec<f64>, f64)> {
        let mut g = Graph::new(&self.store);
        let state = self.net.board_state(&mut g, board)?;
        let v = match terminal_value(game_status(board)) {
            Some(v) => v,
            None => {
                let v: Var = self.net.win_rate(&mut g, state)?;
                g.scalar(v)
            }
        };
        Ok((g.value(state).data().to_vec(), v))
    }

    /// Greedy continuation: up to `horizon` (board after move, move) pairs.
    pub fn rollout(&self, board: &Board, horizon: usize) -> Result<Vec<(Board, Move)>> {
        let mut out = Vec::with_capacity(horizon);
        let mut current = board.clone();
        for _ in 0..horizon {
            if game_status(&current).is_terminal() {
                break;
            }
            let mv = self.evaluate(&current)?.best_move();
            current = current.apply_move(&mv)?;
            out.push((current.clone(), mv));
        }
        Ok(out)
    }

    /// The engine's preferred move other than `actual`.
    pub fn select_alternative(&self, board: &Board, actual: &Move) -> Result<Alternative> {
        let eval = self.evaluate(board)?;
        if !eval.legal.contains(actual) {
            return Err(CoreError::MoveNotLegal { mv: actual.to_uci(), fen: board.to_fen() });
        }
        if eval.legal.len() == 1 {
            return Ok(Alternative { mv: *actual, degenerate: true });
        }
        let mut best: Option<(Move, f64)> = None;
        for (mv, &p) in eval.legal.iter().zip(&eval.probs) {
            if mv != actual && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((*mv, p));
            }
        }
        Ok(Alternative { mv: best.expect("two or more legal moves").0, degenerate: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scc_chess::parse_move_text;

    fn zero_heads() -> Engine {
        Engine::new(EngineConfig { zero_init_heads: true, ..EngineConfig::tiny() }, 1).unwrap()
    }

    #[test]
    fn zero_heads_give_uniform_policy_and_even_value() {
        let e = zero_heads();
        let eval = e.evaluate(&Board::start()).unwrap();
        assert_eq!(eval.legal.len(), 20);
        assert!(eval.probs.iter().all(|&p| (p - 0.05).abs() < 1e-12));
        assert_eq!(eval.win_rate, 0.5);
    }

    #[test]
    fn policy_is_masked_to_legal_moves() {
        let e = Engine::new(EngineConfig::tiny(), 2).unwrap();
        let board = Board::start();
        let eval = e.evaluate(&board).unwrap();
        let dense = eval.dense_policy();
        let legal: Vec<usize> = board.legal_moves().iter().map(move_index).collect();
        let on: f64 = legal.iter().map(|&i| dense[i]).sum();
        assert!((on - 1.0).abs() < 1e-6);
        for (i, &p) in dense.iter().enumerate() {
            if !legal.contains(&i) {
                assert_eq!(p, 0.0);
            }
        }
        assert!(eval.win_rate > 0.0 && eval.win_rate < 1.0);
        assert_eq!(e.evaluate(&board).unwrap(), eval);
    }

    #[test]
    fn terminal_boards_are_rejected_but_have_exact_values() {
        let e = Engine::new(EngineConfig::tiny(), 3).unwrap();
        let mut b = Board::start();
        for m in ["f2f3", "e7e5", "g2g4", "d8h4"] {
            b = b.apply_move(&parse_move_text(&b, m).unwrap()).unwrap();
        }
        assert!(matches!(e.evaluate(&b), Err(CoreError::Terminal(_))));
        assert_eq!(e.state_and_value(&b).unwrap().1, 0.0);
        assert!(e.rollout(&b, 4).unwrap().is_empty());
    }

    #[test]
    fn rollout_is_legal_and_deterministic() {
        let e = Engine::new(EngineConfig::tiny(), 4).unwrap();
        let start = Board::start();
        let a = e.rollout(&start, 4).unwrap();
        assert_eq!(a.len(), 4);
        let mut prev = start;
        for (board, mv) in &a {
            assert_eq!(&prev.apply_move(mv).unwrap(), board);
            prev = board.clone();
        }
        assert_eq!(e.rollout(&Board::start(), 4).unwrap(), a);
    }

    #[test]
    fn alternative_excludes_the_played_move() {
        let e = Engine::new(EngineConfig::tiny(), 5).unwrap();
        let board = Board::start();
        let eval = e.evaluate(&board).unwrap();
        let best = eval.best_move();
        let alt = e.select_alternative(&board, &best).unwrap();
        assert!(!alt.degenerate);
        assert_ne!(alt.mv, best);
        let other = *eval.legal.iter().find(|m| **m != best).unwrap();
        assert_eq!(e.select_alternative(&board, &other).unwrap().mv, best);

        // The rook covers the g-file, leaving Kh7 as the only move.
        let forced = Board::from_fen("7k/8/8/8/8/8/8/K5R1 b - - 0 1").unwrap();
        let only = forced.legal_moves();
        assert_eq!(only.len(), 1);
        let alt = e.select_alternative(&forced, &only[0]).unwrap();
        assert!(alt.degenerate);
        assert_eq!(alt.mv, only[0]);
    }

    #[test]
    fn checkpoint_round_trip_preserves_outputs() {
        let e = Engine::new(EngineConfig::tiny(), 6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ckpt");
        let hash = e.save(&path).unwrap();
        let back = Engine::load(&path).unwrap();
        assert_eq!(back.model_id().unwrap(), hash);
        assert_eq!(back.evaluate(&Board::start()).unwrap(), e.evaluate(&Board::start()).unwrap());
    }
}
