use rand::Rng;
use scc_chess::{move_index, Board, Move, MOVE_INDEX_SPACE};
use scc_nn::{Conv2d, Dense, Graph, ParamStore, Var};
use serde::{Deserialize, Serialize};

use super::planes::{encode_planes, PLANES};
use crate::error::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub conv_layers: usize,
    pub filters: usize,
    /// Width of the board-state vector.
    pub state_width: usize,
    /// Zero the policy and value output layers at initialization, giving a
    /// uniform policy and a win rate of exactly 0.5.
    #[serde(default)]
    pub zero_init_heads: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { conv_layers: 4, filters: 64, state_width: 128, zero_init_heads: false }
    }
}

impl EngineConfig {
    /// A very small network for tests and gradient checks.
    pub fn tiny() -> EngineConfig {
        EngineConfig { conv_layers: 1, filters: 3, state_width: 6, zero_init_heads: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_layers == 0 || self.filters == 0 || self.state_width == 0 {
            return Err(CoreError::Config("engine layers, filters and state width must be positive".into()));
        }
        Ok(())
    }
}

/// Parameter handles of the engine network inside some [`ParamStore`]. The
/// same network can live in a standalone engine or inside a commentary
/// model that fine-tunes it.
#[derive(Clone, Debug)]
pub struct EngineNet {
    convs: Vec<Conv2d>,
    state: Dense,
    policy: Option<Dense>,
    value: Dense,
}

impl EngineNet {
    pub fn build<R: Rng>(
        store: &mut ParamStore,
        prefix: &str,
        config: &EngineConfig,
        rng: &mut R,
    ) -> Result<EngineNet> {
        config.validate()?;
        let mut convs = Vec::with_capacity(config.conv_layers);
        let mut channels = PLANES;
        for i in 0..config.conv_layers {
            convs.push(Conv2d::new(store, &format!("{prefix}.conv{i}"), channels, config.filters, rng)?);
            channels = config.filters;
        }
        let state = Dense::new(store, &format!("{prefix}.state"), config.filters * 64, config.state_width, true, rng)?;
        let policy = Dense::new(store, &format!("{prefix}.policy"), config.state_width, MOVE_INDEX_SPACE, true, rng)?;
        let value = Dense::new(store, &format!("{prefix}.value"), config.state_width, 1, true, rng)?;
        if config.zero_init_heads {
            store.value_mut(policy.weight).fill(0.0);
            store.value_mut(value.weight).fill(0.0);
        }
        Ok(EngineNet { convs, state, policy: Some(policy), value })
    }

    /// Finds an engine stored under `prefix`. The policy head is optional.
    pub fn attach(store: &ParamStore, prefix: &str, conv_layers: usize) -> Result<EngineNet> {
        let convs = (0..conv_layers)
            .map(|i| Conv2d::from_store(store, &format!("{prefix}.conv{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let policy = if store.contains(&format!("{prefix}.policy.weight")) {
            Some(Dense::from_store(store, &format!("{prefix}.policy"))?)
        } else {
            None
        };
        Ok(EngineNet {
            convs,
            state: Dense::from_store(store, &format!("{prefix}.state"))?,
            policy,
            value: Dense::from_store(store, &format!("{prefix}.value"))?,
        })
    }

    pub fn has_policy(&self) -> bool {
        self.policy.is_some()
    }

    pub fn state_width(&self) -> usize {
        self.state.outputs
    }

    /// Board-state vector: conv trunk with ReLU, then a dense layer and tanh.
    pub fn board_state(&self, g: &mut Graph, board: &Board) -> Result<Var> {
        let mut x = g.input(encode_planes(board));
        for conv in &self.convs {
            x = conv.forward(g, x)?;
            x = g.relu(x);
        }
        let n = g.value(x).len();
        let flat = g.reshape(x, vec![n])?;
        let s = self.state.forward(g, flat)?;
        Ok(g.tanh(s))
    }

    /// Win rate for the side to move, in (0, 1).
    pub fn win_rate(&self, g: &mut Graph, state: Var) -> Result<Var> {
        let v = self.value.forward(g, state)?;
        Ok(g.sigmoid(v))
    }

    /// Policy logits for `legal`, in that order.
    pub fn policy_logits(&self, g: &mut Graph, state: Var, legal: &[Move]) -> Result<Var> {
        let policy = self.policy.as_ref().ok_or_else(|| CoreError::Config("this network has no policy head".into()))?;
        if legal.is_empty() {
            return Err(CoreError::Empty("legal move list"));
        }
        let rows: Vec<usize> = legal.iter().map(move_index).collect();
        Ok(policy.forward_rows(g, state, &rows)?)
    }
}
