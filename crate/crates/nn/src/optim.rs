use std::collections::HashSet;

use crate::error::NnError;
use crate::param::{ParamId, ParamStore};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// Global L2 norm cap applied to the joint gradient before the update.
    pub clip_norm: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::adam(1e-3)
    }
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64) -> OptimizerConfig {
        OptimizerConfig {
            kind: OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 },
            learning_rate,
            clip_norm: Some(5.0),
        }
    }

    pub fn sgd(learning_rate: f64, momentum: f64) -> OptimizerConfig {
        OptimizerConfig { kind: OptimizerKind::SgdMomentum { momentum }, learning_rate, clip_norm: Some(5.0) }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NnError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if let Some(c) = self.clip_norm {
            if !(c.is_finite() && c > 0.0) {
                return Err(NnError::Config(format!("clip norm must be positive, got {c}")));
            }
        }
        match self.kind {
            OptimizerKind::SgdMomentum { momentum } if !(0.0..1.0).contains(&momentum) => {
                Err(NnError::Config(format!("momentum must be in [0, 1), got {momentum}")))
            }
            OptimizerKind::Adam { beta1, beta2, eps }
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || eps <= 0.0 =>
            {
                Err(NnError::Config("adam betas must be in [0, 1) and eps positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Gradient summary of one update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub grad_norm: f64,
    pub clipped: bool,
}

#[derive(Clone, Debug)]
pub struct Optimizer {
    config: OptimizerConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: u64,
    frozen: HashSet<ParamId>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Optimizer, NnError> {
        config.validate()?;
        Ok(Optimizer { config, first: Vec::new(), second: Vec::new(), steps: 0, frozen: HashSet::new() })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Parameters excluded from updates (their gradients are still cleared).
    pub fn freeze(&mut self, ids: impl IntoIterator<Item = ParamId>) {
        self.frozen.extend(ids);
    }

    pub fn is_frozen(&self, id: ParamId) -> bool {
        self.frozen.contains(&id)
    }

    /// Clips, updates and zeroes the gradients held in `store`.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<StepStats, NnError> {
        for (id, p) in store.iter() {
            if !self.frozen.contains(&id) && !p.grad.is_finite() {
                return Err(NnError::NonFinite(format!("gradient of {}", p.name)));
            }
        }
        let norm_sq: f64 =
            store.iter().filter(|(id, _)| !self.frozen.contains(id)).map(|(_, p)| p.grad.norm_sq()).sum();
        let grad_norm = norm_sq.sqrt();
        let (scale, clipped) = match self.config.clip_norm {
            Some(c) if grad_norm > c => (c / grad_norm, true),
            _ => (1.0, false),
        };
        if self.first.len() != store.len() {
            self.first = store.iter().map(|(_, p)| vec![0.0; p.value.len()]).collect();
            self.second = self.first.clone();
        }
        self.steps += 1;
        let lr = self.config.learning_rate;
        let t = self.steps as i32;
        for (id, p) in store.iter_mut() {
            if self.frozen.contains(&id) {
                continue;
            }
            let m = &mut self.first[id.index()];
            let grad = p.grad.data();
            let value = p.value.data_mut();
            match self.config.kind {
                OptimizerKind::SgdMomentum { momentum } => {
                    for k in 0..value.len() {
                        m[k] = momentum * m[k] + scale * grad[k];
                        value[k] -= lr * m[k];
                    }
                }
                OptimizerKind::Adam { beta1, beta2, eps } => {
                    let v = &mut self.second[id.index()];
                    let c1 = 1.0 - beta1.powi(t);
                    let c2 = 1.0 - beta2.powi(t);
                    for k in 0..value.len() {
                        let gk = scale * grad[k];
                        m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                        v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                        value[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                    }
                }
            }
        }
        store.zero_grads();
        Ok(StepStats { grad_norm, clipped })
    }
}
