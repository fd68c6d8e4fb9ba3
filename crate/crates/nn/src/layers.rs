//! Parameterised building blocks. Each layer owns parameter ids only; the
//! values live in a [`ParamStore`] and every forward call records onto a
//! [`Graph`].

use rand::Rng;

use crate::error::NnError;
use crate::graph::{Graph, Var};
use crate::param::{ParamId, ParamStore};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, g: &mut Graph, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Relu => g.relu(x),
            Activation::Tanh => g.tanh(x),
            Activation::Sigmoid => g.sigmoid(x),
        }
    }
}

/// `y = W x + b`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub inputs: usize,
    pub outputs: usize,
}

impl Dense {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        outputs: usize,
        bias: bool,
        rng: &mut R,
    ) -> Result<Dense, NnError> {
        let weight = store.add_glorot(&format!("{name}.weight"), &[outputs, inputs], rng)?;
        let bias = if bias { Some(store.add_zeros(&format!("{name}.bias"), &[outputs])?) } else { None };
        Ok(Dense { weight, bias, inputs, outputs })
    }

    /// Re-attaches to parameters already present in `store`.
    pub fn from_store(store: &ParamStore, name: &str) -> Result<Dense, NnError> {
        let weight = store.id(&format!("{name}.weight"))?;
        let bias = store.id(&format!("{name}.bias")).ok();
        let shape = store.value(weight).shape();
        Ok(Dense { weight, bias, inputs: shape[1], outputs: shape[0] })
    }

    pub fn forward(&self, g: &mut Graph, x: Var) -> Result<Var, NnError> {
        let w = g.param(self.weight);
        let y = g.matvec(w, x)?;
        match self.bias {
            Some(b) => {
                let b = g.param(b);
                g.add(y, b)
            }
            None => Ok(y),
        }
    }

    /// Only the requested output rows.
    pub fn forward_rows(&self, g: &mut Graph, x: Var, rows: &[usize]) -> Result<Var, NnError> {
        let w = g.param(self.weight);
        let y = g.matvec_rows(w, x, rows.to_vec())?;
        match self.bias {
            Some(b) => {
                let b = g.param(b);
                let b = g.gather(b, rows.to_vec())?;
                g.add(y, b)
            }
            None => Ok(y),
        }
    }
}

/// 3x3 same-padding convolution.
#[derive(Clone, Debug)]
pub struct Conv2d {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Conv2d {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        rng: &mut R,
    ) -> Result<Conv2d, NnError> {
        let weight = store.add_glorot(&format!("{name}.weight"), &[out_channels, in_channels, 3, 3], rng)?;
        let bias = store.add_zeros(&format!("{name}.bias"), &[out_channels])?;
        Ok(Conv2d { weight, bias })
    }

    pub fn from_store(store: &ParamStore, name: &str) -> Result<Conv2d, NnError> {
        Ok(Conv2d { weight: store.id(&format!("{name}.weight"))?, bias: store.id(&format!("{name}.bias"))? })
    }

    pub fn forward(&self, g: &mut Graph, x: Var) -> Result<Var, NnError> {
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        g.conv2d(x, w, b)
    }
}

/// Lookup table of learned row vectors.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub table: ParamId,
    pub rows: usize,
    pub width: usize,
}

impl Embedding {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        rows: usize,
        width: usize,
        rng: &mut R,
    ) -> Result<Embedding, NnError> {
        let table = store.add_glorot(&format!("{name}.table"), &[rows, width], rng)?;
        Ok(Embedding { table, rows, width })
    }

    pub fn from_store(store: &ParamStore, name: &str) -> Result<Embedding, NnError> {
        let table = store.id(&format!("{name}.table"))?;
        let shape = store.value(table).shape();
        Ok(Embedding { table, rows: shape[0], width: shape[1] })
    }

    pub fn lookup(&self, g: &mut Graph, index: usize) -> Result<Var, NnError> {
        let t = g.param(self.table);
        g.row(t, index)
    }
}

/// Hidden and cell state of an LSTM.
#[derive(Clone, Copy, Debug)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

/// LSTM cell with gates stacked as input, forget, candidate, output.
/// One weight matrix acts on `[x; h]`.
#[derive(Clone, Debug)]
pub struct LstmCell {
    pub weight: ParamId,
    pub bias: ParamId,
    pub inputs: usize,
    pub hidden: usize,
}

impl LstmCell {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Result<LstmCell, NnError> {
        let weight = store.add_glorot(&format!("{name}.weight"), &[4 * hidden, inputs + hidden], rng)?;
        let mut bias = Tensor::zeros(&[4 * hidden]);
        bias.data_mut()[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        let bias = store.add(&format!("{name}.bias"), bias)?;
        Ok(LstmCell { weight, bias, inputs, hidden })
    }

    pub fn from_store(store: &ParamStore, name: &str) -> Result<LstmCell, NnError> {
        let weight = store.id(&format!("{name}.weight"))?;
        let bias = store.id(&format!("{name}.bias"))?;
        let shape = store.value(weight).shape();
        let hidden = shape[0] / 4;
        Ok(LstmCell { weight, bias, inputs: shape[1] - hidden, hidden })
    }

    pub fn zero_state(&self, g: &mut Graph) -> LstmState {
        let h = g.input(Tensor::zeros(&[self.hidden]));
        let c = g.input(Tensor::zeros(&[self.hidden]));
        LstmState { h, c }
    }

    pub fn step(&self, g: &mut Graph, x: Var, state: LstmState) -> Result<LstmState, NnError> {
        let n = self.hidden;
        let xh = g.concat(&[x, state.h])?;
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        let pre = g.matvec(w, xh)?;
        let pre = g.add(pre, b)?;
        let i = g.slice(pre, 0, n)?;
        let f = g.slice(pre, n, n)?;
        let cand = g.slice(pre, 2 * n, n)?;
        let o = g.slice(pre, 3 * n, n)?;
        let i = g.sigmoid(i);
        let f = g.sigmoid(f);
        let cand = g.tanh(cand);
        let o = g.sigmoid(o);
        let keep = g.mul(f, state.c)?;
        let write = g.mul(i, cand)?;
        let c = g.add(keep, write)?;
        let tc = g.tanh(c);
        let h = g.mul(o, tc)?;
        Ok(LstmState { h, c })
    }
}

/// Bidirectional LSTM whose per-position output is a linear projection of
/// the concatenated forward and backward hidden states.
#[derive(Clone, Debug)]
pub struct BiRnn {
    pub forward_cell: LstmCell,
    pub backward_cell: LstmCell,
    pub projection: Dense,
}

impl BiRnn {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Result<BiRnn, NnError> {
        Ok(BiRnn {
            forward_cell: LstmCell::new(store, &format!("{name}.fwd"), inputs, hidden, rng)?,
            backward_cell: LstmCell::new(store, &format!("{name}.bwd"), inputs, hidden, rng)?,
            projection: Dense::new(store, &format!("{name}.proj"), 2 * hidden, hidden, true, rng)?,
        })
    }

    pub fn from_store(store: &ParamStore, name: &str) -> Result<BiRnn, NnError> {
        Ok(BiRnn {
            forward_cell: LstmCell::from_store(store, &format!("{name}.fwd"))?,
            backward_cell: LstmCell::from_store(store, &format!("{name}.bwd"))?,
            projection: Dense::from_store(store, &format!("{name}.proj"))?,
        })
    }

    pub fn width(&self) -> usize {
        self.projection.outputs
    }

    pub fn forward(&self, g: &mut Graph, xs: &[Var]) -> Result<Vec<Var>, NnError> {
        if xs.is_empty() {
            return Err(NnError::InvalidInput("bidirectional encoder needs a nonempty sequence".into()));
        }
        let mut fwd = Vec::with_capacity(xs.len());
        let mut s = self.forward_cell.zero_state(g);
        for &x in xs {
            s = self.forward_cell.step(g, x, s)?;
            fwd.push(s.h);
        }
        let mut bwd = vec![None; xs.len()];
        let mut s = self.backward_cell.zero_state(g);
        for (k, &x) in xs.iter().enumerate().rev() {
            s = self.backward_cell.step(g, x, s)?;
            bwd[k] = Some(s.h);
        }
        fwd.into_iter()
            .zip(bwd)
            .map(|(f, b)| {
                let both = g.concat(&[f, b.expect("filled")])?;
                self.projection.forward(g, both)
            })
            .collect()
    }
}
