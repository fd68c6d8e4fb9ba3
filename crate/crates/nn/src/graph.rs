//! Reverse-mode tape.
//!
//! A [`Graph`] records every operation applied to its variables. Parameters
//! are read in place from the borrowed [`ParamStore`]; their gradients land
//! in a caller-owned [`Gradients`] buffer on [`Graph::backward`]. Vectors are
//! treated as flat: element-wise ops only require equal element counts.

use crate::error::NnError;
use crate::functional;
use crate::param::{Gradients, ParamId, ParamStore};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    MatVec { w: Var, x: Var },
    MatVecRows { w: Var, x: Var, rows: Vec<usize> },
    Gather { x: Var, idx: Vec<usize> },
    Row { table: Var, index: usize },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Affine { x: Var, scale: f64 },
    ScaleBy { x: Var, s: Var },
    Dot(Var, Var),
    Concat(Vec<Var>),
    Slice { x: Var, start: usize },
    Reshape(Var),
    Tanh(Var),
    Sigmoid(Var),
    Relu(Var),
    Softmax(Var),
    SoftmaxXent { x: Var, probs: Vec<f64>, target: usize },
    Sum(Vec<Var>),
    Square(Var),
    Conv2d { x: Var, w: Var, b: Var },
    WeightedSum { rows: Vec<Var>, weights: Var },
    Pick { x: Var, index: usize },
}

#[derive(Debug)]
struct Node {
    value: Option<Tensor>,
    op: Op,
    needs_grad: bool,
}

pub struct Graph<'a> {
    store: &'a ParamStore,
    nodes: Vec<Node>,
}

fn shape_err(op: &'static str, expected: impl Into<String>, actual: impl Into<String>) -> NnError {
    NnError::Shape { op, expected: expected.into(), actual: actual.into() }
}

impl<'a> Graph<'a> {
    pub fn new(store: &'a ParamStore) -> Graph<'a> {
        Graph { store, nodes: Vec::with_capacity(256) }
    }

    pub fn store(&self) -> &'a ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        let node = &self.nodes[v.0];
        match node.op {
            Op::Param(id) => self.store.value(id),
            _ => node.value.as_ref().expect("non-parameter nodes own their value"),
        }
    }

    fn data(&self, v: Var) -> &[f64] {
        self.value(v).data()
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.data(v)[0]
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node { value: Some(value), op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    /// A constant; no gradient flows into it.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node { value: Some(value), op: Op::Input, needs_grad: false });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, data: Vec<f64>) -> Var {
        self.input(Tensor::vector(data))
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        self.nodes.push(Node { value: None, op: Op::Param(id), needs_grad: true });
        Var(self.nodes.len() - 1)
    }

    pub fn param_by_name(&mut self, name: &str) -> Result<Var, NnError> {
        let id = self.store.id(name)?;
        Ok(self.param(id))
    }

    fn matrix_dims(&self, w: Var, op: &'static str) -> Result<(usize, usize), NnError> {
        match self.value(w).shape() {
            [m, n] => Ok((*m, *n)),
            s => Err(shape_err(op, "2-d weight", format!("{s:?}"))),
        }
    }

    /// `W x` for `W: [m, n]`, `x: [n]`.
    pub fn matvec(&mut self, w: Var, x: Var) -> Result<Var, NnError> {
        let (m, n) = self.matrix_dims(w, "matvec")?;
        let xv = self.data(x);
        if xv.len() != n {
            return Err(shape_err("matvec", format!("input of length {n}"), format!("length {}", xv.len())));
        }
        let wv = self.data(w);
        let out: Vec<f64> = (0..m).map(|i| dot(&wv[i * n..(i + 1) * n], xv)).collect();
        Ok(self.push(Tensor::vector(out), Op::MatVec { w, x }, &[w, x]))
    }

    /// Selected rows of `W x`; only those rows receive gradient.
    pub fn matvec_rows(&mut self, w: Var, x: Var, rows: Vec<usize>) -> Result<Var, NnError> {
        let (m, n) = self.matrix_dims(w, "matvec_rows")?;
        let xv = self.data(x);
        if xv.len() != n {
            return Err(shape_err("matvec_rows", format!("input of length {n}"), format!("length {}", xv.len())));
        }
        if rows.is_empty() || rows.iter().any(|&r| r >= m) {
            return Err(shape_err("matvec_rows", format!("1..={m} row indices below {m}"), format!("{rows:?}")));
        }
        let wv = self.data(w);
        let out: Vec<f64> = rows.iter().map(|&i| dot(&wv[i * n..(i + 1) * n], xv)).collect();
        Ok(self.push(Tensor::vector(out), Op::MatVecRows { w, x, rows }, &[w, x]))
    }

    pub fn gather(&mut self, x: Var, idx: Vec<usize>) -> Result<Var, NnError> {
        let xv = self.data(x);
        if idx.is_empty() || idx.iter().any(|&i| i >= xv.len()) {
            return Err(shape_err("gather", format!("indices below {}", xv.len()), format!("{idx:?}")));
        }
        let out = idx.iter().map(|&i| xv[i]).collect();
        Ok(self.push(Tensor::vector(out), Op::Gather { x, idx }, &[x]))
    }

    /// Row `index` of a `[rows, width]` table (embedding lookup).
    pub fn row(&mut self, table: Var, index: usize) -> Result<Var, NnError> {
        let (m, n) = self.matrix_dims(table, "row")?;
        if index >= m {
            return Err(shape_err("row", format!("index below {m}"), index.to_string()));
        }
        let out = self.data(table)[index * n..(index + 1) * n].to_vec();
        Ok(self.push(Tensor::vector(out), Op::Row { table, index }, &[table]))
    }

    fn same_len(&self, op: &'static str, a: Var, b: Var) -> Result<(), NnError> {
        let (la, lb) = (self.data(a).len(), self.data(b).len());
        if la != lb {
            return Err(shape_err(op, format!("length {la}"), format!("length {lb}")));
        }
        Ok(())
    }

    fn binary(
        &mut self,
        a: Var,
        b: Var,
        op: Op,
        name: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var, NnError> {
        self.same_len(name, a, b)?;
        let out: Vec<f64> = self.data(a).iter().zip(self.data(b)).map(|(&x, &y)| f(x, y)).collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Tensor::new(shape, out)?, op, &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.binary(a, b, Op::Add(a, b), "add", |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.binary(a, b, Op::Sub(a, b), "sub", |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.binary(a, b, Op::Mul(a, b), "mul", |x, y| x * y)
    }

    /// `scale * x + shift`, element-wise, for constants `scale` and `shift`.
    pub fn affine(&mut self, x: Var, scale: f64, shift: f64) -> Var {
        let v = self.value(x);
        let out: Vec<f64> = v.data().iter().map(|&a| scale * a + shift).collect();
        let t = Tensor::new(v.shape().to_vec(), out).expect("same shape");
        self.push(t, Op::Affine { x, scale }, &[x])
    }

    /// Vector times a one-element variable.
    pub fn scale_by(&mut self, x: Var, s: Var) -> Result<Var, NnError> {
        if self.data(s).len() != 1 {
            return Err(shape_err("scale_by", "scalar factor", format!("length {}", self.data(s).len())));
        }
        let k = self.scalar(s);
        let v = self.value(x);
        let t = Tensor::new(v.shape().to_vec(), v.data().iter().map(|a| a * k).collect())?;
        Ok(self.push(t, Op::ScaleBy { x, s }, &[x, s]))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_len("dot", a, b)?;
        let d = dot(self.data(a), self.data(b));
        Ok(self.push(Tensor::scalar(d), Op::Dot(a, b), &[a, b]))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        if parts.is_empty() {
            return Err(shape_err("concat", "at least one part", "none"));
        }
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.data(p));
        }
        Ok(self.push(Tensor::vector(out), Op::Concat(parts.to_vec()), parts))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Result<Var, NnError> {
        let xv = self.data(x);
        if len == 0 || start + len > xv.len() {
            return Err(shape_err("slice", format!("range within {}", xv.len()), format!("{start}..{}", start + len)));
        }
        let out = xv[start..start + len].to_vec();
        Ok(self.push(Tensor::vector(out), Op::Slice { x, start }, &[x]))
    }

    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var, NnError> {
        let t = self.value(x).clone().reshaped(shape)?;
        Ok(self.push(t, Op::Reshape(x), &[x]))
    }

    fn unary(&mut self, x: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let v = self.value(x);
        let t = Tensor::new(v.shape().to_vec(), v.data().iter().map(|&a| f(a)).collect()).expect("same shape");
        self.push(t, op, &[x])
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, Op::Tanh(x), f64::tanh)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, Op::Sigmoid(x), functional::sigmoid)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, Op::Relu(x), |a| a.max(0.0))
    }

    pub fn square(&mut self, x: Var) -> Var {
        self.unary(x, Op::Square(x), |a| a * a)
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let p = functional::softmax(self.data(x));
        self.push(Tensor::vector(p), Op::Softmax(x), &[x])
    }

    /// Cross-entropy `-log softmax(x)[target]` as a one-element variable.
    pub fn softmax_xent(&mut self, x: Var, target: usize) -> Result<Var, NnError> {
        let (probs, loss) = functional::softmax_xent(self.data(x), target)?;
        Ok(self.push(Tensor::scalar(loss), Op::SoftmaxXent { x, probs, target }, &[x]))
    }

    /// Probabilities computed by a `softmax_xent` node.
    pub fn xent_probs(&self, v: Var) -> Option<&[f64]> {
        match &self.nodes[v.0].op {
            Op::SoftmaxXent { probs, .. } => Some(probs),
            _ => None,
        }
    }

    pub fn sum(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        let first = *parts.first().ok_or_else(|| shape_err("sum", "at least one term", "none"))?;
        let mut out = self.data(first).to_vec();
        for &p in &parts[1..] {
            self.same_len("sum", first, p)?;
            for (o, v) in out.iter_mut().zip(self.data(p)) {
                *o += v;
            }
        }
        let shape = self.value(first).shape().to_vec();
        Ok(self.push(Tensor::new(shape, out)?, Op::Sum(parts.to_vec()), parts))
    }

    pub fn mean(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        let s = self.sum(parts)?;
        Ok(self.affine(s, 1.0 / parts.len() as f64, 0.0))
    }

    pub fn pick(&mut self, x: Var, index: usize) -> Result<Var, NnError> {
        let xv = self.data(x);
        if index >= xv.len() {
            return Err(shape_err("pick", format!("index below {}", xv.len()), index.to_string()));
        }
        let v = xv[index];
        Ok(self.push(Tensor::scalar(v), Op::Pick { x, index }, &[x]))
    }

    /// `sum_i weights[i] * rows[i]`.
    pub fn weighted_sum(&mut self, rows: &[Var], weights: Var) -> Result<Var, NnError> {
        let wv = self.data(weights);
        if rows.is_empty() || wv.len() != rows.len() {
            return Err(shape_err("weighted_sum", format!("{} weights", rows.len()), format!("{}", wv.len())));
        }
        let width = self.data(rows[0]).len();
        let mut out = vec![0.0; width];
        for (i, &r) in rows.iter().enumerate() {
            let rv = self.data(r);
            if rv.len() != width {
                return Err(shape_err("weighted_sum", format!("rows of width {width}"), format!("{}", rv.len())));
            }
            let w = self.data(weights)[i];
            for (o, v) in out.iter_mut().zip(rv) {
                *o += w * v;
            }
        }
        let mut inputs = rows.to_vec();
        inputs.push(weights);
        Ok(self.push(Tensor::vector(out), Op::WeightedSum { rows: rows.to_vec(), weights }, &inputs))
    }

    /// 3x3 convolution, stride 1, zero padding 1: `x: [C, H, W]`,
    /// `w: [C', C, 3, 3]`, `b: [C']` -> `[C', H, W]`.
    pub fn conv2d(&mut self, x: Var, w: Var, b: Var) -> Result<Var, NnError> {
        let (c_in, h, wd) = match self.value(x).shape() {
            [c, h, w] => (*c, *h, *w),
            s => return Err(shape_err("conv2d", "input [C, H, W]", format!("{s:?}"))),
        };
        let c_out = match self.value(w).shape() {
            [co, ci, 3, 3] if *ci == c_in => *co,
            s => return Err(shape_err("conv2d", format!("weights [C', {c_in}, 3, 3]"), format!("{s:?}"))),
        };
        if self.value(b).shape() != [c_out] {
            return Err(shape_err("conv2d", format!("bias [{c_out}]"), format!("{:?}", self.value(b).shape())));
        }
        let out = conv2d_forward(self.data(x), self.data(w), self.data(b), c_in, c_out, h, wd);
        Ok(self.push(Tensor::new(vec![c_out, h, wd], out)?, Op::Conv2d { x, w, b }, &[x, w, b]))
    }

    /// Accumulates d(loss)/d(param) into `grads`. `loss` must hold one value.
    pub fn backward(&self, loss: Var, grads: &mut Gradients) -> Result<(), NnError> {
        if self.data(loss).len() != 1 {
            return Err(shape_err("backward", "scalar loss", format!("length {}", self.data(loss).len())));
        }
        let mut node_grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        node_grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let Some(g) = node_grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let mut acc = Accumulator { graph: self, node_grads: &mut node_grads, grads };
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    let slot = acc.grads.slot(*id, self.store.value(*id).shape());
                    add_into(slot, &g);
                }
                Op::MatVec { w, x } => {
                    let (m, n) = self.matrix_dims(*w, "matvec")?;
                    let (wv, xv) = (self.data(*w), self.data(*x));
                    if let Some(gx) = acc.slot(*x) {
                        for i in 0..m {
                            axpy(g[i], &wv[i * n..(i + 1) * n], gx);
                        }
                    }
                    if let Some(gw) = acc.slot(*w) {
                        for i in 0..m {
                            axpy(g[i], xv, &mut gw[i * n..(i + 1) * n]);
                        }
                    }
                }
                Op::MatVecRows { w, x, rows } => {
                    let (_, n) = self.matrix_dims(*w, "matvec_rows")?;
                    let (wv, xv) = (self.data(*w), self.data(*x));
                    if let Some(gx) = acc.slot(*x) {
                        for (k, &r) in rows.iter().enumerate() {
                            axpy(g[k], &wv[r * n..(r + 1) * n], gx);
                        }
                    }
                    if let Some(gw) = acc.slot(*w) {
                        for (k, &r) in rows.iter().enumerate() {
                            axpy(g[k], xv, &mut gw[r * n..(r + 1) * n]);
                        }
                    }
                }
                Op::Gather { x, idx } => {
                    if let Some(gx) = acc.slot(*x) {
                        for (k, &j) in idx.iter().enumerate() {
                            gx[j] += g[k];
                        }
                    }
                }
                Op::Row { table, index } => {
                    let n = g.len();
                    if let Some(gt) = acc.slot(*table) {
                        add_into(&mut gt[index * n..(index + 1) * n], &g);
                    }
                }
                Op::Add(a, b) => {
                    if let Some(ga) = acc.slot(*a) {
                        add_into(ga, &g);
                    }
                    if let Some(gb) = acc.slot(*b) {
                        add_into(gb, &g);
                    }
                }
                Op::Sub(a, b) => {
                    if let Some(ga) = acc.slot(*a) {
                        add_into(ga, &g);
                    }
                    if let Some(gb) = acc.slot(*b) {
                        axpy(-1.0, &g, gb);
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.data(*a), self.data(*b));
                    if let Some(ga) = acc.slot(*a) {
                        for k in 0..g.len() {
                            ga[k] += g[k] * bv[k];
                        }
                    }
                    if let Some(gb) = acc.slot(*b) {
                        for k in 0..g.len() {
                            gb[k] += g[k] * av[k];
                        }
                    }
                }
                Op::Affine { x, scale } => {
                    if let Some(gx) = acc.slot(*x) {
                        axpy(*scale, &g, gx);
                    }
                }
                Op::ScaleBy { x, s } => {
                    let k = self.scalar(*s);
                    let xv = self.data(*x);
                    if let Some(gx) = acc.slot(*x) {
                        axpy(k, &g, gx);
                    }
                    if let Some(gs) = acc.slot(*s) {
                        gs[0] += dot(&g, xv);
                    }
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (self.data(*a), self.data(*b));
                    if let Some(ga) = acc.slot(*a) {
                        axpy(g[0], bv, ga);
                    }
                    if let Some(gb) = acc.slot(*b) {
                        axpy(g[0], av, gb);
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = self.data(p).len();
                        if let Some(gp) = acc.slot(p) {
                            add_into(gp, &g[offset..offset + n]);
                        }
                        offset += n;
                    }
                }
                Op::Slice { x, start } => {
                    if let Some(gx) = acc.slot(*x) {
                        add_into(&mut gx[*start..*start + g.len()], &g);
                    }
                }
                Op::Reshape(x) => {
                    if let Some(gx) = acc.slot(*x) {
                        add_into(gx, &g);
                    }
                }
                Op::Tanh(x) => {
                    let y = node.value.as_ref().expect("owned").data();
                    if let Some(gx) = acc.slot(*x) {
                        for k in 0..g.len() {
                            gx[k] += g[k] * (1.0 - y[k] * y[k]);
                        }
                    }
                }
                Op::Sigmoid(x) => {
                    let y = node.value.as_ref().expect("owned").data();
                    if let Some(gx) = acc.slot(*x) {
                        for k in 0..g.len() {
                            gx[k] += g[k] * y[k] * (1.0 - y[k]);
                        }
                    }
                }
                Op::Relu(x) => {
                    let xv = self.data(*x);
                    if let Some(gx) = acc.slot(*x) {
                        for k in 0..g.len() {
                            if xv[k] > 0.0 {
                                gx[k] += g[k];
                            }
                        }
                    }
                }
                Op::Square(x) => {
                    let xv = self.data(*x);
                    if let Some(gx) = acc.slot(*x) {
                        for k in 0..g.len() {
                            gx[k] += 2.0 * xv[k] * g[k];
                        }
                    }
                }
                Op::Softmax(x) => {
                    let y = node.value.as_ref().expect("owned").data();
                    let gy = dot(&g, y);
                    if let Some(gx) = acc.slot(*x) {
                        for k in 0..g.len() {
                            gx[k] += y[k] * (g[k] - gy);
                        }
                    }
                }
                Op::SoftmaxXent { x, probs, target } => {
                    if let Some(gx) = acc.slot(*x) {
                        axpy(g[0], probs, gx);
                        gx[*target] -= g[0];
                    }
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        if let Some(gp) = acc.slot(p) {
                            add_into(gp, &g);
                        }
                    }
                }
                Op::Pick { x, index } => {
                    if let Some(gx) = acc.slot(*x) {
                        gx[*index] += g[0];
                    }
                }
                Op::WeightedSum { rows, weights } => {
                    let wv = self.data(*weights).to_vec();
                    for (k, &r) in rows.iter().enumerate() {
                        if let Some(gr) = acc.slot(r) {
                            axpy(wv[k], &g, gr);
                        }
                    }
                    let row_dots: Vec<f64> = rows.iter().map(|&r| dot(self.data(r), &g)).collect();
                    if let Some(gw) = acc.slot(*weights) {
                        add_into(gw, &row_dots);
                    }
                }
                Op::Conv2d { x, w, b } => {
                    let [c_in, h, wd] = self.value(*x).shape() else { unreachable!() };
                    let (c_in, h, wd) = (*c_in, *h, *wd);
                    let c_out = self.value(*w).shape()[0];
                    let (xv, wv) = (self.data(*x), self.data(*w));
                    if let Some(gx) = acc.slot(*x) {
                        conv2d_grad_input(&g, wv, gx, c_in, c_out, h, wd);
                    }
                    if let Some(gw) = acc.slot(*w) {
                        conv2d_grad_weight(&g, xv, gw, c_in, c_out, h, wd);
                    }
                    if let Some(gb) = acc.slot(*b) {
                        let plane = h * wd;
                        for co in 0..c_out {
                            gb[co] += g[co * plane..(co + 1) * plane].iter().sum::<f64>();
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

struct Accumulator<'g, 's> {
    graph: &'g Graph<'s>,
    node_grads: &'g mut Vec<Option<Vec<f64>>>,
    grads: &'g mut Gradients,
}

impl Accumulator<'_, '_> {
    /// Gradient buffer for `v`, or `None` when nothing upstream needs it.
    /// Parameter nodes write straight into the parameter gradient.
    fn slot(&mut self, v: Var) -> Option<&mut [f64]> {
        let node = &self.graph.nodes[v.0];
        if !node.needs_grad {
            return None;
        }
        if let Op::Param(id) = node.op {
            let shape = self.graph.store.value(id).shape();
            return Some(self.grads.slot(id, shape));
        }
        let n = self.graph.value(v).len();
        Some(self.node_grads[v.0].get_or_insert_with(|| vec![0.0; n]).as_mut_slice())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn add_into(y: &mut [f64], x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi;
    }
}

/// Valid output/input index ranges along one axis for kernel offset `d`.
#[inline]
fn span(len: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (len as isize - d).min(len as isize).max(0) as usize;
    (lo, hi)
}

fn conv2d_forward(x: &[f64], w: &[f64], b: &[f64], c_in: usize, c_out: usize, h: usize, wd: usize) -> Vec<f64> {
    let plane = h * wd;
    let mut y = vec![0.0; c_out * plane];
    for co in 0..c_out {
        let yp = &mut y[co * plane..(co + 1) * plane];
        yp.iter_mut().for_each(|v| *v = b[co]);
        for ci in 0..c_in {
            let xp = &x[ci * plane..(ci + 1) * plane];
            let wk = &w[(co * c_in + ci) * 9..(co * c_in + ci) * 9 + 9];
            for ky in 0..3 {
                let dy = ky as isize - 1;
                let (oy0, oy1) = span(h, dy);
                for kx in 0..3 {
                    let dx = kx as isize - 1;
                    let (ox0, ox1) = span(wd, dx);
                    let k = wk[ky * 3 + kx];
                    if k == 0.0 {
                        continue;
                    }
                    for oy in oy0..oy1 {
                        let iy = (oy as isize + dy) as usize;
                        let ix0 = (ox0 as isize + dx) as usize;
                        let n = ox1 - ox0;
                        axpy(k, &xp[iy * wd + ix0..iy * wd + ix0 + n], &mut yp[oy * wd + ox0..oy * wd + ox0 + n]);
                    }
                }
            }
        }
    }
    y
}

fn conv2d_grad_input(g: &[f64], w: &[f64], gx: &mut [f64], c_in: usize, c_out: usize, h: usize, wd: usize) {
    let plane = h * wd;
    for co in 0..c_out {
        let gp = &g[co * plane..(co + 1) * plane];
        for ci in 0..c_in {
            let wk = &w[(co * c_in + ci) * 9..(co * c_in + ci) * 9 + 9];
            let gxp = &mut gx[ci * plane..(ci + 1) * plane];
            for ky in 0..3 {
                let dy = ky as isize - 1;
                let (oy0, oy1) = span(h, dy);
                for kx in 0..3 {
                    let dx = kx as isize - 1;
                    let (ox0, ox1) = span(wd, dx);
                    let k = wk[ky * 3 + kx];
                    for oy in oy0..oy1 {
                        let iy = (oy as isize + dy) as usize;
                        let ix0 = (ox0 as isize + dx) as usize;
                        let n = ox1 - ox0;
                        axpy(k, &gp[oy * wd + ox0..oy * wd + ox0 + n], &mut gxp[iy * wd + ix0..iy * wd + ix0 + n]);
                    }
                }
            }
        }
    }
}

fn conv2d_grad_weight(g: &[f64], x: &[f64], gw: &mut [f64], c_in: usize, c_out: usize, h: usize, wd: usize) {
    let plane = h * wd;
    for co in 0..c_out {
        let gp = &g[co * plane..(co + 1) * plane];
        for ci in 0..c_in {
            let xp = &x[ci * plane..(ci + 1) * plane];
            let base = (co * c_in + ci) * 9;
            for ky in 0..3 {
                let dy = ky as isize - 1;
                let (oy0, oy1) = span(h, dy);
                for kx in 0..3 {
                    let dx = kx as isize - 1;
                    let (ox0, ox1) = span(wd, dx);
                    let mut acc = 0.0;
                    for oy in oy0..oy1 {
                        let iy = (oy as isize + dy) as usize;
                        let ix0 = (ox0 as isize + dx) as usize;
                        let n = ox1 - ox0;
                        acc += dot(&gp[oy * wd + ox0..oy * wd + ox0 + n], &xp[iy * wd + ix0..iy * wd + ix0 + n]);
                    }
                    gw[base + ky * 3 + kx] += acc;
                }
            }
        }
    }
}
