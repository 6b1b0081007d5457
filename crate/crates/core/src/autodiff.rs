//! Reverse-mode automatic differentiation over [`Tensor`] values.
//!
//! A [`Graph`] is an append-only arena of nodes. Operations record their
//! provenance at construction, so node ids are already in topological
//! order and [`Graph::backward`] is a single reverse sweep. Gradients
//! accumulate additively across fan-out.

use rand::Rng;
use thiserror::Error;

use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("{op}: invalid argument: {msg}")]
    InvalidArgument { op: &'static str, msg: String },
    #[error("backward requires a scalar loss, got {0}x{1}")]
    NonScalarLoss(usize, usize),
}

fn shape_err(op: &'static str, lhs: &Tensor, rhs: &Tensor) -> TensorError {
    TensorError::ShapeMismatch {
        op,
        lhs: lhs.shape(),
        rhs: rhs.shape(),
    }
}

fn invalid(op: &'static str, msg: impl Into<String>) -> TensorError {
    TensorError::InvalidArgument { op, msg: msg.into() }
}

/// Axis of a 2-D tensor: `Rows` is axis 0, `Cols` is axis 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

enum Op {
    Input,
    Add(NodeId, NodeId),
    /// Matrix plus a row vector added to every row.
    AddBias(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    MatMul(NodeId, NodeId),
    Concat(Axis, Vec<NodeId>),
    SliceRows(NodeId, usize, usize),
    SliceCols(NodeId, usize, usize),
    Reshape(NodeId),
    EmbeddingLookup(NodeId, Vec<usize>),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    Softmax(NodeId, Axis),
    /// Argmax indices along the reduced axis, recorded at forward time.
    MaxOverAxis(NodeId, Axis, Vec<usize>),
    /// Mask already includes the inverted-dropout scaling.
    Dropout(NodeId, Tensor),
    Conv1d {
        input: NodeId,
        filters: NodeId,
        window: usize,
    },
    CrossEntropy {
        logits: NodeId,
        targets: Vec<usize>,
    },
    SumAll(NodeId),
}

struct NodeData {
    value: Tensor,
    grad: Option<Tensor>,
    needs_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<NodeData>,
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A constant leaf; no gradient flows into it.
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(value, false, Op::Input)
    }

    /// A trainable leaf; `backward` populates its gradient.
    pub fn param(&mut self, value: Tensor) -> NodeId {
        self.push(value, true, Op::Input)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: NodeId) -> Option<&Tensor> {
        self.nodes[id.0].grad.as_ref()
    }

    fn push(&mut self, value: Tensor, needs_grad: bool, op: Op) -> NodeId {
        self.nodes.push(NodeData {
            value,
            grad: None,
            needs_grad,
            op,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor, op: Op) -> NodeId {
        let needs = match &op {
            Op::Input => false,
            Op::Add(a, b) | Op::AddBias(a, b) | Op::Mul(a, b) | Op::MatMul(a, b) => {
                self.needs(*a) || self.needs(*b)
            }
            Op::Concat(_, parts) => parts.iter().any(|p| self.needs(*p)),
            Op::Conv1d { input, filters, .. } => self.needs(*input) || self.needs(*filters),
            Op::Scale(a, _)
            | Op::SliceRows(a, _, _)
            | Op::SliceCols(a, _, _)
            | Op::Reshape(a)
            | Op::EmbeddingLookup(a, _)
            | Op::Sigmoid(a)
            | Op::Tanh(a)
            | Op::Relu(a)
            | Op::Softmax(a, _)
            | Op::MaxOverAxis(a, _, _)
            | Op::Dropout(a, _)
            | Op::CrossEntropy { logits: a, .. }
            | Op::SumAll(a) => self.needs(*a),
        };
        self.push(value, needs, op)
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    // ---- forward ops ----

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("add", va, vb));
        }
        let mut out = va.clone();
        out.add_scaled(vb, 1.0);
        Ok(self.push_op(out, Op::Add(a, b)))
    }

    /// `m + bias` where `bias` is a `1 x cols` row added to every row of `m`.
    pub fn add_bias(&mut self, m: NodeId, bias: NodeId) -> Result<NodeId, TensorError> {
        let (vm, vb) = (self.value(m), self.value(bias));
        if vb.rows() != 1 || vb.cols() != vm.cols() {
            return Err(shape_err("add_bias", vm, vb));
        }
        let mut out = vm.clone();
        for r in 0..out.rows() {
            for c in 0..out.cols() {
                let v = out.get(r, c) + vb.get(0, c);
                out.set(r, c, v);
            }
        }
        Ok(self.push_op(out, Op::AddBias(m, bias)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("mul", va, vb));
        }
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let out = Tensor::from_vec(va.rows(), va.cols(), data);
        Ok(self.push_op(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let out = self.value(a).map(|v| v * k);
        self.push_op(out, Op::Scale(a, k))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.cols() != vb.rows() {
            return Err(shape_err("matmul", va, vb));
        }
        let out = matmul_plain(va, vb);
        Ok(self.push_op(out, Op::MatMul(a, b)))
    }

    pub fn concat(&mut self, axis: Axis, parts: &[NodeId]) -> Result<NodeId, TensorError> {
        if parts.is_empty() {
            return Err(invalid("concat", "no parts"));
        }
        let first = self.value(parts[0]).shape();
        let out = match axis {
            Axis::Cols => {
                let rows = first.0;
                let mut cols = 0;
                for &p in parts {
                    let v = self.value(p);
                    if v.rows() != rows {
                        return Err(shape_err("concat", self.value(parts[0]), v));
                    }
                    cols += v.cols();
                }
                let mut out = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let mut at = 0;
                    for &p in parts {
                        let v = self.value(p);
                        out.row_mut(r)[at..at + v.cols()].copy_from_slice(v.row(r));
                        at += v.cols();
                    }
                }
                out
            }
            Axis::Rows => {
                let cols = first.1;
                let mut rows = 0;
                for &p in parts {
                    let v = self.value(p);
                    if v.cols() != cols {
                        return Err(shape_err("concat", self.value(parts[0]), v));
                    }
                    rows += v.rows();
                }
                let mut data = Vec::with_capacity(rows * cols);
                for &p in parts {
                    data.extend_from_slice(self.value(p).data());
                }
                Tensor::from_vec(rows, cols, data)
            }
        };
        Ok(self.push_op(out, Op::Concat(axis, parts.to_vec())))
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, end: usize) -> Result<NodeId, TensorError> {
        let v = self.value(a);
        if start >= end || end > v.rows() {
            return Err(invalid(
                "slice_rows",
                format!("range {}..{} out of {} rows", start, end, v.rows()),
            ));
        }
        let cols = v.cols();
        let data = v.data()[start * cols..end * cols].to_vec();
        let out = Tensor::from_vec(end - start, cols, data);
        Ok(self.push_op(out, Op::SliceRows(a, start, end)))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, end: usize) -> Result<NodeId, TensorError> {
        let v = self.value(a);
        if start >= end || end > v.cols() {
            return Err(invalid(
                "slice_cols",
                format!("range {}..{} out of {} cols", start, end, v.cols()),
            ));
        }
        let mut out = Tensor::zeros(v.rows(), end - start);
        for r in 0..v.rows() {
            out.row_mut(r).copy_from_slice(&v.row(r)[start..end]);
        }
        Ok(self.push_op(out, Op::SliceCols(a, start, end)))
    }

    /// Reinterpret the row-major data under a new shape of equal size.
    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> Result<NodeId, TensorError> {
        let v = self.value(a);
        if rows * cols != v.len() {
            return Err(invalid(
                "reshape",
                format!("cannot view {:?} as {}x{}", v.shape(), rows, cols),
            ));
        }
        let out = Tensor::from_vec(rows, cols, v.data().to_vec());
        Ok(self.push_op(out, Op::Reshape(a)))
    }

    /// Gather rows of `table` at `indices`; output is `indices.len() x dim`.
    pub fn embedding_lookup(
        &mut self,
        table: NodeId,
        indices: &[usize],
    ) -> Result<NodeId, TensorError> {
        let v = self.value(table);
        for &i in indices {
            if i >= v.rows() {
                return Err(invalid(
                    "embedding_lookup",
                    format!("index {} out of {} rows", i, v.rows()),
                ));
            }
        }
        let mut out = Tensor::zeros(indices.len(), v.cols());
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).copy_from_slice(v.row(i));
        }
        Ok(self.push_op(out, Op::EmbeddingLookup(table, indices.to_vec())))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(sigmoid);
        self.push_op(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::tanh);
        self.push_op(out, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(|v| if v > 0.0 { v } else { 0.0 });
        self.push_op(out, Op::Relu(a))
    }

    /// Softmax normalizing along `axis` (per row for `Axis::Cols`).
    pub fn softmax(&mut self, a: NodeId, axis: Axis) -> NodeId {
        let v = self.value(a);
        let out = match axis {
            Axis::Cols => {
                let mut out = v.clone();
                for r in 0..out.rows() {
                    softmax_slice(out.row_mut(r));
                }
                out
            }
            Axis::Rows => {
                let mut out = v.clone();
                for c in 0..out.cols() {
                    let mut col: Vec<f64> = (0..out.rows()).map(|r| out.get(r, c)).collect();
                    softmax_slice(&mut col);
                    for (r, val) in col.into_iter().enumerate() {
                        out.set(r, c, val);
                    }
                }
                out
            }
        };
        self.push_op(out, Op::Softmax(a, axis))
    }

    /// Maximum along `axis`; `Axis::Rows` reduces an `n x c` tensor to `1 x c`.
    pub fn max_over_axis(&mut self, a: NodeId, axis: Axis) -> NodeId {
        let v = self.value(a);
        let (out, argmax) = match axis {
            Axis::Rows => {
                let mut out = Tensor::zeros(1, v.cols());
                let mut arg = vec![0usize; v.cols()];
                for c in 0..v.cols() {
                    let mut best = v.get(0, c);
                    let mut best_r = 0;
                    for r in 1..v.rows() {
                        if v.get(r, c) > best {
                            best = v.get(r, c);
                            best_r = r;
                        }
                    }
                    out.set(0, c, best);
                    arg[c] = best_r;
                }
                (out, arg)
            }
            Axis::Cols => {
                let mut out = Tensor::zeros(v.rows(), 1);
                let mut arg = vec![0usize; v.rows()];
                for r in 0..v.rows() {
                    let row = v.row(r);
                    let mut best = row[0];
                    let mut best_c = 0;
                    for (c, &val) in row.iter().enumerate().skip(1) {
                        if val > best {
                            best = val;
                            best_c = c;
                        }
                    }
                    out.set(r, 0, best);
                    arg[r] = best_c;
                }
                (out, arg)
            }
        };
        self.push_op(out, Op::MaxOverAxis(a, axis, argmax))
    }

    /// Inverted dropout: kept entries are scaled by `1/(1-rate)`.
    /// `rate == 0` is the identity.
    pub fn dropout<R: Rng>(
        &mut self,
        a: NodeId,
        rate: f64,
        rng: &mut R,
    ) -> Result<NodeId, TensorError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(invalid("dropout", format!("rate {} not in [0,1)", rate)));
        }
        if rate == 0.0 {
            return Ok(a);
        }
        let v = self.value(a);
        let keep = 1.0 / (1.0 - rate);
        let mask = Tensor::from_vec(
            v.rows(),
            v.cols(),
            (0..v.len())
                .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
                .collect(),
        );
        self.apply_mask(a, mask)
    }

    /// Multiply by a fixed externally-sampled mask (variational dropout).
    pub fn apply_mask(&mut self, a: NodeId, mask: Tensor) -> Result<NodeId, TensorError> {
        let v = self.value(a);
        if v.shape() != mask.shape() {
            return Err(shape_err("dropout", v, &mask));
        }
        let data = v
            .data()
            .iter()
            .zip(mask.data())
            .map(|(x, m)| x * m)
            .collect();
        let out = Tensor::from_vec(v.rows(), v.cols(), data);
        Ok(self.push_op(out, Op::Dropout(a, mask)))
    }

    /// 1-D convolution over rows: input `n x d`, filters `(window*d) x f`,
    /// output `(n-window+1) x f`. Window `p` is rows `p..p+window` flattened.
    pub fn conv1d(
        &mut self,
        input: NodeId,
        filters: NodeId,
        window: usize,
    ) -> Result<NodeId, TensorError> {
        let (vi, vf) = (self.value(input), self.value(filters));
        if window == 0 || vi.rows() < window {
            return Err(invalid(
                "conv1d",
                format!("window {} over {} rows", window, vi.rows()),
            ));
        }
        if vf.rows() != window * vi.cols() {
            return Err(shape_err("conv1d", vi, vf));
        }
        let positions = vi.rows() - window + 1;
        let d = vi.cols();
        let f = vf.cols();
        let mut out = Tensor::zeros(positions, f);
        for p in 0..positions {
            for w in 0..window {
                let row = vi.row(p + w);
                for (k, &x) in row.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let frow = vf.row(w * d + k);
                    let orow = out.row_mut(p);
                    for (o, &fw) in orow.iter_mut().zip(frow.iter()) {
                        *o += x * fw;
                    }
                }
            }
        }
        Ok(self.push_op(out, Op::Conv1d { input, filters, window }))
    }

    /// Per-row negative log-likelihood: output `n x 1` where row `i` is
    /// `logsumexp(logits[i]) - logits[i][targets[i]]`.
    pub fn cross_entropy(
        &mut self,
        logits: NodeId,
        targets: &[usize],
    ) -> Result<NodeId, TensorError> {
        let v = self.value(logits);
        if targets.len() != v.rows() {
            return Err(invalid(
                "cross_entropy",
                format!("{} targets for {} rows", targets.len(), v.rows()),
            ));
        }
        for &t in targets {
            if t >= v.cols() {
                return Err(invalid(
                    "cross_entropy",
                    format!("target {} out of {} classes", t, v.cols()),
                ));
            }
        }
        let mut out = Tensor::zeros(v.rows(), 1);
        for r in 0..v.rows() {
            let row = v.row(r);
            out.set(r, 0, log_sum_exp(row) - row[targets[r]]);
        }
        Ok(self.push_op(
            out,
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
            },
        ))
    }

    /// Sum of all entries, as a `1 x 1` scalar.
    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let total: f64 = self.value(a).data().iter().sum();
        self.push_op(Tensor::scalar(total), Op::SumAll(a))
    }

    /// Mean of all entries, as a `1 x 1` scalar.
    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let n = self.value(a).len() as f64;
        let s = self.sum_all(a);
        self.scale(s, 1.0 / n)
    }

    // ---- backward ----

    /// Populate gradients of every grad-requiring node reachable from `loss`.
    pub fn backward(&mut self, loss: NodeId) -> Result<(), TensorError> {
        let v = self.value(loss);
        if !v.is_scalar() {
            return Err(TensorError::NonScalarLoss(v.rows(), v.cols()));
        }
        self.nodes[loss.0].grad = Some(Tensor::scalar(1.0));
        for i in (0..=loss.0).rev() {
            if self.nodes[i].grad.is_none() || !self.nodes[i].needs_grad {
                continue;
            }
            self.step_backward(i);
        }
        Ok(())
    }

    /// Drop gradients, keeping values. Parameters keep their node ids.
    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    fn add_grad(&mut self, id: NodeId, delta: &Tensor) {
        if !self.nodes[id.0].needs_grad {
            return;
        }
        let shape = self.nodes[id.0].value.shape();
        let grad = self.nodes[id.0]
            .grad
            .get_or_insert_with(|| Tensor::zeros(shape.0, shape.1));
        grad.add_scaled(delta, 1.0);
    }

    fn step_backward(&mut self, i: usize) {
        let g = self.nodes[i].grad.clone().expect("grad present");
        // Ops own their input ids; clone out what the match needs.
        match &self.nodes[i].op {
            Op::Input => {}
            Op::Add(a, b) => {
                let (a, b) = (*a, *b);
                self.add_grad(a, &g);
                self.add_grad(b, &g);
            }
            Op::AddBias(m, bias) => {
                let (m, bias) = (*m, *bias);
                self.add_grad(m, &g);
                let mut db = Tensor::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for c in 0..g.cols() {
                        let v = db.get(0, c) + g.get(r, c);
                        db.set(0, c, v);
                    }
                }
                self.add_grad(bias, &db);
            }
            Op::Mul(a, b) => {
                let (a, b) = (*a, *b);
                let da = elementwise_product(&g, self.value(b));
                let db = elementwise_product(&g, self.value(a));
                self.add_grad(a, &da);
                self.add_grad(b, &db);
            }
            Op::Scale(a, k) => {
                let (a, k) = (*a, *k);
                let mut da = g.clone();
                da.scale_in_place(k);
                self.add_grad(a, &da);
            }
            Op::MatMul(a, b) => {
                let (a, b) = (*a, *b);
                let da = matmul_nt(&g, self.value(b));
                let db = matmul_tn(self.value(a), &g);
                self.add_grad(a, &da);
                self.add_grad(b, &db);
            }
            Op::Concat(axis, parts) => {
                let axis = *axis;
                let parts = parts.clone();
                match axis {
                    Axis::Cols => {
                        let mut at = 0;
                        for p in parts {
                            let (rows, cols) = self.value(p).shape();
                            let mut dp = Tensor::zeros(rows, cols);
                            for r in 0..rows {
                                dp.row_mut(r).copy_from_slice(&g.row(r)[at..at + cols]);
                            }
                            self.add_grad(p, &dp);
                            at += cols;
                        }
                    }
                    Axis::Rows => {
                        let mut at = 0;
                        for p in parts {
                            let (rows, cols) = self.value(p).shape();
                            let data = g.data()[at * cols..(at + rows) * cols].to_vec();
                            let dp = Tensor::from_vec(rows, cols, data);
                            self.add_grad(p, &dp);
                            at += rows;
                        }
                    }
                }
            }
            Op::SliceRows(a, start, _end) => {
                let (a, start) = (*a, *start);
                let (rows, cols) = self.value(a).shape();
                let mut da = Tensor::zeros(rows, cols);
                for r in 0..g.rows() {
                    da.row_mut(start + r).copy_from_slice(g.row(r));
                }
                self.add_grad(a, &da);
            }
            Op::SliceCols(a, start, end) => {
                let (a, start, end) = (*a, *start, *end);
                let (rows, cols) = self.value(a).shape();
                let mut da = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    da.row_mut(r)[start..end].copy_from_slice(g.row(r));
                }
                self.add_grad(a, &da);
            }
            Op::Reshape(a) => {
                let a = *a;
                let (rows, cols) = self.value(a).shape();
                let da = Tensor::from_vec(rows, cols, g.data().to_vec());
                self.add_grad(a, &da);
            }
            Op::EmbeddingLookup(table, indices) => {
                let table = *table;
                let indices = indices.clone();
                let (rows, cols) = self.value(table).shape();
                let mut dt = Tensor::zeros(rows, cols);
                for (r, &i) in indices.iter().enumerate() {
                    for c in 0..cols {
                        let v = dt.get(i, c) + g.get(r, c);
                        dt.set(i, c, v);
                    }
                }
                self.add_grad(table, &dt);
            }
            Op::Sigmoid(a) => {
                let a = *a;
                let y = &self.nodes[i].value;
                let da = Tensor::from_vec(
                    y.rows(),
                    y.cols(),
                    y.data()
                        .iter()
                        .zip(g.data())
                        .map(|(&y, &g)| g * y * (1.0 - y))
                        .collect(),
                );
                self.add_grad(a, &da);
            }
            Op::Tanh(a) => {
                let a = *a;
                let y = &self.nodes[i].value;
                let da = Tensor::from_vec(
                    y.rows(),
                    y.cols(),
                    y.data()
                        .iter()
                        .zip(g.data())
                        .map(|(&y, &g)| g * (1.0 - y * y))
                        .collect(),
                );
                self.add_grad(a, &da);
            }
            Op::Relu(a) => {
                let a = *a;
                let x = self.value(a);
                let da = Tensor::from_vec(
                    x.rows(),
                    x.cols(),
                    x.data()
                        .iter()
                        .zip(g.data())
                        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                        .collect(),
                );
                self.add_grad(a, &da);
            }
            Op::Softmax(a, axis) => {
                let (a, axis) = (*a, *axis);
                let y = self.nodes[i].value.clone();
                let mut da = Tensor::zeros(y.rows(), y.cols());
                match axis {
                    Axis::Cols => {
                        for r in 0..y.rows() {
                            let dot: f64 = y
                                .row(r)
                                .iter()
                                .zip(g.row(r))
                                .map(|(&y, &g)| y * g)
                                .sum();
                            for c in 0..y.cols() {
                                da.set(r, c, (g.get(r, c) - dot) * y.get(r, c));
                            }
                        }
                    }
                    Axis::Rows => {
                        for c in 0..y.cols() {
                            let dot: f64 =
                                (0..y.rows()).map(|r| y.get(r, c) * g.get(r, c)).sum();
                            for r in 0..y.rows() {
                                da.set(r, c, (g.get(r, c) - dot) * y.get(r, c));
                            }
                        }
                    }
                }
                self.add_grad(a, &da);
            }
            Op::MaxOverAxis(a, axis, argmax) => {
                let (a, axis) = (*a, *axis);
                let argmax = argmax.clone();
                let (rows, cols) = self.value(a).shape();
                let mut da = Tensor::zeros(rows, cols);
                match axis {
                    Axis::Rows => {
                        for (c, &r) in argmax.iter().enumerate() {
                            da.set(r, c, g.get(0, c));
                        }
                    }
                    Axis::Cols => {
                        for (r, &c) in argmax.iter().enumerate() {
                            da.set(r, c, g.get(r, 0));
                        }
                    }
                }
                self.add_grad(a, &da);
            }
            Op::Dropout(a, mask) => {
                let a = *a;
                let da = elementwise_product(&g, mask);
                self.add_grad(a, &da);
            }
            Op::Conv1d { input, filters, window } => {
                let (input, filters, window) = (*input, *filters, *window);
                let vi = self.value(input).clone();
                let vf = self.value(filters).clone();
                let d = vi.cols();
                let positions = vi.rows() - window + 1;
                let mut di = Tensor::zeros(vi.rows(), vi.cols());
                let mut df = Tensor::zeros(vf.rows(), vf.cols());
                for p in 0..positions {
                    let gp = g.row(p);
                    for w in 0..window {
                        for k in 0..d {
                            let x = vi.get(p + w, k);
                            let frow = vf.row(w * d + k);
                            // d filters_row += x * g_p ; d input += g_p . filters_row
                            let mut acc = 0.0;
                            let dfrow = df.row_mut(w * d + k);
                            for (j, &gj) in gp.iter().enumerate() {
                                dfrow[j] += x * gj;
                                acc += gj * frow[j];
                            }
                            let v = di.get(p + w, k) + acc;
                            di.set(p + w, k, v);
                        }
                    }
                }
                self.add_grad(input, &di);
                self.add_grad(filters, &df);
            }
            Op::CrossEntropy { logits, targets } => {
                let logits = *logits;
                let targets = targets.clone();
                let v = self.value(logits).clone();
                let mut dl = Tensor::zeros(v.rows(), v.cols());
                for r in 0..v.rows() {
                    let mut probs = v.row(r).to_vec();
                    softmax_slice(&mut probs);
                    let gr = g.get(r, 0);
                    for (c, p) in probs.into_iter().enumerate() {
                        let delta = if c == targets[r] { p - 1.0 } else { p };
                        dl.set(r, c, gr * delta);
                    }
                }
                self.add_grad(logits, &dl);
            }
            Op::SumAll(a) => {
                let a = *a;
                let (rows, cols) = self.value(a).shape();
                let da = Tensor::filled(rows, cols, g.item());
                self.add_grad(a, &da);
            }
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable in-place softmax of a slice.
pub fn softmax_slice(xs: &mut [f64]) {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn elementwise_product(a: &Tensor, b: &Tensor) -> Tensor {
    Tensor::from_vec(
        a.rows(),
        a.cols(),
        a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect(),
    )
}

fn matmul_plain(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let mut out = Tensor::zeros(m, p);
    for i in 0..m {
        let arow = a.row(i);
        for k in 0..n {
            let x = arow[k];
            if x == 0.0 {
                continue;
            }
            let brow = b.row(k);
            let orow = out.row_mut(i);
            for j in 0..p {
                orow[j] += x * brow[j];
            }
        }
    }
    out
}

/// `a . b^T`
fn matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, n, p) = (a.rows(), a.cols(), b.rows());
    debug_assert_eq!(n, b.cols());
    let mut out = Tensor::zeros(m, p);
    for i in 0..m {
        let arow = a.row(i);
        let orow = out.row_mut(i);
        for (j, o) in orow.iter_mut().enumerate() {
            let brow = b.row(j);
            let mut acc = 0.0;
            for k in 0..n {
                acc += arow[k] * brow[k];
            }
            *o += acc;
        }
    }
    out
}

/// `a^T . b`
fn matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, n, p) = (a.cols(), a.rows(), b.cols());
    debug_assert_eq!(n, b.rows());
    let mut out = Tensor::zeros(m, p);
    for k in 0..n {
        let arow = a.row(k);
        let brow = b.row(k);
        for (i, &x) in arow.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let orow = out.row_mut(i);
            for j in 0..p {
                orow[j] += x * brow[j];
            }
        }
    }
    out
}

// ---- gradient checking ----

#[derive(Debug)]
pub struct GradCheckEntry {
    pub name: String,
    pub max_rel_err: f64,
}

#[derive(Debug)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.max_rel_err < self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, f64::max)
    }
}

/// Compare analytic gradients against central finite differences.
///
/// `build` must construct the same deterministic scalar loss each call,
/// given parameter nodes in the order of `params`. The error measure per
/// entry is `|analytic - numeric| / max(1, |numeric|)`.
pub fn grad_check<F>(
    params: &[(String, Tensor)],
    step: f64,
    tolerance: f64,
    build: F,
) -> Result<GradCheckReport, TensorError>
where
    F: Fn(&mut Graph, &[NodeId]) -> Result<NodeId, TensorError>,
{
    let eval = |values: &[Tensor]| -> Result<f64, TensorError> {
        let mut g = Graph::new();
        let ids: Vec<NodeId> = values.iter().map(|t| g.param(t.clone())).collect();
        let loss = build(&mut g, &ids)?;
        Ok(g.value(loss).item())
    };

    // Analytic pass.
    let mut graph = Graph::new();
    let base: Vec<Tensor> = params.iter().map(|(_, t)| t.clone()).collect();
    let ids: Vec<NodeId> = base.iter().map(|t| graph.param(t.clone())).collect();
    let loss = build(&mut graph, &ids)?;
    graph.backward(loss)?;

    let mut entries = Vec::new();
    for (pi, (name, tensor)) in params.iter().enumerate() {
        let analytic = graph
            .grad(ids[pi])
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(tensor.rows(), tensor.cols()));
        let mut max_rel = 0.0f64;
        for e in 0..tensor.len() {
            let mut plus = base.clone();
            plus[pi].data_mut()[e] += step;
            let mut minus = base.clone();
            minus[pi].data_mut()[e] -= step;
            let numeric = (eval(&plus)? - eval(&minus)?) / (2.0 * step);
            let rel = (analytic.data()[e] - numeric).abs() / numeric.abs().max(1.0);
            max_rel = max_rel.max(rel);
        }
        entries.push(GradCheckEntry {
            name: name.clone(),
            max_rel_err: max_rel,
        });
    }
    Ok(GradCheckReport { entries, tolerance })
}
