//! Tape-based reverse-mode automatic differentiation.
//!
//! A [`Graph`] is a flat tape of [`Node`]s. Operations append nodes and
//! compute their values eagerly, so construction order is both evaluation
//! order and a valid topological order. [`Graph::backward`] runs one reverse
//! sweep from a scalar root, accumulating gradients with `+=` so shared
//! subexpressions (e.g. a parameter used by every tree node of one function
//! type) receive the sum of their downstream contributions.
//!
//! Parameters enter through [`Graph::param`], which caches one node per key:
//! asking for the same key twice returns the same node, so per-key gradients
//! are complete after a single sweep and can be read with
//! [`Graph::param_grads`].

use std::collections::HashMap;
use std::fmt;

use crate::params::ParamStore;
use crate::tensor::Tensor;

/// Index of a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Address a tape position directly (mainly for inspection in tests).
    pub fn from_raw(index: usize) -> NodeId {
        NodeId(index)
    }
}

/// Operation kinds. Inputs are always earlier tape positions.
#[derive(Debug, Clone)]
pub enum Op {
    /// Leaf with a fixed value; receives no gradient of interest.
    Constant,
    /// Leaf bound to a named entry of a [`ParamStore`].
    Param(String),
    /// Matrix product A·B.
    MatMul(NodeId, NodeId),
    /// Elementwise sum (same shape).
    Add(NodeId, NodeId),
    /// Elementwise (Hadamard) product (same shape).
    Hadamard(NodeId, NodeId),
    /// Vertical concatenation of two column vectors.
    Concat(NodeId, NodeId),
    /// Elementwise logistic sigmoid.
    Sigmoid(NodeId),
    /// Elementwise hyperbolic tangent.
    Tanh(NodeId),
    /// Elementwise reciprocal 1/x. Used to normalize stack gate pairs;
    /// inputs there are sums of sigmoids, hence bounded away from zero.
    Recip(NodeId),
    /// Scalar–tensor product: scale(x, s) = s·x where s is 1×1.
    Scale(NodeId, NodeId),
    /// Select row `i` of a matrix as a column vector (used for embedding
    /// lookup and for picking entries of small gate vectors).
    RowSelect(NodeId, usize),
    /// Stack n×1 columns as the rows of a p×n matrix.
    RowStack(Vec<NodeId>),
    /// Inner product of two column vectors, a 1×1 result.
    Dot(NodeId, NodeId),
    /// Numerically stable binary cross-entropy on a 1×1 logit against a
    /// fixed 0/1 label.
    BceLoss(NodeId, f64),
    /// Elementwise product with a fixed dropout mask (inverted scaling is
    /// baked into the mask by the caller).
    DropoutMask(NodeId, Vec<f64>),
}

impl Op {
    /// Stable op-kind name, for diagnostics and tape inspection.
    pub fn name(&self) -> &'static str {
        match self {
            Op::Constant => "constant",
            Op::Param(_) => "parameter",
            Op::MatMul(..) => "matmul",
            Op::Add(..) => "add",
            Op::Hadamard(..) => "hadamard",
            Op::Concat(..) => "concat",
            Op::Sigmoid(_) => "sigmoid",
            Op::Tanh(_) => "tanh",
            Op::Recip(_) => "recip",
            Op::Scale(..) => "scale",
            Op::RowSelect(..) => "row-select",
            Op::RowStack(_) => "row-stack",
            Op::Dot(..) => "dot",
            Op::BceLoss(..) => "bce-loss",
            Op::DropoutMask(..) => "dropout-mask-apply",
        }
    }
}

#[derive(Debug)]
pub enum GraphError {
    /// Shape mismatch while building a node; names the operation and the
    /// offending shapes so the failing cell is identifiable.
    Shape { op: &'static str, detail: String },
    /// `backward` requires a 1×1 root.
    RootNotScalar { rows: usize, cols: usize },
    /// A parameter key was requested that the store does not contain.
    UnknownParam(String),
    /// Labels for the loss must be exactly 0 or 1.
    BadLabel(f64),
    /// Row stacks need at least one row.
    EmptyRowStack,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::Shape { op, detail } => write!(f, "shape error in {op}: {detail}"),
            GraphError::RootNotScalar { rows, cols } => {
                write!(f, "backward root must be 1x1, got {rows}x{cols}")
            }
            GraphError::UnknownParam(k) => write!(f, "unknown parameter key: {k}"),
            GraphError::BadLabel(y) => write!(f, "label must be 0 or 1, got {y}"),
            GraphError::EmptyRowStack => write!(f, "row-stack needs at least one row"),
        }
    }
}

impl std::error::Error for GraphError {}

struct Node {
    op: Op,
    value: Tensor,
    grad: Tensor,
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Stable binary cross-entropy of a logit `z` against label `y` ∈ {0,1}:
/// max(z,0) − z·y + ln(1 + e^{−|z|}).
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    param_cache: HashMap<String, NodeId>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drop all nodes but keep allocations for reuse across examples.
    pub fn clear(&mut self) {
        self.nodes.clear();
        self.param_cache.clear();
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].grad
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.0].op
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        let grad = Tensor::zeros(value.rows(), value.cols());
        self.nodes.push(Node { op, value, grad });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Constant, value)
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> NodeId {
        self.push(Op::Constant, Tensor::zeros(rows, cols))
    }

    pub fn scalar(&mut self, x: f64) -> NodeId {
        self.push(Op::Constant, Tensor::scalar(x))
    }

    /// Bind (or re-use) the tape node for a named parameter. One node per
    /// key per graph: repeated calls return the cached id.
    pub fn param(&mut self, store: &ParamStore, key: &str) -> Result<NodeId, GraphError> {
        if let Some(&id) = self.param_cache.get(key) {
            return Ok(id);
        }
        let value = store
            .get(key)
            .ok_or_else(|| GraphError::UnknownParam(key.to_string()))?
            .clone();
        let id = self.push(Op::Param(key.to_string()), value);
        self.param_cache.insert(key.to_string(), id);
        Ok(id)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, GraphError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.cols() != bv.rows() {
            return Err(GraphError::Shape {
                op: "matmul",
                detail: format!("{:?} x {:?}", av.shape(), bv.shape()),
            });
        }
        let value = av.matmul(bv);
        Ok(self.push(Op::MatMul(a, b), value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, GraphError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() != bv.shape() {
            return Err(GraphError::Shape {
                op: "add",
                detail: format!("{:?} vs {:?}", av.shape(), bv.shape()),
            });
        }
        let mut value = av.clone();
        value.add_in_place(bv);
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, GraphError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() != bv.shape() {
            return Err(GraphError::Shape {
                op: "hadamard",
                detail: format!("{:?} vs {:?}", av.shape(), bv.shape()),
            });
        }
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect();
        let value = Tensor::from_vec(av.rows(), av.cols(), data);
        Ok(self.push(Op::Hadamard(a, b), value))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, GraphError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.cols() != 1 || bv.cols() != 1 {
            return Err(GraphError::Shape {
                op: "concat",
                detail: format!("need column vectors, got {:?} and {:?}", av.shape(), bv.shape()),
            });
        }
        let mut data = Vec::with_capacity(av.rows() + bv.rows());
        data.extend_from_slice(av.data());
        data.extend_from_slice(bv.data());
        let value = Tensor::column(data);
        Ok(self.push(Op::Concat(a, b), value))
    }

    pub fn sigmoid_node(&mut self, x: NodeId) -> NodeId {
        let value = self.nodes[x.0].value.map(sigmoid);
        self.push(Op::Sigmoid(x), value)
    }

    pub fn tanh_node(&mut self, x: NodeId) -> NodeId {
        let value = self.nodes[x.0].value.map(f64::tanh);
        self.push(Op::Tanh(x), value)
    }

    pub fn recip(&mut self, x: NodeId) -> NodeId {
        let value = self.nodes[x.0].value.map(|v| 1.0 / v);
        self.push(Op::Recip(x), value)
    }

    pub fn scale(&mut self, x: NodeId, s: NodeId) -> Result<NodeId, GraphError> {
        let sv = &self.nodes[s.0].value;
        if sv.shape() != (1, 1) {
            return Err(GraphError::Shape {
                op: "scale",
                detail: format!("scale factor must be 1x1, got {:?}", sv.shape()),
            });
        }
        let s_val = sv.item();
        let value = self.nodes[x.0].value.map(|v| s_val * v);
        Ok(self.push(Op::Scale(x, s), value))
    }

    pub fn row_select(&mut self, x: NodeId, row: usize) -> Result<NodeId, GraphError> {
        let xv = &self.nodes[x.0].value;
        if row >= xv.rows() {
            return Err(GraphError::Shape {
                op: "row-select",
                detail: format!("row {row} out of range for {:?}", xv.shape()),
            });
        }
        let value = Tensor::column(xv.row(row).to_vec());
        Ok(self.push(Op::RowSelect(x, row), value))
    }

    pub fn row_stack(&mut self, rows: &[NodeId]) -> Result<NodeId, GraphError> {
        if rows.is_empty() {
            return Err(GraphError::EmptyRowStack);
        }
        let n = self.nodes[rows[0].0].value.rows();
        let mut data = Vec::with_capacity(rows.len() * n);
        for &r in rows {
            let rv = &self.nodes[r.0].value;
            if rv.shape() != (n, 1) {
                return Err(GraphError::Shape {
                    op: "row-stack",
                    detail: format!("expected {n}x1 rows, got {:?}", rv.shape()),
                });
            }
            data.extend_from_slice(rv.data());
        }
        let value = Tensor::from_vec(rows.len(), n, data);
        Ok(self.push(Op::RowStack(rows.to_vec()), value))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, GraphError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() != bv.shape() || av.cols() != 1 {
            return Err(GraphError::Shape {
                op: "dot",
                detail: format!("need equal column vectors, got {:?} and {:?}", av.shape(), bv.shape()),
            });
        }
        let v = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(v)))
    }

    pub fn bce_loss(&mut self, logit: NodeId, label: f64) -> Result<NodeId, GraphError> {
        let zv = &self.nodes[logit.0].value;
        if zv.shape() != (1, 1) {
            return Err(GraphError::Shape {
                op: "bce-loss",
                detail: format!("logit must be 1x1, got {:?}", zv.shape()),
            });
        }
        if label != 0.0 && label != 1.0 {
            return Err(GraphError::BadLabel(label));
        }
        let value = Tensor::scalar(bce_with_logit(zv.item(), label));
        Ok(self.push(Op::BceLoss(logit, label), value))
    }

    pub fn dropout_mask(&mut self, x: NodeId, mask: Vec<f64>) -> Result<NodeId, GraphError> {
        let xv = &self.nodes[x.0].value;
        if mask.len() != xv.len() {
            return Err(GraphError::Shape {
                op: "dropout-mask-apply",
                detail: format!("mask length {} vs tensor {:?}", mask.len(), xv.shape()),
            });
        }
        let data = xv.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let value = Tensor::from_vec(xv.rows(), xv.cols(), data);
        Ok(self.push(Op::DropoutMask(x, mask), value))
    }

    /// Recompute every node's value in tape order, re-reading parameters
    /// from `store`. Useful after an optimizer step or for finite-difference
    /// checks; graph construction already evaluated everything once.
    pub fn forward(&mut self, store: &ParamStore) -> Result<(), GraphError> {
        for i in 0..self.nodes.len() {
            let (done, rest) = self.nodes.split_at_mut(i);
            let node = &mut rest[0];
            match &node.op {
                Op::Constant => {}
                Op::Param(key) => {
                    let t = store
                        .get(key)
                        .ok_or_else(|| GraphError::UnknownParam(key.clone()))?;
                    node.value.clone_from(t);
                }
                Op::MatMul(a, b) => node.value = done[a.0].value.matmul(&done[b.0].value),
                Op::Add(a, b) => {
                    node.value.clone_from(&done[a.0].value);
                    node.value.add_in_place(&done[b.0].value);
                }
                Op::Hadamard(a, b) => {
                    let (av, bv) = (&done[a.0].value, &done[b.0].value);
                    node.value = Tensor::from_vec(
                        av.rows(),
                        av.cols(),
                        av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect(),
                    );
                }
                Op::Concat(a, b) => {
                    let mut data = Vec::with_capacity(node.value.len());
                    data.extend_from_slice(done[a.0].value.data());
                    data.extend_from_slice(done[b.0].value.data());
                    node.value = Tensor::column(data);
                }
                Op::Sigmoid(x) => node.value = done[x.0].value.map(sigmoid),
                Op::Tanh(x) => node.value = done[x.0].value.map(f64::tanh),
                Op::Recip(x) => node.value = done[x.0].value.map(|v| 1.0 / v),
                Op::Scale(x, s) => {
                    let sv = done[s.0].value.item();
                    node.value = done[x.0].value.map(|v| sv * v);
                }
                Op::RowSelect(x, row) => {
                    node.value = Tensor::column(done[x.0].value.row(*row).to_vec());
                }
                Op::RowStack(rows) => {
                    let n = done[rows[0].0].value.rows();
                    let mut data = Vec::with_capacity(rows.len() * n);
                    for r in rows {
                        data.extend_from_slice(done[r.0].value.data());
                    }
                    node.value = Tensor::from_vec(rows.len(), n, data);
                }
                Op::Dot(a, b) => {
                    let v = done[a.0]
                        .value
                        .data()
                        .iter()
                        .zip(done[b.0].value.data())
                        .map(|(x, y)| x * y)
                        .sum();
                    node.value = Tensor::scalar(v);
                }
                Op::BceLoss(z, y) => {
                    node.value = Tensor::scalar(bce_with_logit(done[z.0].value.item(), *y));
                }
                Op::DropoutMask(x, mask) => {
                    let xv = &done[x.0].value;
                    node.value = Tensor::from_vec(
                        xv.rows(),
                        xv.cols(),
                        xv.data().iter().zip(mask).map(|(v, m)| v * m).collect(),
                    );
                }
            }
        }
        Ok(())
    }

    /// Reverse sweep from a scalar root. Gradients of every node are reset
    /// first, so each call reflects exactly one root.
    pub fn backward(&mut self, root: NodeId) -> Result<(), GraphError> {
        let shape = self.nodes[root.0].value.shape();
        if shape != (1, 1) {
            return Err(GraphError::RootNotScalar { rows: shape.0, cols: shape.1 });
        }
        for node in &mut self.nodes {
            node.grad.fill(0.0);
        }
        self.nodes[root.0].grad.fill(1.0);

        for i in (0..self.nodes.len()).rev() {
            let (inputs, rest) = self.nodes.split_at_mut(i);
            let node = &rest[0];
            if node.grad.data().iter().all(|&g| g == 0.0) {
                continue;
            }
            match &node.op {
                Op::Constant | Op::Param(_) => {}
                Op::MatMul(a, b) => {
                    // dA += g·Bᵀ, dB += Aᵀ·g
                    let da = node.grad.matmul_nt(&inputs[b.0].value);
                    let db = inputs[a.0].value.matmul_tn(&node.grad);
                    inputs[a.0].grad.add_in_place(&da);
                    inputs[b.0].grad.add_in_place(&db);
                }
                Op::Add(a, b) => {
                    inputs[a.0].grad.add_in_place(&node.grad);
                    inputs[b.0].grad.add_in_place(&node.grad);
                }
                Op::Hadamard(a, b) => {
                    let (ai, bi) = (a.0, b.0);
                    let g = node.grad.data();
                    for idx in 0..g.len() {
                        let ga = g[idx] * inputs[bi].value.data()[idx];
                        inputs[ai].grad.data_mut()[idx] += ga;
                    }
                    for idx in 0..g.len() {
                        let gb = g[idx] * inputs[ai].value.data()[idx];
                        inputs[bi].grad.data_mut()[idx] += gb;
                    }
                }
                Op::Concat(a, b) => {
                    let ra = inputs[a.0].value.rows();
                    let g = node.grad.data();
                    for (i, gi) in g[..ra].iter().enumerate() {
                        inputs[a.0].grad.data_mut()[i] += gi;
                    }
                    for (i, gi) in g[ra..].iter().enumerate() {
                        inputs[b.0].grad.data_mut()[i] += gi;
                    }
                }
                Op::Sigmoid(x) => {
                    let y = node.value.data();
                    let g = node.grad.data();
                    let gx = inputs[x.0].grad.data_mut();
                    for idx in 0..g.len() {
                        gx[idx] += g[idx] * y[idx] * (1.0 - y[idx]);
                    }
                }
                Op::Tanh(x) => {
                    let y = node.value.data();
                    let g = node.grad.data();
                    let gx = inputs[x.0].grad.data_mut();
                    for idx in 0..g.len() {
                        gx[idx] += g[idx] * (1.0 - y[idx] * y[idx]);
                    }
                }
                Op::Recip(x) => {
                    let y = node.value.data();
                    let g = node.grad.data();
                    let gx = inputs[x.0].grad.data_mut();
                    for idx in 0..g.len() {
                        gx[idx] -= g[idx] * y[idx] * y[idx];
                    }
                }
                Op::Scale(x, s) => {
                    let s_val = inputs[s.0].value.item();
                    inputs[x.0].grad.add_scaled_in_place(&node.grad, s_val);
                    let ds: f64 = node
                        .grad
                        .data()
                        .iter()
                        .zip(inputs[x.0].value.data())
                        .map(|(g, v)| g * v)
                        .sum();
                    inputs[s.0].grad.data_mut()[0] += ds;
                }
                Op::RowSelect(x, row) => {
                    let g = node.grad.data();
                    let cols = inputs[x.0].value.cols();
                    let gx = inputs[x.0].grad.data_mut();
                    for (c, gi) in g.iter().enumerate() {
                        gx[row * cols + c] += gi;
                    }
                }
                Op::RowStack(rows) => {
                    let n = node.value.cols();
                    for (r, id) in rows.iter().enumerate() {
                        let grow = node.grad.row(r).to_vec();
                        let gx = inputs[id.0].grad.data_mut();
                        for (c, gi) in grow.iter().enumerate() {
                            gx[c] += gi;
                        }
                        debug_assert_eq!(gx.len(), n);
                    }
                }
                Op::Dot(a, b) => {
                    let s = node.grad.item();
                    let (ai, bi) = (a.0, b.0);
                    for idx in 0..inputs[ai].value.len() {
                        let ga = s * inputs[bi].value.data()[idx];
                        inputs[ai].grad.data_mut()[idx] += ga;
                    }
                    for idx in 0..inputs[bi].value.len() {
                        let gb = s * inputs[ai].value.data()[idx];
                        inputs[bi].grad.data_mut()[idx] += gb;
                    }
                }
                Op::BceLoss(z, y) => {
                    let g = node.grad.item();
                    let zv = inputs[z.0].value.item();
                    inputs[z.0].grad.data_mut()[0] += g * (sigmoid(zv) - y);
                }
                Op::DropoutMask(x, mask) => {
                    let g = node.grad.data();
                    let gx = inputs[x.0].grad.data_mut();
                    for idx in 0..g.len() {
                        gx[idx] += g[idx] * mask[idx];
                    }
                }
            }
        }
        Ok(())
    }

    /// Collect parameter gradients by key, deterministically ordered.
    pub fn param_grads(&self) -> crate::params::GradMap {
        let mut out = crate::params::GradMap::new();
        for node in &self.nodes {
            if let Op::Param(key) = &node.op {
                out.insert(key.clone(), node.grad.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamStore;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sigmoid_frozen_values() {
        // Frozen from an independent high-precision computation:
        // σ(3) = 0.9525741268224334, σ(0) = 0.5.
        assert!(close(sigmoid(3.0), 0.9525741268224334, 1e-15));
        assert_eq!(sigmoid(0.0), 0.5);
        // Stability: extreme logits neither overflow nor become NaN.
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(800.0) > 0.999_999);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-6);
    }

    #[test]
    fn tanh_frozen_value() {
        // tanh(1) = 0.7615941559557649 via two independent routes
        // ((e^2−1)/(e^2+1) and the libm call agree to the last bit).
        let t = Tensor::scalar(1.0);
        assert!(close(t.map(f64::tanh).item(), 0.7615941559557649, 1e-16));
    }

    #[test]
    fn bce_matches_naive_formula_in_safe_range() {
        // Naive -[y ln p + (1-y) ln(1-p)] where p = σ(z), for moderate z.
        for &(z, y) in &[(0.3, 1.0), (-1.2, 0.0), (2.0, 1.0), (-0.5, 1.0)] {
            let p = sigmoid(z);
            let naive = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            assert!(close(bce_with_logit(z, y), naive, 1e-12), "z={z} y={y}");
        }
        // And it stays finite where the naive formula would overflow.
        assert!(bce_with_logit(1000.0, 0.0).is_finite());
        assert!(bce_with_logit(-1000.0, 1.0).is_finite());
    }

    #[test]
    fn dot_sigmoid_bce_hand_derived_gradient() {
        // Setup: a = [1, 2], b = [0.5, -1] (parameter), z = a·b = -1.5,
        // loss = bce(z, y=1). d loss/dz = σ(z) − 1; d loss/db = (σ(z)−1)·a.
        let mut store = ParamStore::new();
        store.insert("b", Tensor::column(vec![0.5, -1.0]));
        let mut g = Graph::new();
        let a = g.constant(Tensor::column(vec![1.0, 2.0]));
        let b = g.param(&store, "b").unwrap();
        let z = g.dot(a, b).unwrap();
        let loss = g.bce_loss(z, 1.0).unwrap();
        assert!(close(g.value(z).item(), -1.5, 1e-15));
        g.backward(loss).unwrap();
        let coef = sigmoid(-1.5) - 1.0;
        let grads = g.param_grads();
        let gb = grads.get("b").unwrap();
        assert!(close(gb.data()[0], coef * 1.0, 1e-14));
        assert!(close(gb.data()[1], coef * 2.0, 1e-14));
    }

    #[test]
    fn matmul_gradient_hand_example() {
        // y = W·x with W = [[1,2],[3,4]] (param), x = [5,6]ᵀ; s = sum(y) via
        // dot with ones. ds/dW = ones·xᵀ = [[5,6],[5,6]], ds/dx = Wᵀ·ones = [4,6]ᵀ.
        let mut store = ParamStore::new();
        store.insert("w", Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let mut g = Graph::new();
        let w = g.param(&store, "w").unwrap();
        let x = g.constant(Tensor::column(vec![5.0, 6.0]));
        let y = g.matmul(w, x).unwrap();
        let ones = g.constant(Tensor::column(vec![1.0, 1.0]));
        let s = g.dot(y, ones).unwrap();
        g.backward(s).unwrap();
        assert_eq!(g.param_grads().get("w").unwrap().data(), &[5.0, 6.0, 5.0, 6.0]);
        assert_eq!(g.grad(x).data(), &[4.0, 6.0]);
    }

    #[test]
    fn shared_parameter_accumulates_both_uses() {
        // s = w·a + w·b with w a 1x1 param: ds/dw = a + b.
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(3.0));
        let mut g = Graph::new();
        let w1 = g.param(&store, "w").unwrap();
        let w2 = g.param(&store, "w").unwrap();
        assert_eq!(w1, w2, "param nodes must be cached per key");
        let a = g.scalar(2.0);
        let b = g.scalar(7.0);
        let wa = g.hadamard(w1, a).unwrap();
        let wb = g.hadamard(w2, b).unwrap();
        let s = g.add(wa, wb).unwrap();
        g.backward(s).unwrap();
        assert_eq!(g.param_grads().get("w").unwrap().item(), 9.0);
    }

    #[test]
    fn recip_gradient() {
        // y = 1/x at x = 4: y = 0.25, dy/dx = −1/16.
        let mut g = Graph::new();
        let x = g.scalar(4.0);
        let y = g.recip(x);
        assert!(close(g.value(y).item(), 0.25, 1e-15));
        g.backward(y).unwrap();
        assert!(close(g.grad(x).item(), -0.0625, 1e-15));
    }

    #[test]
    fn concat_and_row_ops_route_gradients() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::column(vec![1.0, 2.0]));
        let b = g.constant(Tensor::column(vec![3.0]));
        let c = g.concat(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[1.0, 2.0, 3.0]);

        let m = g.constant(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let r1 = g.row_select(m, 1).unwrap();
        assert_eq!(g.value(r1).data(), &[3.0, 4.0]);
        let ones = g.constant(Tensor::column(vec![1.0, 1.0]));
        let s = g.dot(r1, ones).unwrap();
        g.backward(s).unwrap();
        assert_eq!(g.grad(m).data(), &[0.0, 0.0, 1.0, 1.0]);

        let stacked = g.row_stack(&[a, a]).unwrap();
        assert_eq!(g.value(stacked).shape(), (2, 2));
        assert_eq!(g.value(stacked).data(), &[1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn scale_gradients_flow_to_both_sides() {
        // y = s·x, x=[1,2]ᵀ, s=3; t = y·[1,1]: dt/ds = 3, dt/dx = [3,3].
        let mut g = Graph::new();
        let x = g.constant(Tensor::column(vec![1.0, 2.0]));
        let s = g.scalar(3.0);
        let y = g.scale(x, s).unwrap();
        let ones = g.constant(Tensor::column(vec![1.0, 1.0]));
        let t = g.dot(y, ones).unwrap();
        g.backward(t).unwrap();
        assert_eq!(g.grad(s).item(), 3.0);
        assert_eq!(g.grad(x).data(), &[3.0, 3.0]);
    }

    #[test]
    fn forward_recomputes_after_param_change() {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(2.0));
        let mut g = Graph::new();
        let w = g.param(&store, "w").unwrap();
        let x = g.scalar(5.0);
        let y = g.hadamard(w, x).unwrap();
        assert_eq!(g.value(y).item(), 10.0);
        store.get_mut("w").unwrap().data_mut()[0] = 3.0;
        g.forward(&store).unwrap();
        assert_eq!(g.value(y).item(), 15.0);
        assert_eq!(g.value(w).item(), 3.0);
    }

    #[test]
    fn shape_errors_name_the_operation() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::column(vec![1.0, 2.0]));
        let b = g.constant(Tensor::column(vec![1.0, 2.0, 3.0]));
        let err = g.add(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("add"), "got: {msg}");
        let err = g.matmul(a, b).unwrap_err();
        assert!(err.to_string().contains("matmul"));
    }

    #[test]
    fn backward_rejects_non_scalar_root() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::column(vec![1.0, 2.0]));
        assert!(matches!(g.backward(a), Err(GraphError::RootNotScalar { .. })));
    }

    #[test]
    fn dropout_mask_scales_values_and_gradients() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::column(vec![1.0, 2.0, 3.0]));
        let y = g.dropout_mask(x, vec![2.0, 0.0, 2.0]).unwrap();
        assert_eq!(g.value(y).data(), &[2.0, 0.0, 6.0]);
        let ones = g.constant(Tensor::column(vec![1.0, 1.0, 1.0]));
        let s = g.dot(y, ones).unwrap();
        g.backward(s).unwrap();
        assert_eq!(g.grad(x).data(), &[2.0, 0.0, 2.0]);
    }
}
