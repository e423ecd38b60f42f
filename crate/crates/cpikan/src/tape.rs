//! Batched reverse-mode gradient tape.
//!
//! Every node carries a vector of values: length 1 for trainable scalars and
//! constants, length `B` for quantities evaluated at `B` collocation points.
//! Binary operations broadcast length-1 operands; the corresponding backward
//! accumulation sums over the batch, which is exactly the full-batch parameter
//! gradient.
//!
//! The graph is built once per training run. Each epoch updates the leaf values
//! in place, re-runs [`Tape::forward`], and calls [`Tape::backward`]; no nodes
//! are allocated inside the training loop. Reductions always run in node/batch
//! index order, so repeated runs are bit-identical.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    Shift(u32, f64),
    Tanh(u32),
    /// `sum_i coeffs[i] * vals[i]` with independent per-term broadcasting.
    Dot { coeffs: Vec<u32>, vals: Vec<u32> },
    Sum(Vec<u32>),
    /// Mean of squares, reducing a batch to a scalar.
    MeanSq(u32),
}

#[derive(Debug)]
struct Node {
    op: Op,
    val: Vec<f64>,
    grad: Vec<f64>,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a tape node. Cheap to copy; all arithmetic on `Var`s records
/// new nodes on the owning tape.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Leaf holding a single scalar (a trainable parameter or a constant).
    pub fn scalar(&self, v: f64) -> Var<'_> {
        self.push(Op::Leaf, vec![v])
    }

    /// Leaf holding one value per batch element.
    pub fn batch(&self, vals: Vec<f64>) -> Var<'_> {
        assert!(!vals.is_empty(), "batch leaf must be non-empty");
        self.push(Op::Leaf, vals)
    }

    /// Overwrite a scalar leaf's value (parameter update between epochs).
    pub fn set_scalar(&self, var: Var<'_>, v: f64) {
        let mut nodes = self.nodes.borrow_mut();
        let node = &mut nodes[var.idx as usize];
        debug_assert!(matches!(node.op, Op::Leaf) && node.val.len() == 1);
        node.val[0] = v;
    }

    pub fn value(&self, var: Var<'_>) -> f64 {
        self.nodes.borrow()[var.idx as usize].val[0]
    }

    pub fn values(&self, var: Var<'_>) -> Vec<f64> {
        self.nodes.borrow()[var.idx as usize].val.clone()
    }

    /// Gradient of the last [`Tape::backward`] target with respect to `var`
    /// (summed over the batch for length-1 leaves).
    pub fn grad(&self, var: Var<'_>) -> f64 {
        let nodes = self.nodes.borrow();
        nodes[var.idx as usize].grad.iter().sum()
    }

    fn push(&self, op: Op, val: Vec<f64>) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = u32::try_from(nodes.len()).expect("tape node count exceeds u32");
        let grad = vec![0.0; val.len()];
        nodes.push(Node { op, val, grad });
        Var { tape: self, idx }
    }

    fn binary(&self, op: Op, a: u32, b: u32) -> Var<'_> {
        let f: fn(f64, f64) -> f64 = match op {
            Op::Add(..) => |p, q| p + q,
            Op::Sub(..) => |p, q| p - q,
            Op::Mul(..) => |p, q| p * q,
            _ => unreachable!(),
        };
        let val = {
            let nodes = self.nodes.borrow();
            broadcast(&nodes[a as usize].val, &nodes[b as usize].val, f)
        };
        self.push(op, val)
    }

    /// Recompute every non-leaf node in topological (index) order.
    pub fn forward(&self) {
        let mut nodes = self.nodes.borrow_mut();
        for i in 0..nodes.len() {
            let (done, rest) = nodes.split_at_mut(i);
            let node = &mut rest[0];
            let v = |j: u32| &done[j as usize].val;
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => eval_broadcast(v(*a), v(*b), &mut node.val, |p, q| p + q),
                Op::Sub(a, b) => eval_broadcast(v(*a), v(*b), &mut node.val, |p, q| p - q),
                Op::Mul(a, b) => eval_broadcast(v(*a), v(*b), &mut node.val, |p, q| p * q),
                Op::Neg(a) => {
                    for (o, x) in node.val.iter_mut().zip(v(*a)) {
                        *o = -x;
                    }
                }
                Op::Scale(a, c) => {
                    for (o, x) in node.val.iter_mut().zip(v(*a)) {
                        *o = x * c;
                    }
                }
                Op::Shift(a, c) => {
                    for (o, x) in node.val.iter_mut().zip(v(*a)) {
                        *o = x + c;
                    }
                }
                Op::Tanh(a) => {
                    for (o, x) in node.val.iter_mut().zip(v(*a)) {
                        *o = x.tanh();
                    }
                }
                Op::Dot { coeffs, vals } => {
                    node.val.fill(0.0);
                    for (c, x) in coeffs.iter().zip(vals) {
                        let cv = v(*c);
                        let xv = v(*x);
                        if cv.len() == 1 {
                            let c0 = cv[0];
                            if xv.len() == 1 {
                                for o in node.val.iter_mut() {
                                    *o += c0 * xv[0];
                                }
                            } else {
                                for (o, q) in node.val.iter_mut().zip(xv) {
                                    *o += c0 * q;
                                }
                            }
                        } else {
                            for ((o, p), q) in node.val.iter_mut().zip(cv).zip(xv) {
                                *o += p * q;
                            }
                        }
                    }
                }
                Op::Sum(terms) => {
                    node.val.fill(0.0);
                    for t in terms {
                        let tv = v(*t);
                        if tv.len() == 1 {
                            for o in node.val.iter_mut() {
                                *o += tv[0];
                            }
                        } else {
                            for (o, x) in node.val.iter_mut().zip(tv) {
                                *o += x;
                            }
                        }
                    }
                }
                Op::MeanSq(a) => {
                    let av = v(*a);
                    let n = av.len() as f64;
                    node.val[0] = av.iter().map(|x| x * x).sum::<f64>() / n;
                }
            }
        }
    }

    /// Reverse sweep seeding `d(target)/d(target) = 1`. `target` must be scalar.
    pub fn backward(&self, target: Var<'_>) {
        let mut nodes = self.nodes.borrow_mut();
        for node in nodes.iter_mut() {
            node.grad.fill(0.0);
        }
        assert_eq!(
            nodes[target.idx as usize].val.len(),
            1,
            "backward target must be a scalar node"
        );
        nodes[target.idx as usize].grad[0] = 1.0;

        for i in (0..nodes.len()).rev() {
            let (prev, rest) = nodes.split_at_mut(i);
            let node = &rest[0];
            if node.grad.iter().all(|g| *g == 0.0) {
                continue;
            }
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    accumulate(prev, *a, &node.grad, |_, g| g);
                    accumulate(prev, *b, &node.grad, |_, g| g);
                }
                Op::Sub(a, b) => {
                    accumulate(prev, *a, &node.grad, |_, g| g);
                    accumulate(prev, *b, &node.grad, |_, g| -g);
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    let bv: Vec<f64> = prev[b as usize].val.clone();
                    let av: Vec<f64> = prev[a as usize].val.clone();
                    accumulate(prev, a, &node.grad, |i, g| g * pick(&bv, i));
                    accumulate(prev, b, &node.grad, |i, g| g * pick(&av, i));
                }
                Op::Neg(a) => accumulate(prev, *a, &node.grad, |_, g| -g),
                Op::Scale(a, c) => {
                    let c = *c;
                    accumulate(prev, *a, &node.grad, |_, g| g * c);
                }
                Op::Shift(a, _) => accumulate(prev, *a, &node.grad, |_, g| g),
                Op::Tanh(a) => {
                    let yv = &node.val;
                    accumulate(prev, *a, &node.grad, |i, g| {
                        let y = yv[i];
                        g * (1.0 - y * y)
                    });
                }
                Op::Dot { coeffs, vals } => {
                    for (c, x) in coeffs.iter().zip(vals) {
                        let (c, x) = (*c, *x);
                        let cv: Vec<f64> = prev[c as usize].val.clone();
                        let xv: Vec<f64> = prev[x as usize].val.clone();
                        accumulate(prev, c, &node.grad, |i, g| g * pick(&xv, i));
                        accumulate(prev, x, &node.grad, |i, g| g * pick(&cv, i));
                    }
                }
                Op::Sum(terms) => {
                    for t in terms {
                        accumulate(prev, *t, &node.grad, |_, g| g);
                    }
                }
                Op::MeanSq(a) => {
                    let g = node.grad[0];
                    let dst = &mut prev[*a as usize];
                    let n = dst.val.len() as f64;
                    for (gd, x) in dst.grad.iter_mut().zip(&dst.val) {
                        *gd += g * 2.0 * x / n;
                    }
                }
            }
        }
    }
}

#[inline]
fn pick(v: &[f64], i: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[i]
    }
}

/// Add `f(batch_index, out_grad[batch_index])` into `nodes[j]`'s gradient,
/// summing over the batch when the destination is a scalar.
fn accumulate(nodes: &mut [Node], j: u32, out_grad: &[f64], f: impl Fn(usize, f64) -> f64) {
    let dst = &mut nodes[j as usize];
    if dst.grad.len() == out_grad.len() {
        for (i, (gd, g)) in dst.grad.iter_mut().zip(out_grad).enumerate() {
            *gd += f(i, *g);
        }
    } else if dst.grad.len() == 1 {
        let mut s = 0.0;
        for (i, g) in out_grad.iter().enumerate() {
            s += f(i, *g);
        }
        dst.grad[0] += s;
    } else {
        // out_grad is scalar, destination is a batch: broadcast the gradient.
        let g = out_grad[0];
        for (i, gd) in dst.grad.iter_mut().enumerate() {
            *gd += f(i, g);
        }
    }
}

fn broadcast(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    assert!(
        a.len() == b.len() || a.len() == 1 || b.len() == 1,
        "incompatible batch lengths {} and {}",
        a.len(),
        b.len()
    );
    (0..n).map(|i| f(pick(a, i), pick(b, i))).collect()
}

fn eval_broadcast(a: &[f64], b: &[f64], out: &mut [f64], f: impl Fn(f64, f64) -> f64) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(pick(a, i), pick(b, i));
    }
}

impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    /// Mean of squares over the batch, producing a scalar node.
    pub fn mean_sq(self) -> Var<'t> {
        let val = {
            let nodes = self.tape.nodes.borrow();
            let v = &nodes[self.idx as usize].val;
            vec![v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64]
        };
        self.tape.push_op(Op::MeanSq(self.idx), val)
    }
}

impl Tape {
    fn push_op(&self, op: Op, val: Vec<f64>) -> Var<'_> {
        self.push(op, val)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Var<'t> {
        self.tape.binary(Op::Add(self.idx, rhs.idx), self.idx, rhs.idx)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Var<'t> {
        self.tape.binary(Op::Sub(self.idx, rhs.idx), self.idx, rhs.idx)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Var<'t> {
        self.tape.binary(Op::Mul(self.idx, rhs.idx), self.idx, rhs.idx)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        let val = self.tape.values(self).iter().map(|x| -x).collect();
        self.tape.push_op(Op::Neg(self.idx), val)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(self) -> f64 {
        self.tape.nodes.borrow()[self.idx as usize].val[0]
    }

    fn scale(self, c: f64) -> Self {
        let val = self.tape.values(self).iter().map(|x| x * c).collect();
        self.tape.push_op(Op::Scale(self.idx, c), val)
    }

    fn shift(self, c: f64) -> Self {
        let val = self.tape.values(self).iter().map(|x| x + c).collect();
        self.tape.push_op(Op::Shift(self.idx, c), val)
    }

    fn tanh(self) -> Self {
        let val = self.tape.values(self).iter().map(|x| x.tanh()).collect();
        self.tape.push_op(Op::Tanh(self.idx), val)
    }

    fn dot(coeffs: &[Self], vals: &[Self]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() == vals.len());
        let tape = coeffs[0].tape;
        let op = Op::Dot {
            coeffs: coeffs.iter().map(|v| v.idx).collect(),
            vals: vals.iter().map(|v| v.idx).collect(),
        };
        let val = {
            let nodes = tape.nodes.borrow();
            let n = coeffs
                .iter()
                .chain(vals)
                .map(|v| nodes[v.idx as usize].val.len())
                .max()
                .unwrap();
            let mut out = vec![0.0; n];
            for (c, x) in coeffs.iter().zip(vals) {
                let cv = &nodes[c.idx as usize].val;
                let xv = &nodes[x.idx as usize].val;
                for (i, o) in out.iter_mut().enumerate() {
                    *o += pick(cv, i) * pick(xv, i);
                }
            }
            out
        };
        tape.push_op(op, val)
    }

    fn sum(terms: &[Self]) -> Self {
        assert!(!terms.is_empty());
        let tape = terms[0].tape;
        let op = Op::Sum(terms.iter().map(|v| v.idx).collect());
        let val = {
            let nodes = tape.nodes.borrow();
            let n = terms
                .iter()
                .map(|v| nodes[v.idx as usize].val.len())
                .max()
                .unwrap();
            let mut out = vec![0.0; n];
            for t in terms {
                let tv = &nodes[t.idx as usize].val;
                for (i, o) in out.iter_mut().enumerate() {
                    *o += pick(tv, i);
                }
            }
            out
        };
        tape.push_op(op, val)
    }
}
