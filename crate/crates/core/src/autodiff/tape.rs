//! Wengert-list tape for scalar reverse-mode differentiation.
//!
//! Each recorded node stores its value and the local partial derivative with
//! respect to every non-constant parent, computed when the node is created.
//! Nodes are appended after their parents, so walking the tape backwards is a
//! reverse topological order and [`Tape::backward`] visits every node once.
//!
//! Constants never touch the tape: a [`Var`] with no node index carries only
//! its value, and operations whose inputs are all constant fold to constants.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::real::{sigmoid_f64, softplus_f64, Real, ACOSH_DERIV_FLOOR};

const CONST: u32 = u32::MAX;

/// Operation tag recorded for every node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    AddConst,
    MulConst,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Cosh,
    Sinh,
    Acosh,
    Asinh,
    Sigmoid,
    Softplus,
    Relu,
    LeakyRelu,
    Max,
    Clamp,
    Sum,
    Dot,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    value: f64,
    op: Op,
    edges: (u32, u32),
}

#[derive(Default)]
struct Inner {
    nodes: Vec<Node>,
    edges: Vec<(u32, f64)>,
    grads: Vec<f64>,
}

/// Recording context. One tape per training step; drop it afterwards.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// Scalar handle into a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id() {
            Some(id) => write!(f, "Var#{id}({})", self.value),
            None => write!(f, "Const({})", self.value),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Differentiable leaf.
    pub fn var(&self, value: f64) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let start = inner.edges.len() as u32;
        inner.nodes.push(Node {
            value,
            op: Op::Leaf,
            edges: (start, start),
        });
        Var {
            tape: self,
            idx: (inner.nodes.len() - 1) as u32,
            value,
        }
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// Value with no gradient.
    pub fn constant(&self, value: f64) -> Var<'_> {
        Var {
            tape: self,
            idx: CONST,
            value,
        }
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push<'t>(&'t self, value: f64, op: Op, parents: &[(Var<'t>, f64)]) -> Var<'t> {
        self.push_many(value, op, parents.iter().copied())
    }

    fn push_many<'t>(
        &'t self,
        value: f64,
        op: Op,
        parents: impl Iterator<Item = (Var<'t>, f64)>,
    ) -> Var<'t> {
        let mut inner = self.inner.borrow_mut();
        let start = inner.edges.len() as u32;
        for (p, d) in parents {
            if p.idx != CONST {
                inner.edges.push((p.idx, d));
            }
        }
        let end = inner.edges.len() as u32;
        if start == end {
            return Var {
                tape: self,
                idx: CONST,
                value,
            };
        }
        inner.nodes.push(Node {
            value,
            op,
            edges: (start, end),
        });
        Var {
            tape: self,
            idx: (inner.nodes.len() - 1) as u32,
            value,
        }
    }

    /// Accumulates `d loss / d node` into the tape's gradient buffer for every
    /// node reachable from `loss`. Calling it again without [`Tape::zero_grad`]
    /// adds to the existing gradients.
    pub fn backward(&self, loss: Var<'_>) {
        assert!(
            std::ptr::eq(loss.tape, self),
            "backward: loss belongs to another tape"
        );
        let Some(root) = loss.id() else {
            return;
        };
        let mut inner = self.inner.borrow_mut();
        let n = inner.nodes.len();
        let mut adj = vec![0.0; root + 1];
        adj[root] = 1.0;
        for i in (0..=root).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            let (s, e) = inner.nodes[i].edges;
            for k in s as usize..e as usize {
                let (p, d) = inner.edges[k];
                adj[p as usize] += g * d;
            }
        }
        if inner.grads.len() < n {
            inner.grads.resize(n, 0.0);
        }
        for (acc, g) in inner.grads.iter_mut().zip(adj) {
            *acc += g;
        }
    }

    /// Accumulated gradient of a variable; zero for constants and for nodes
    /// not reached by any backward pass.
    pub fn grad(&self, v: Var<'_>) -> f64 {
        match v.id() {
            Some(i) => self.inner.borrow().grads.get(i).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn grads(&self, vs: &[Var<'_>]) -> Vec<f64> {
        vs.iter().map(|&v| self.grad(v)).collect()
    }

    pub fn zero_grad(&self) {
        self.inner.borrow_mut().grads.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Value recorded for node `id`.
    pub fn node_value(&self, id: usize) -> f64 {
        self.inner.borrow().nodes[id].value
    }

    pub fn op(&self, v: Var<'_>) -> Option<Op> {
        v.id().map(|i| self.inner.borrow().nodes[i].op)
    }

    /// Node ids of the non-constant parents of `v`.
    pub fn parents(&self, v: Var<'_>) -> Vec<usize> {
        let Some(i) = v.id() else {
            return Vec::new();
        };
        let inner = self.inner.borrow();
        let (s, e) = inner.nodes[i].edges;
        inner.edges[s as usize..e as usize]
            .iter()
            .map(|&(p, _)| p as usize)
            .collect()
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Node id, or `None` for a constant.
    pub fn id(&self) -> Option<usize> {
        (self.idx != CONST).then_some(self.idx as usize)
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    fn unary(self, value: f64, op: Op, d: f64) -> Self {
        if self.idx == CONST {
            return self.tape.constant(value);
        }
        self.tape.push(value, op, &[(self, d)])
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Self {
        self.tape
            .push(self.value + rhs.value, Op::Add, &[(self, 1.0), (rhs, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Self {
        self.tape
            .push(self.value - rhs.value, Op::Sub, &[(self, 1.0), (rhs, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Self {
        self.tape.push(
            self.value * rhs.value,
            Op::Mul,
            &[(self, rhs.value), (rhs, self.value)],
        )
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.value != 0.0, "div: zero denominator");
        let inv = 1.0 / rhs.value;
        self.tape.push(
            self.value * inv,
            Op::Div,
            &[(self, inv), (rhs, -self.value * inv * inv)],
        )
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.unary(-self.value, Op::Neg, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Self {
        self.unary(self.value + rhs, Op::AddConst, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Self {
        self.unary(self.value - rhs, Op::AddConst, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Self {
        self.unary(self.value * rhs, Op::MulConst, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Self {
        assert!(rhs != 0.0, "div: zero denominator");
        self.unary(self.value / rhs, Op::MulConst, 1.0 / rhs)
    }
}

impl Real for Var<'_> {
    fn value(self) -> f64 {
        self.value
    }

    fn constant(self, c: f64) -> Self {
        self.tape.constant(c)
    }

    /// The derivative at exactly zero is taken as 0.
    fn sqrt(self) -> Self {
        assert!(self.value >= 0.0, "sqrt of negative value {}", self.value);
        let s = self.value.sqrt();
        let d = if s > 0.0 { 0.5 / s } else { 0.0 };
        self.unary(s, Op::Sqrt, d)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(e, Op::Exp, e)
    }

    fn ln(self) -> Self {
        assert!(self.value > 0.0, "ln of non-positive value {}", self.value);
        self.unary(self.value.ln(), Op::Ln, 1.0 / self.value)
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(t, Op::Tanh, 1.0 - t * t)
    }

    fn cosh(self) -> Self {
        self.unary(self.value.cosh(), Op::Cosh, self.value.sinh())
    }

    fn sinh(self) -> Self {
        self.unary(self.value.sinh(), Op::Sinh, self.value.cosh())
    }

    fn acosh(self) -> Self {
        let x = self.value.max(ACOSH_DERIV_FLOOR);
        self.unary(
            self.value.max(1.0).acosh(),
            Op::Acosh,
            1.0 / (x * x - 1.0).sqrt(),
        )
    }

    fn asinh(self) -> Self {
        let x = self.value;
        self.unary(x.asinh(), Op::Asinh, 1.0 / (x * x + 1.0).sqrt())
    }

    fn sigmoid(self) -> Self {
        let s = sigmoid_f64(self.value);
        self.unary(s, Op::Sigmoid, s * (1.0 - s))
    }

    fn softplus(self) -> Self {
        self.unary(
            softplus_f64(self.value),
            Op::Softplus,
            sigmoid_f64(self.value),
        )
    }

    fn relu(self) -> Self {
        if self.value > 0.0 {
            self.unary(self.value, Op::Relu, 1.0)
        } else {
            self.unary(0.0, Op::Relu, 0.0)
        }
    }

    fn leaky_relu(self, slope: f64) -> Self {
        if self.value > 0.0 {
            self.unary(self.value, Op::LeakyRelu, 1.0)
        } else {
            self.unary(slope * self.value, Op::LeakyRelu, slope)
        }
    }

    fn max(self, other: Self) -> Self {
        if other.value > self.value {
            self.tape
                .push(other.value, Op::Max, &[(self, 0.0), (other, 1.0)])
        } else {
            self.tape
                .push(self.value, Op::Max, &[(self, 1.0), (other, 0.0)])
        }
    }

    fn clamp(self, lo: f64, hi: f64) -> Self {
        if self.value < lo {
            self.unary(lo, Op::Clamp, 0.0)
        } else if self.value > hi {
            self.unary(hi, Op::Clamp, 0.0)
        } else {
            self.unary(self.value, Op::Clamp, 1.0)
        }
    }

    fn sum(xs: &[Self]) -> Self {
        assert!(!xs.is_empty(), "sum of empty slice");
        let tape = xs[0].tape;
        let value = xs.iter().map(|x| x.value).sum();
        tape.push_many(value, Op::Sum, xs.iter().map(|&x| (x, 1.0)))
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        assert_eq!(a.len(), b.len(), "dot: length mismatch");
        assert!(!a.is_empty(), "dot of empty slices");
        let tape = a[0].tape;
        let value = a.iter().zip(b).map(|(x, y)| x.value * y.value).sum();
        tape.push_many(
            value,
            Op::Dot,
            a.iter()
                .zip(b)
                .flat_map(|(&x, &y)| [(x, y.value), (y, x.value)]),
        )
    }
}
