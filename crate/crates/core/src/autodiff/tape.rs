use std::sync::atomic::{AtomicU64, Ordering};

use crate::algebra::{ensure_same, halving_count, product_sign, reverse_sign, Multivector, Signature, SERIES_TERMS};
use crate::error::{Error, Result};

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

/// What a node holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    /// Plain real vector of the given length.
    Vector(usize),
    Multivector(Signature),
}

impl Shape {
    pub fn len(&self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(n) => *n,
            Shape::Multivector(sig) => sig.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Recorded operation kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    Leaf,
    /// `a + b`, same shape.
    Add,
    /// `a - b`, same shape.
    Sub,
    /// `Σ w_k x_k` with constant weights, same shape.
    LinearCombine(Vec<f64>),
    /// `s · x` for a scalar node `s`.
    Scale,
    /// Coefficient-wise product, same shape.
    Mul,
    /// Coefficient-wise `exp`.
    Exp,
    /// Coefficient-wise `tanh`.
    Tanh,
    /// `log Σ exp(s_k)` over scalar inputs.
    LogSumExp,
    /// Coefficient dot product, same shape, scalar result.
    Dot,
    GeometricProduct,
    Reverse,
    GradeProject(usize),
    ScalarPart,
    /// `<A B>_0` without forming `A B`.
    ScalarProduct,
}

#[derive(Debug, Clone)]
struct Node {
    op: OpKind,
    inputs: Vec<usize>,
    shape: Shape,
    value: Vec<f64>,
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    tape: u64,
    id: usize,
}

impl Var {
    pub fn id(&self) -> usize {
        self.id
    }
}

/// Append-only record of differentiable operations. Node ids are topologically ordered.
#[derive(Debug)]
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed), nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: OpKind, inputs: Vec<usize>, shape: Shape, value: Vec<f64>) -> Var {
        self.nodes.push(Node { op, inputs, shape, value });
        Var { tape: self.id, id: self.nodes.len() - 1 }
    }

    fn node(&self, v: Var) -> Result<&Node> {
        if v.tape != self.id {
            return Err(Error::arg(format!("node {} belongs to tape {}, not tape {}", v.id, v.tape, self.id)));
        }
        self.nodes.get(v.id).ok_or_else(|| Error::arg(format!("node {} not on tape", v.id)))
    }

    pub fn leaf(&mut self, mv: &Multivector) -> Var {
        self.push(OpKind::Leaf, vec![], Shape::Multivector(mv.signature()), mv.coeffs().to_vec())
    }

    pub fn leaf_scalar(&mut self, value: f64) -> Result<Var> {
        self.leaf_values(Shape::Scalar, vec![value])
    }

    pub fn leaf_vector(&mut self, values: Vec<f64>) -> Result<Var> {
        self.leaf_values(Shape::Vector(values.len()), values)
    }

    pub fn leaf_values(&mut self, shape: Shape, values: Vec<f64>) -> Result<Var> {
        if values.len() != shape.len() {
            return Err(Error::arg(format!("{shape:?} needs {} values, got {}", shape.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("leaf value is not finite"));
        }
        Ok(self.push(OpKind::Leaf, vec![], shape, values))
    }

    pub fn shape(&self, v: Var) -> Result<Shape> {
        Ok(self.node(v)?.shape)
    }

    pub fn value(&self, v: Var) -> Result<&[f64]> {
        Ok(&self.node(v)?.value)
    }

    /// First coefficient; the value itself for scalar nodes.
    pub fn scalar(&self, v: Var) -> Result<f64> {
        Ok(self.node(v)?.value[0])
    }

    pub fn multivector(&self, v: Var) -> Result<Multivector> {
        let node = self.node(v)?;
        match node.shape {
            Shape::Multivector(sig) => Multivector::from_coeffs(sig, node.value.clone()),
            other => Err(Error::arg(format!("node {} is {other:?}, not a multivector", v.id))),
        }
    }

    /// Appends one operation after validating inputs; the forward value is computed eagerly.
    pub fn record(&mut self, kind: OpKind, inputs: &[Var]) -> Result<Var> {
        let nodes = inputs.iter().map(|&v| self.node(v)).collect::<Result<Vec<_>>>()?;
        let shapes: Vec<Shape> = nodes.iter().map(|n| n.shape).collect();
        let values: Vec<&[f64]> = nodes.iter().map(|n| n.value.as_slice()).collect();
        let (shape, value) = forward(&kind, &shapes, &values)?;
        if let Some(i) = value.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("{kind:?} produced a non-finite value at coordinate {i}")));
        }
        let ids = inputs.iter().map(|v| v.id).collect();
        Ok(self.push(kind, ids, shape, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::Add, &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::Sub, &[a, b])
    }

    pub fn linear_combine(&mut self, terms: &[(f64, Var)]) -> Result<Var> {
        let weights = terms.iter().map(|t| t.0).collect();
        let vars: Vec<Var> = terms.iter().map(|t| t.1).collect();
        self.record(OpKind::LinearCombine(weights), &vars)
    }

    /// Multiplies by a constant.
    pub fn scale_const(&mut self, factor: f64, x: Var) -> Result<Var> {
        self.linear_combine(&[(factor, x)])
    }

    pub fn sum(&mut self, xs: &[Var]) -> Result<Var> {
        let terms: Vec<(f64, Var)> = xs.iter().map(|&x| (1.0, x)).collect();
        self.linear_combine(&terms)
    }

    pub fn mean(&mut self, xs: &[Var]) -> Result<Var> {
        let w = 1.0 / xs.len() as f64;
        let terms: Vec<(f64, Var)> = xs.iter().map(|&x| (w, x)).collect();
        self.linear_combine(&terms)
    }

    pub fn scale(&mut self, s: Var, x: Var) -> Result<Var> {
        self.record(OpKind::Scale, &[s, x])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::Mul, &[a, b])
    }

    pub fn exp(&mut self, x: Var) -> Result<Var> {
        self.record(OpKind::Exp, &[x])
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.record(OpKind::Tanh, &[x])
    }

    pub fn log_sum_exp(&mut self, xs: &[Var]) -> Result<Var> {
        self.record(OpKind::LogSumExp, xs)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::Dot, &[a, b])
    }

    pub fn geometric_product(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::GeometricProduct, &[a, b])
    }

    pub fn reverse(&mut self, x: Var) -> Result<Var> {
        self.record(OpKind::Reverse, &[x])
    }

    pub fn grade_project(&mut self, x: Var, k: usize) -> Result<Var> {
        self.record(OpKind::GradeProject(k), &[x])
    }

    pub fn scalar_part(&mut self, x: Var) -> Result<Var> {
        self.record(OpKind::ScalarPart, &[x])
    }

    pub fn scalar_product(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::ScalarProduct, &[a, b])
    }

    /// `<a† b>_0`.
    pub fn dirac_scalar(&mut self, a: Var, b: Var) -> Result<Var> {
        let ra = self.reverse(a)?;
        self.scalar_product(ra, b)
    }

    /// `<x† x>_0`.
    pub fn norm_squared(&mut self, x: Var) -> Result<Var> {
        self.dirac_scalar(x, x)
    }

    /// Softmax over scalar nodes, built from `exp(s_k - logsumexp(s))`.
    pub fn softmax(&mut self, scores: &[Var]) -> Result<Vec<Var>> {
        let lse = self.log_sum_exp(scores)?;
        scores
            .iter()
            .map(|&s| {
                let shifted = self.sub(s, lse)?;
                self.exp(shifted)
            })
            .collect()
    }

    /// Bivector exponential recorded as scaling, a truncated series and repeated squaring.
    ///
    /// The halving count is read off the forward value, so the recorded graph is the same
    /// computation as [`crate::algebra::exp_scaled_series`].
    pub fn exp_bivector(&mut self, b: Var) -> Result<Var> {
        let mv = self.multivector(b)?;
        if !mv.is_grade(2) {
            return Err(Error::arg(format!("exp_bivector expects a pure bivector, got {mv}")));
        }
        let k = halving_count(&mv);
        let x = self.scale_const(0.5f64.powi(k as i32), b)?;
        let one = self.leaf(&Multivector::one(mv.signature()));
        let mut terms = vec![one];
        let mut term = one;
        for m in 1..SERIES_TERMS {
            let prod = self.geometric_product(term, x)?;
            term = self.scale_const(1.0 / m as f64, prod)?;
            terms.push(term);
        }
        let mut acc = self.sum(&terms)?;
        for _ in 0..k {
            acc = self.geometric_product(acc, acc)?;
        }
        Ok(acc)
    }

    /// Reverse sweep from a scalar-valued node. Visits each node at most once, in reverse id order.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let node = self.node(loss)?;
        match node.shape {
            Shape::Scalar => {}
            Shape::Multivector(_) if node.value[1..].iter().all(|&c| c == 0.0) => {}
            other => return Err(Error::arg(format!("backward needs a scalar loss, node {} is {other:?}", loss.id))),
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.id + 1];
        let mut seed = vec![0.0; node.value.len()];
        seed[0] = 1.0;
        grads[loss.id] = Some(seed);

        for id in (0..=loss.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            let contributions = self.adjoint(node, &g);
            for (input, delta) in node.inputs.iter().zip(contributions) {
                let Some(delta) = delta else { continue };
                match &mut grads[*input] {
                    Some(acc) => acc.iter_mut().zip(&delta).for_each(|(a, d)| *a += d),
                    slot @ None => *slot = Some(delta),
                }
            }
            grads[id] = Some(g);
        }

        let grads = grads
            .into_iter()
            .enumerate()
            .map(|(id, g)| g.unwrap_or_else(|| vec![0.0; self.nodes[id].value.len()]))
            .collect();
        Ok(Gradients { tape: self.id, grads })
    }

    /// Per-input adjoint contributions of one node given its output adjoint `g`.
    fn adjoint(&self, node: &Node, g: &[f64]) -> Vec<Option<Vec<f64>>> {
        let input = |k: usize| &self.nodes[node.inputs[k]].value;
        let scaled = |w: f64| g.iter().map(|x| w * x).collect::<Vec<f64>>();
        match &node.op {
            OpKind::Leaf => vec![],
            OpKind::Add => vec![Some(g.to_vec()), Some(g.to_vec())],
            OpKind::Sub => vec![Some(g.to_vec()), Some(scaled(-1.0))],
            OpKind::LinearCombine(weights) => weights.iter().map(|&w| Some(scaled(w))).collect(),
            OpKind::Scale => {
                let s = input(0)[0];
                let x = input(1);
                let ds: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
                vec![Some(vec![ds]), Some(scaled(s))]
            }
            OpKind::Mul => {
                let (a, b) = (input(0), input(1));
                vec![
                    Some(g.iter().zip(b).map(|(x, y)| x * y).collect()),
                    Some(g.iter().zip(a).map(|(x, y)| x * y).collect()),
                ]
            }
            OpKind::Exp => vec![Some(g.iter().zip(&node.value).map(|(x, y)| x * y).collect())],
            OpKind::Tanh => vec![Some(g.iter().zip(&node.value).map(|(x, t)| x * (1.0 - t * t)).collect())],
            OpKind::LogSumExp => {
                let lse = node.value[0];
                (0..node.inputs.len()).map(|k| Some(vec![g[0] * (input(k)[0] - lse).exp()])).collect()
            }
            OpKind::Dot => vec![Some(scaled_by(input(1), g[0])), Some(scaled_by(input(0), g[0]))],
            OpKind::GeometricProduct => {
                let sig = match node.shape {
                    Shape::Multivector(sig) => sig,
                    _ => unreachable!("geometric product of non-multivectors"),
                };
                let (a, b) = (input(0), input(1));
                let mut da = vec![0.0; a.len()];
                let mut db = vec![0.0; b.len()];
                for i in 0..a.len() {
                    for j in 0..b.len() {
                        let gk = g[i ^ j];
                        if gk == 0.0 {
                            continue;
                        }
                        let s = product_sign(&sig, i as u32, j as u32) * gk;
                        da[i] += s * b[j];
                        db[j] += s * a[i];
                    }
                }
                vec![Some(da), Some(db)]
            }
            OpKind::Reverse => {
                vec![Some(g.iter().enumerate().map(|(i, x)| reverse_sign((i as u32).count_ones()) * x).collect())]
            }
            OpKind::GradeProject(k) => vec![Some(
                g.iter()
                    .enumerate()
                    .map(|(i, &x)| if (i as u32).count_ones() as usize == *k { x } else { 0.0 })
                    .collect(),
            )],
            OpKind::ScalarPart => {
                let mut d = vec![0.0; input(0).len()];
                d[0] = g[0];
                vec![Some(d)]
            }
            OpKind::ScalarProduct => {
                let sig = match self.nodes[node.inputs[0]].shape {
                    Shape::Multivector(sig) => sig,
                    _ => unreachable!("scalar product of non-multivectors"),
                };
                let (a, b) = (input(0), input(1));
                let signs: Vec<f64> = (0..a.len()).map(|i| product_sign(&sig, i as u32, i as u32) * g[0]).collect();
                vec![
                    Some(signs.iter().zip(b).map(|(s, y)| s * y).collect()),
                    Some(signs.iter().zip(a).map(|(s, x)| s * x).collect()),
                ]
            }
        }
    }
}

fn scaled_by(x: &[f64], w: f64) -> Vec<f64> {
    x.iter().map(|v| v * w).collect()
}

fn same_shape(kind: &OpKind, shapes: &[Shape]) -> Result<Shape> {
    let first = *shapes.first().ok_or_else(|| Error::arg(format!("{kind:?} needs at least one input")))?;
    for s in &shapes[1..] {
        match (first, *s) {
            (Shape::Multivector(a), Shape::Multivector(b)) => ensure_same(&a, &b)?,
            (a, b) if a == b => {}
            (a, b) => return Err(Error::arg(format!("{kind:?} needs matching shapes, got {a:?} and {b:?}"))),
        }
    }
    Ok(first)
}

fn arity(kind: &OpKind, shapes: &[Shape], n: usize) -> Result<()> {
    if shapes.len() != n {
        return Err(Error::arg(format!("{kind:?} takes {n} inputs, got {}", shapes.len())));
    }
    Ok(())
}

fn signature_of(kind: &OpKind, shape: Shape) -> Result<Signature> {
    match shape {
        Shape::Multivector(sig) => Ok(sig),
        other => Err(Error::arg(format!("{kind:?} needs a multivector, got {other:?}"))),
    }
}

fn forward(kind: &OpKind, shapes: &[Shape], values: &[&[f64]]) -> Result<(Shape, Vec<f64>)> {
    let zip_with =
        |f: fn(f64, f64) -> f64| -> Vec<f64> { values[0].iter().zip(values[1]).map(|(&a, &b)| f(a, b)).collect() };
    match kind {
        OpKind::Leaf => Err(Error::arg("use Tape::leaf to record leaves")),
        OpKind::Add | OpKind::Sub | OpKind::Mul => {
            arity(kind, shapes, 2)?;
            let shape = same_shape(kind, shapes)?;
            let out = match kind {
                OpKind::Add => zip_with(|a, b| a + b),
                OpKind::Sub => zip_with(|a, b| a - b),
                _ => zip_with(|a, b| a * b),
            };
            Ok((shape, out))
        }
        OpKind::LinearCombine(weights) => {
            if weights.len() != shapes.len() {
                return Err(Error::arg(format!(
                    "linear combination has {} weights for {} inputs",
                    weights.len(),
                    shapes.len()
                )));
            }
            let shape = same_shape(kind, shapes)?;
            let mut out = vec![0.0; shape.len()];
            for (w, v) in weights.iter().zip(values) {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += w * x;
                }
            }
            Ok((shape, out))
        }
        OpKind::Scale => {
            arity(kind, shapes, 2)?;
            if shapes[0] != Shape::Scalar {
                return Err(Error::arg("Scale needs a scalar first input"));
            }
            let s = values[0][0];
            Ok((shapes[1], values[1].iter().map(|x| s * x).collect()))
        }
        OpKind::Exp | OpKind::Tanh => {
            arity(kind, shapes, 1)?;
            let f: fn(f64) -> f64 = if *kind == OpKind::Exp { f64::exp } else { f64::tanh };
            Ok((shapes[0], values[0].iter().map(|&x| f(x)).collect()))
        }
        OpKind::LogSumExp => {
            if shapes.is_empty() || shapes.iter().any(|s| *s != Shape::Scalar) {
                return Err(Error::arg("LogSumExp needs one or more scalar inputs"));
            }
            let max = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v[0]));
            let sum: f64 = values.iter().map(|v| (v[0] - max).exp()).sum();
            Ok((Shape::Scalar, vec![max + sum.ln()]))
        }
        OpKind::Dot => {
            arity(kind, shapes, 2)?;
            same_shape(kind, shapes)?;
            let d = values[0].iter().zip(values[1]).map(|(a, b)| a * b).sum();
            Ok((Shape::Scalar, vec![d]))
        }
        OpKind::GeometricProduct => {
            arity(kind, shapes, 2)?;
            let sig = signature_of(kind, same_shape(kind, shapes)?)?;
            let a = Multivector::from_coeffs_unchecked(sig, values[0].to_vec());
            let b = Multivector::from_coeffs_unchecked(sig, values[1].to_vec());
            Ok((shapes[0], a.gp_unchecked(&b).into_coeffs()))
        }
        OpKind::Reverse => {
            arity(kind, shapes, 1)?;
            signature_of(kind, shapes[0])?;
            let out = values[0].iter().enumerate().map(|(i, x)| reverse_sign((i as u32).count_ones()) * x).collect();
            Ok((shapes[0], out))
        }
        OpKind::GradeProject(k) => {
            arity(kind, shapes, 1)?;
            let sig = signature_of(kind, shapes[0])?;
            if *k > sig.n() {
                return Err(Error::arg(format!("grade {k} exceeds dimension of {sig}")));
            }
            let out = values[0]
                .iter()
                .enumerate()
                .map(|(i, &x)| if (i as u32).count_ones() as usize == *k { x } else { 0.0 })
                .collect();
            Ok((shapes[0], out))
        }
        OpKind::ScalarPart => {
            arity(kind, shapes, 1)?;
            signature_of(kind, shapes[0])?;
            Ok((Shape::Scalar, vec![values[0][0]]))
        }
        OpKind::ScalarProduct => {
            arity(kind, shapes, 2)?;
            let sig = signature_of(kind, same_shape(kind, shapes)?)?;
            let a = Multivector::from_coeffs_unchecked(sig, values[0].to_vec());
            let b = Multivector::from_coeffs_unchecked(sig, values[1].to_vec());
            Ok((Shape::Scalar, vec![a.scalar_product_unchecked(&b)]))
        }
    }
}

/// Adjoints for every node up to the loss.
#[derive(Debug, Clone)]
pub struct Gradients {
    tape: u64,
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    /// `∂loss/∂(each coefficient)` of `v`. Zero for nodes the loss does not depend on.
    pub fn wrt(&self, v: Var) -> Result<&[f64]> {
        if v.tape != self.tape {
            return Err(Error::arg("gradient requested for a node of a different tape"));
        }
        self.grads
            .get(v.id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::arg(format!("node {} was recorded after the loss", v.id)))
    }

    /// Gradient of a multivector leaf, as a multivector.
    pub fn wrt_multivector(&self, v: Var, sig: Signature) -> Result<Multivector> {
        Multivector::from_coeffs(sig, self.wrt(v)?.to_vec())
    }
}
