use rand::Rng;

use crate::algebra::{exp_bivector, linear_combine, Multivector, Signature, Spinor};
use crate::attention::{spinor_attention_masked, spinor_scale, AttentionMask, AttentionOutput};
use crate::error::{Error, Result};

/// Rotor generators for one head's query, key and value maps.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub query: Vec<f64>,
    pub key: Vec<f64>,
    pub value: Vec<f64>,
}

impl HeadParams {
    pub fn zeros(sig: Signature) -> Self {
        let m = sig.bivector_count();
        HeadParams { query: vec![0.0; m], key: vec![0.0; m], value: vec![0.0; m] }
    }

    pub fn random<R: Rng>(sig: Signature, scale: f64, rng: &mut R) -> Self {
        let m = sig.bivector_count();
        let mut draw = || (0..m).map(|_| rng.random_range(-scale..=scale)).collect::<Vec<f64>>();
        HeadParams { query: draw(), key: draw(), value: draw() }
    }

    fn rotors(&self, sig: Signature) -> Result<[Spinor; 3]> {
        Ok([
            exp_bivector(&Multivector::bivector(sig, &self.query)?)?,
            exp_bivector(&Multivector::bivector(sig, &self.key)?)?,
            exp_bivector(&Multivector::bivector(sig, &self.value)?)?,
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    sig: Signature,
    heads: Vec<HeadParams>,
}

impl AttentionParams {
    pub fn new(sig: Signature, heads: Vec<HeadParams>) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::arg("attention needs at least one head"));
        }
        let m = sig.bivector_count();
        for (h, head) in heads.iter().enumerate() {
            for (name, g) in [("query", &head.query), ("key", &head.key), ("value", &head.value)] {
                if g.len() != m {
                    return Err(Error::arg(format!(
                        "head {h} {name} generator has {} coefficients, {sig} needs {m}",
                        g.len()
                    )));
                }
                if g.iter().any(|c| !c.is_finite()) {
                    return Err(Error::arg(format!("head {h} {name} generator is not finite")));
                }
            }
        }
        Ok(AttentionParams { sig, heads })
    }

    pub fn zeros(sig: Signature, heads: usize) -> Result<Self> {
        AttentionParams::new(sig, vec![HeadParams::zeros(sig); heads])
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn heads(&self) -> &[HeadParams] {
        &self.heads
    }

    pub fn heads_mut(&mut self) -> &mut [HeadParams] {
        &mut self.heads
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    /// `2^(n-1)`.
    pub fn d_s(&self) -> f64 {
        spinor_scale(self.sig)
    }
}

/// `ffw(y) = W2 tanh(W1 ȳ + b1) + b2`, where `ȳ` are the even-blade coefficients of `y`.
///
/// `w1` is `hidden × e` and `w2` is `e × hidden`, with `e = 2^(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    sig: Signature,
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl FeedForward {
    pub fn new(sig: Signature, w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<Vec<f64>>, b2: Vec<f64>) -> Result<Self> {
        let e = sig.even_dim();
        let hidden = w1.len();
        let shape_ok = b1.len() == hidden
            && w1.iter().all(|r| r.len() == e)
            && w2.len() == e
            && w2.iter().all(|r| r.len() == hidden)
            && b2.len() == e;
        if !shape_ok {
            return Err(Error::arg(format!(
                "feed-forward weights do not match hidden width {hidden} and even dimension {e}"
            )));
        }
        let all = w1.iter().chain(&w2).flatten().chain(&b1).chain(&b2);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("feed-forward weights must be finite"));
        }
        Ok(FeedForward { sig, w1, b1, w2, b2 })
    }

    pub fn zeros(sig: Signature, hidden: usize) -> Self {
        let e = sig.even_dim();
        FeedForward {
            sig,
            w1: vec![vec![0.0; e]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; e],
            b2: vec![0.0; e],
        }
    }

    pub fn random<R: Rng>(sig: Signature, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut ffw = FeedForward::zeros(sig, hidden);
        for x in ffw.w1.iter_mut().chain(ffw.w2.iter_mut()).flatten() {
            *x = rng.random_range(-scale..=scale);
        }
        ffw
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn hidden(&self) -> usize {
        self.w1.len()
    }

    pub fn parameter_count(&self) -> usize {
        let e = self.sig.even_dim();
        2 * e * self.hidden() + self.hidden() + e
    }

    /// The feed-forward increment (without the residual).
    pub fn apply(&self, y: &Multivector) -> Result<Multivector> {
        crate::algebra::ensure_same(&self.sig, &y.signature())?;
        let ybar = y.even_coeffs();
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(row, b)| (row.iter().zip(&ybar).map(|(w, x)| w * x).sum::<f64>() + b).tanh())
            .collect();
        let out: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect();
        Multivector::even(self.sig, &out)
    }
}

/// Attention plus feed-forward parameters of one residual block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub attention: AttentionParams,
    pub ffw: FeedForward,
}

impl BlockParams {
    pub fn new(attention: AttentionParams, ffw: FeedForward) -> Result<Self> {
        crate::algebra::ensure_same(&attention.signature(), &ffw.signature())?;
        Ok(BlockParams { attention, ffw })
    }

    pub fn signature(&self) -> Signature {
        self.attention.signature()
    }

    /// Every trainable scalar, in a fixed order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for h in &self.attention.heads {
            out.extend(h.query.iter().chain(&h.key).chain(&h.value));
        }
        out.extend(self.ffw.w1.iter().flatten());
        out.extend(&self.ffw.b1);
        out.extend(self.ffw.w2.iter().flatten());
        out.extend(&self.ffw.b2);
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = Vec::new();
        for h in &mut self.attention.heads {
            out.extend(h.query.iter_mut().chain(h.key.iter_mut()).chain(h.value.iter_mut()));
        }
        out.extend(self.ffw.w1.iter_mut().flatten());
        out.extend(self.ffw.b1.iter_mut());
        out.extend(self.ffw.w2.iter_mut().flatten());
        out.extend(self.ffw.b2.iter_mut());
        out
    }

    pub fn parameter_count(&self) -> usize {
        3 * self.attention.head_count() * self.signature().bivector_count() + self.ffw.parameter_count()
    }
}

/// One head: rotor-mapped queries, keys and values, then Dirac-product attention.
pub fn attention_head(
    inputs: &[Spinor],
    head: &HeadParams,
    sig: Signature,
    mask: AttentionMask,
) -> Result<AttentionOutput> {
    let [rq, rk, rv] = head.rotors(sig)?;
    let map =
        |r: &Spinor| -> Result<Vec<Multivector>> { inputs.iter().map(|x| r.mul(x).map(Multivector::from)).collect() };
    let (q, k, v) = (map(&rq)?, map(&rk)?, map(&rv)?);
    spinor_attention_masked(&q, &k, &v, spinor_scale(sig), mask)
}

/// Heads run independently; outputs and weights are averaged.
pub fn multi_head_attention(
    inputs: &[Spinor],
    params: &AttentionParams,
    mask: AttentionMask,
) -> Result<AttentionOutput> {
    let h = params.head_count() as f64;
    let per_head =
        params.heads.iter().map(|head| attention_head(inputs, head, params.sig, mask)).collect::<Result<Vec<_>>>()?;
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut weights = Vec::with_capacity(inputs.len());
    for i in 0..inputs.len() {
        let terms: Vec<(f64, &Multivector)> = per_head.iter().map(|o| (1.0 / h, &o.outputs[i])).collect();
        outputs.push(linear_combine(&terms)?);
        let mut row = vec![0.0; inputs.len()];
        for o in &per_head {
            for (r, w) in row.iter_mut().zip(&o.weights[i]) {
                *r += w / h;
            }
        }
        weights.push(row);
    }
    Ok(AttentionOutput { outputs, weights })
}

/// `y = x + attn(x)`, `z = y + ffw(y)`.
pub fn transformer_block(inputs: &[Spinor], params: &BlockParams, mask: AttentionMask) -> Result<Vec<Spinor>> {
    if inputs.is_empty() {
        return Err(Error::arg("transformer block needs a non-empty sequence"));
    }
    let attn = multi_head_attention(inputs, &params.attention, mask)?;
    inputs
        .iter()
        .zip(&attn.outputs)
        .map(|(x, a)| {
            let y = x.add(a)?;
            let z = y.add(&params.ffw.apply(&y)?)?;
            Spinor::new(z)
        })
        .collect()
}
