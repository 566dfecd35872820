//! Tape-recorded forward passes matching the plain attention functions.

use crate::algebra::{Multivector, Rotor, Signature};
use crate::attention::{spinor_scale, AttentionMask, BlockParams, FeedForward, HeadParams};
use crate::autodiff::{Gradients, Tape, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct HeadVars {
    pub query: Var,
    pub key: Var,
    pub value: Var,
}

/// Leaves for every block parameter. Feed-forward rows and columns are stored as
/// even multivectors so they can be dotted against spinor coefficients directly.
#[derive(Debug, Clone)]
pub struct BlockVars {
    sig: Signature,
    pub heads: Vec<HeadVars>,
    /// Row `k` of `W1`.
    pub w1_rows: Vec<Var>,
    pub b1: Vec<Var>,
    /// Column `k` of `W2`.
    pub w2_cols: Vec<Var>,
    pub b2: Var,
}

fn even_leaf(tape: &mut Tape, sig: Signature, coeffs: &[f64]) -> Result<Var> {
    Ok(tape.leaf(&Multivector::even(sig, coeffs)?))
}

impl BlockVars {
    /// Assembles block variables from existing nodes. `b1` entries must be scalar-shaped.
    pub fn from_parts(
        sig: Signature,
        heads: Vec<HeadVars>,
        w1_rows: Vec<Var>,
        b1: Vec<Var>,
        w2_cols: Vec<Var>,
        b2: Var,
    ) -> Result<Self> {
        if heads.is_empty() || w1_rows.len() != b1.len() || w1_rows.len() != w2_cols.len() {
            return Err(Error::arg("inconsistent block variable layout"));
        }
        Ok(BlockVars { sig, heads, w1_rows, b1, w2_cols, b2 })
    }

    pub fn record(tape: &mut Tape, params: &BlockParams) -> Result<Self> {
        let sig = params.signature();
        let mut heads = Vec::with_capacity(params.attention.head_count());
        for h in params.attention.heads() {
            heads.push(HeadVars {
                query: tape.leaf(&Multivector::bivector(sig, &h.query)?),
                key: tape.leaf(&Multivector::bivector(sig, &h.key)?),
                value: tape.leaf(&Multivector::bivector(sig, &h.value)?),
            });
        }
        let ffw = &params.ffw;
        let w1_rows = ffw.w1.iter().map(|r| even_leaf(tape, sig, r)).collect::<Result<Vec<_>>>()?;
        let b1 = ffw.b1.iter().map(|&b| tape.leaf_scalar(b)).collect::<Result<Vec<_>>>()?;
        let w2_cols = (0..ffw.hidden())
            .map(|k| {
                let col: Vec<f64> = ffw.w2.iter().map(|row| row[k]).collect();
                even_leaf(tape, sig, &col)
            })
            .collect::<Result<Vec<_>>>()?;
        let b2 = even_leaf(tape, sig, &ffw.b2)?;
        Ok(BlockVars { sig, heads, w1_rows, b1, w2_cols, b2 })
    }

    /// Gradient of every parameter, laid out as a [`BlockParams`].
    pub fn gradients(&self, grads: &Gradients) -> Result<BlockParams> {
        let sig = self.sig;
        let bivec = |v: Var| -> Result<Vec<f64>> { Ok(grads.wrt_multivector(v, sig)?.bivector_coeffs()) };
        let even = |v: Var| -> Result<Vec<f64>> { Ok(grads.wrt_multivector(v, sig)?.even_coeffs()) };
        let heads = self
            .heads
            .iter()
            .map(|h| Ok(HeadParams { query: bivec(h.query)?, key: bivec(h.key)?, value: bivec(h.value)? }))
            .collect::<Result<Vec<_>>>()?;
        let w1 = self.w1_rows.iter().map(|&v| even(v)).collect::<Result<Vec<_>>>()?;
        let b1 = self.b1.iter().map(|&v| Ok(grads.wrt(v)?[0])).collect::<Result<Vec<_>>>()?;
        let cols = self.w2_cols.iter().map(|&v| even(v)).collect::<Result<Vec<_>>>()?;
        let w2 = (0..sig.even_dim()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        let b2 = even(self.b2)?;
        BlockParams::new(crate::attention::AttentionParams::new(sig, heads)?, FeedForward::new(sig, w1, b1, w2, b2)?)
    }
}

/// `R_p exp(B)` with a fixed positional rotor; `generator` is a bivector leaf.
pub fn record_embedding(tape: &mut Tape, generator: Var, position: &Rotor) -> Result<Var> {
    let psi = tape.exp_bivector(generator)?;
    let r = tape.leaf(position);
    tape.geometric_product(r, psi)
}

/// Dirac-product attention on recorded queries, keys and values; returns outputs.
pub fn record_spinor_attention(
    tape: &mut Tape,
    queries: &[Var],
    keys: &[Var],
    values: &[Var],
    d_s: f64,
    mask: AttentionMask,
) -> Result<Vec<Var>> {
    if keys.is_empty() || keys.len() != values.len() {
        return Err(Error::arg("attention needs matching, non-empty keys and values"));
    }
    let inv = 1.0 / d_s.sqrt();
    let mut outputs = Vec::with_capacity(queries.len());
    for (i, &q) in queries.iter().enumerate() {
        let visible = match mask {
            AttentionMask::Full => keys.len(),
            AttentionMask::Causal => (i + 1).min(keys.len()),
        };
        let qr = tape.reverse(q)?;
        let mut scores = Vec::with_capacity(visible);
        for &k in &keys[..visible] {
            let s = tape.scalar_product(qr, k)?;
            scores.push(tape.scale_const(inv, s)?);
        }
        let w = tape.softmax(&scores)?;
        let mut terms = Vec::with_capacity(visible);
        for (&wj, &vj) in w.iter().zip(&values[..visible]) {
            terms.push(tape.scale(wj, vj)?);
        }
        outputs.push(tape.sum(&terms)?);
    }
    Ok(outputs)
}

pub fn record_attention_head(
    tape: &mut Tape,
    inputs: &[Var],
    head: &HeadVars,
    sig: Signature,
    mask: AttentionMask,
) -> Result<Vec<Var>> {
    let map = |g: Var, tape: &mut Tape| -> Result<Vec<Var>> {
        let r = tape.exp_bivector(g)?;
        inputs.iter().map(|&x| tape.geometric_product(r, x)).collect()
    };
    let q = map(head.query, tape)?;
    let k = map(head.key, tape)?;
    let v = map(head.value, tape)?;
    record_spinor_attention(tape, &q, &k, &v, spinor_scale(sig), mask)
}

/// Full residual block on recorded spinor inputs.
pub fn record_block(tape: &mut Tape, inputs: &[Var], vars: &BlockVars, mask: AttentionMask) -> Result<Vec<Var>> {
    if inputs.is_empty() {
        return Err(Error::arg("transformer block needs a non-empty sequence"));
    }
    let per_head = vars
        .heads
        .iter()
        .map(|h| record_attention_head(tape, inputs, h, vars.sig, mask))
        .collect::<Result<Vec<_>>>()?;
    let h_inv = 1.0 / vars.heads.len() as f64;
    let mut outputs = Vec::with_capacity(inputs.len());
    for (i, &x) in inputs.iter().enumerate() {
        let attn = if per_head.len() == 1 {
            per_head[0][i]
        } else {
            let terms: Vec<(f64, Var)> = per_head.iter().map(|o| (h_inv, o[i])).collect();
            tape.linear_combine(&terms)?
        };
        let y = tape.add(x, attn)?;
        let mut parts = Vec::with_capacity(vars.w1_rows.len() + 2);
        parts.push(y);
        for ((&row, &b), &col) in vars.w1_rows.iter().zip(&vars.b1).zip(&vars.w2_cols) {
            let pre = tape.dot(row, y)?;
            let pre = tape.add(pre, b)?;
            let act = tape.tanh(pre)?;
            parts.push(tape.scale(act, col)?);
        }
        parts.push(vars.b2);
        outputs.push(tape.sum(&parts)?);
    }
    Ok(outputs)
}
