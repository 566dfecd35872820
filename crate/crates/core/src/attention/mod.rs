//! Dirac-product attention on spinor sequences and a single transformer block.
//!
//! Scores are `<q† k>_0 / sqrt(d_s)` with `d_s = 2^(n-1)`, the dimension of the
//! even subalgebra. Query, key and value maps are learned one-sided rotors
//! `exp(B) x`, so they preserve every input's norm. The feed-forward stage is a
//! coefficient-wise `affine -> tanh -> affine` map on even-blade coordinates
//! and does not commute with rotors.
//!
//! [`graph`] records the same computations on an autodiff tape.

mod block;
mod embedding;
pub mod graph;

pub use block::{
    attention_head, multi_head_attention, transformer_block, AttentionParams, BlockParams, FeedForward, HeadParams,
};
pub use embedding::{embed_sequence, EmbeddingTable};

use crate::algebra::{ensure_same, linear_combine, Multivector, Signature};
use crate::error::{Error, Result};

/// `ψ† φ`.
pub fn dirac_inner(psi: &Multivector, phi: &Multivector) -> Result<Multivector> {
    psi.reverse().geometric_product(phi)
}

/// `<ψ† φ>_0`; equals `norm_squared(ψ)` when `φ = ψ`.
pub fn dirac_scalar(psi: &Multivector, phi: &Multivector) -> Result<f64> {
    psi.reverse().scalar_product(phi)
}

/// Scale `d_s = 2^(n-1)` used to temper attention scores.
pub fn spinor_scale(sig: Signature) -> f64 {
    sig.even_dim() as f64
}

/// Max-shifted softmax.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::arg("softmax of an empty sequence"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::numeric("softmax input is not finite"));
    }
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttentionMask {
    /// Every query sees every key.
    Full,
    /// Query `i` sees keys `0..=i`.
    Causal,
}

impl AttentionMask {
    fn visible(&self, query: usize, keys: usize) -> usize {
        match self {
            AttentionMask::Full => keys,
            AttentionMask::Causal => (query + 1).min(keys),
        }
    }
}

/// Outputs together with the attention weights that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub outputs: Vec<Multivector>,
    /// `weights[i][j]`; zero for masked keys.
    pub weights: Vec<Vec<f64>>,
}

/// `softmax(<q_i† k_j>_0 / sqrt(d_s)) v_j` for every query.
pub fn spinor_attention(
    queries: &[Multivector],
    keys: &[Multivector],
    values: &[Multivector],
    d_s: f64,
) -> Result<Vec<Multivector>> {
    Ok(spinor_attention_masked(queries, keys, values, d_s, AttentionMask::Full)?.outputs)
}

pub fn spinor_attention_masked(
    queries: &[Multivector],
    keys: &[Multivector],
    values: &[Multivector],
    d_s: f64,
    mask: AttentionMask,
) -> Result<AttentionOutput> {
    if keys.is_empty() {
        return Err(Error::arg("attention needs at least one key"));
    }
    if keys.len() != values.len() {
        return Err(Error::arg(format!("attention has {} keys but {} values", keys.len(), values.len())));
    }
    if d_s.is_nan() || d_s <= 0.0 {
        return Err(Error::arg(format!("attention scale must be positive, got {d_s}")));
    }
    let sig = keys[0].signature();
    for x in queries.iter().chain(keys).chain(values) {
        ensure_same(&sig, &x.signature())?;
    }
    let temper = d_s.sqrt();
    let mut outputs = Vec::with_capacity(queries.len());
    let mut weights = Vec::with_capacity(queries.len());
    for (i, q) in queries.iter().enumerate() {
        let visible = mask.visible(i, keys.len());
        let qr = q.reverse();
        let scores =
            keys[..visible].iter().map(|k| Ok(qr.scalar_product(k)? / temper)).collect::<Result<Vec<f64>>>()?;
        let w = softmax(&scores)?;
        let terms: Vec<(f64, &Multivector)> = w.iter().copied().zip(&values[..visible]).collect();
        outputs.push(linear_combine(&terms)?);
        let mut row = w;
        row.resize(keys.len(), 0.0);
        weights.push(row);
    }
    Ok(AttentionOutput { outputs, weights })
}

/// Standard `softmax(Q Kᵀ / sqrt(d_k)) V` on plain coefficient vectors.
pub fn scaled_dot_product_attention(
    queries: &[Vec<f64>],
    keys: &[Vec<f64>],
    values: &[Vec<f64>],
    mask: AttentionMask,
) -> Result<Vec<Vec<f64>>> {
    if keys.is_empty() || keys.len() != values.len() {
        return Err(Error::arg("attention needs matching, non-empty keys and values"));
    }
    let d_k = keys[0].len() as f64;
    queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let visible = mask.visible(i, keys.len());
            let scores: Vec<f64> =
                keys[..visible].iter().map(|k| q.iter().zip(k).map(|(a, b)| a * b).sum::<f64>() / d_k.sqrt()).collect();
            let w = softmax(&scores)?;
            let mut out = vec![0.0; values[0].len()];
            for (wj, v) in w.iter().zip(values) {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += wj * x;
                }
            }
            Ok(out)
        })
        .collect()
}
