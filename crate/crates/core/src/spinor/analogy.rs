use std::cmp::Ordering;

use crate::algebra::{ensure_same, Multivector, Rotor, Spinor};
use crate::error::{Error, Result};
use crate::spinor::apply_one_sided;

/// `ψ_phrase = ψ_1 ψ_2 ⋯ ψ_n`, multiplied left to right.
pub fn phrase_embedding(spinors: &[Spinor]) -> Result<Spinor> {
    let (first, rest) =
        spinors.split_first().ok_or_else(|| Error::arg("phrase_embedding needs at least one spinor"))?;
    rest.iter().try_fold(first.clone(), |acc, s| acc.mul(s))
}

/// Normalized Dirac score `<a† b>_0 / sqrt(|‖a‖² ‖b‖²|)`.
///
/// Zero when either norm vanishes. Clamped to `[-1, 1]` in Euclidean signatures,
/// where Cauchy–Schwarz bounds it.
pub fn similarity(a: &Multivector, b: &Multivector) -> Result<f64> {
    ensure_same(&a.signature(), &b.signature())?;
    let num = a.reverse().scalar_product(b)?;
    let denom = (a.norm_squared() * b.norm_squared()).abs().sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let s = num / denom;
    Ok(if a.signature().is_euclidean() { s.clamp(-1.0, 1.0) } else { s })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranked {
    pub token: usize,
    pub score: f64,
}

/// Ranks the vocabulary against `R ψ_source`: descending score, ties by ascending index.
pub fn analogy_apply(r: &Rotor, source: &Spinor, vocab: &[Spinor]) -> Result<Vec<Ranked>> {
    if vocab.is_empty() {
        return Err(Error::arg("analogy_apply needs a non-empty vocabulary"));
    }
    let query = apply_one_sided(r, source)?;
    let mut ranked = vocab
        .iter()
        .enumerate()
        .map(|(token, psi)| Ok(Ranked { token, score: similarity(&query, psi)? }))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then(a.token.cmp(&b.token)));
    Ok(ranked)
}
