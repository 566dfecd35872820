use std::collections::HashMap;

use crate::algebra::{exp_bivector, Multivector, Signature, Spinor};
use crate::error::{Error, Result};
use crate::spinor::{apply_position, positional_rotor, PositionalConfig};

/// Vocabulary with one bivector generator per token; `ψ_w = exp(B_w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    sig: Signature,
    vocab: Vec<String>,
    generators: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(sig: Signature, vocab: Vec<String>, generators: Vec<Vec<f64>>) -> Result<Self> {
        if vocab.len() != generators.len() {
            return Err(Error::arg(format!("{} tokens but {} generators", vocab.len(), generators.len())));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, (token, g)) in vocab.iter().zip(&generators).enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::arg(format!("duplicate vocabulary entry {token:?}")));
            }
            if g.len() != sig.bivector_count() {
                return Err(Error::arg(format!(
                    "generator for {token:?} has {} coefficients, {sig} needs {}",
                    g.len(),
                    sig.bivector_count()
                )));
            }
            if let Some(bad) = g.iter().find(|c| !c.is_finite()) {
                return Err(Error::arg(format!("generator for {token:?} has non-finite value {bad}")));
            }
        }
        Ok(EmbeddingTable { sig, vocab, generators, index })
    }

    /// Table whose every generator is zero, so every `ψ_w = 1`.
    pub fn zeros(sig: Signature, vocab: Vec<String>) -> Result<Self> {
        let generators = vec![vec![0.0; sig.bivector_count()]; vocab.len()];
        EmbeddingTable::new(sig, vocab, generators)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn token_id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Result<&str> {
        self.vocab
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::arg(format!("token id {id} out of range for vocabulary of {}", self.len())))
    }

    pub fn generator(&self, id: usize) -> Result<Multivector> {
        self.token(id)?;
        Multivector::bivector(self.sig, &self.generators[id])
    }

    pub fn set_generator(&mut self, id: usize, coeffs: &[f64]) -> Result<()> {
        self.token(id)?;
        if coeffs.len() != self.sig.bivector_count() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::arg(format!("invalid generator for token id {id}")));
        }
        self.generators[id].copy_from_slice(coeffs);
        Ok(())
    }

    pub fn spinor(&self, id: usize) -> Result<Spinor> {
        exp_bivector(&self.generator(id)?)
    }

    pub fn spinors(&self) -> Result<Vec<Spinor>> {
        (0..self.len()).map(|id| self.spinor(id)).collect()
    }
}

/// Token spinors with the position-`p` rotor applied on the left.
pub fn embed_sequence(tokens: &[usize], table: &EmbeddingTable, cfg: &PositionalConfig) -> Result<Vec<Spinor>> {
    crate::algebra::ensure_same(&table.signature(), &cfg.signature())?;
    tokens.iter().enumerate().map(|(p, &id)| apply_position(&positional_rotor(p, cfg)?, &table.spinor(id)?)).collect()
}
