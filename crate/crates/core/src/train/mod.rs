//! Desk-scale training tasks: analogy rotors, toy language models and signature sweeps.
//!
//! Everything here is single-threaded and seeded, so a fixed [`TrainConfig`] and corpus
//! reproduce the same trajectory bit for bit.

mod baseline;
mod corpus;
mod lm;
mod rotor_fit;

use std::time::Instant;

pub use baseline::{sinusoidal_position, train_baseline_vector_lm, BaselineLm};
pub use corpus::ToyCorpus;
pub use lm::{
    perplexity, train_lm, EpochRecord, LanguageModel, SpinorLm, TrainReport, FFW_INIT_SCALE, GRADIENT_CLIP, INIT_SCALE,
};
pub use rotor_fit::{analogy_eval, fit_rotor, FitOptions, RotorFit};

use crate::algebra::Signature;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Window (sequence) length used for training and evaluation.
    pub batch: usize,
    pub signature: Signature,
}

impl TrainConfig {
    pub fn new(signature: Signature) -> Self {
        TrainConfig { seed: 0, learning_rate: 0.5, epochs: 30, batch: 8, signature }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::arg(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch == 0 {
            return Err(Error::arg("batch (sequence length) must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub signature: Signature,
    pub validation_perplexity: f64,
    pub seconds: f64,
}

/// Largest `n` accepted by [`ablate_signatures`].
pub const ABLATION_MAX_DIMENSION: usize = 6;

/// Trains one spinor model per signature, in input order.
pub fn ablate_signatures(corpus: &ToyCorpus, signatures: &[Signature], cfg: &TrainConfig) -> Result<Vec<AblationRow>> {
    if signatures.is_empty() {
        return Err(Error::arg("ablation needs at least one signature"));
    }
    if let Some(big) = signatures.iter().find(|s| s.n() > ABLATION_MAX_DIMENSION) {
        return Err(Error::arg(format!("ablation is limited to n ≤ {ABLATION_MAX_DIMENSION}, got {big}")));
    }
    signatures
        .iter()
        .map(|&signature| {
            let start = Instant::now();
            let (_, report) = train_lm(corpus, &TrainConfig { signature, ..cfg.clone() })?;
            Ok(AblationRow {
                signature,
                validation_perplexity: report.last().validation_perplexity,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}
