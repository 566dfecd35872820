//! Spinor word embeddings over Clifford algebras Cl(p,q).
//!
//! - [`algebra`]: signatures, dense multivectors, products and bivector exponentials.
//! - [`spinor`]: rotors, reflections, one-sided spinor action, positional rotors, analogies.
//! - [`autodiff`]: reverse-mode tape over multivector operations.
//! - [`attention`]: Dirac-product attention and a single transformer block.
//! - [`train`]: rotor fitting, toy language models and signature ablations.
//! - [`io`]: model files, corpora, Cayley tables and PCA projections.

pub mod algebra;
pub mod attention;
pub mod autodiff;
mod error;
pub mod io;
pub mod spinor;
pub mod train;

pub use algebra::{Multivector, Rotor, Signature, Spinor};
pub use attention::{AttentionMask, BlockParams, EmbeddingTable};
pub use error::{Error, ErrorKind, Result};
pub use io::{Model, ModelDocument, ModelMetadata};
pub use spinor::PositionalConfig;
pub use train::{BaselineLm, SpinorLm, ToyCorpus, TrainConfig, TrainReport};
