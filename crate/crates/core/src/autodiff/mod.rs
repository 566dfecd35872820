//! Reverse-mode differentiation over multivector computations.
//!
//! A [`Tape`] records each operation with its eagerly computed value; a
//! [`Tape::backward`] sweep from a scalar node returns adjoints for every
//! coefficient of every node. Gradients are always taken with respect to raw
//! blade coefficients: callers that parameterize (bivector-only generators,
//! even-only weights) simply ignore the other coordinates.
//!
//! A tape is single-writer. Separate tapes are independent and can live on
//! separate threads.

mod check;
mod tape;

pub use check::{grad_check, DEFAULT_STEP};
pub use tape::{Gradients, OpKind, Shape, Tape, Var};

#[cfg(test)]
mod tests;
