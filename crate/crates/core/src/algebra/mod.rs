//! Dense Clifford algebras Cl(p,q).
//!
//! Blades are bitmasks (bit `k` is `e_(k+1)`), products go through a
//! XOR-and-sign kernel, and every multivector stores all `2^n` coefficients.
//! The geometric product is a dense blade-pair expansion, so it costs
//! `O(4^n)` per call (see the `algebra` benchmark for measured timings).

mod blade;
mod exp;
mod multivector;
mod signature;

use std::ops::Deref;

pub use blade::blade_product;
pub(crate) use blade::{product_sign, reverse_sign};
pub use exp::{exp_bivector, exp_branch, exp_scaled_series, halving_count, ExpBranch, BRANCH_EPSILON, SERIES_TERMS};
pub(crate) use multivector::ensure_same;
pub use multivector::{linear_combine, Multivector};
pub use signature::{blade_name, Signature, MAX_DIMENSION};

use crate::error::{Error, Result};

/// Tolerance on `‖R‖² = 1` for rotors.
pub const ROTOR_TOLERANCE: f64 = 1e-9;

/// Even-grade multivector. Odd coefficients are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor(Multivector);

impl Spinor {
    pub fn new(mv: Multivector) -> Result<Self> {
        if !mv.is_even() {
            return Err(Error::arg(format!("spinor must be even-grade, got {mv}")));
        }
        Ok(Spinor(mv))
    }

    pub fn one(sig: Signature) -> Self {
        Spinor(Multivector::one(sig))
    }

    /// Even-subalgebra element from canonical even-blade coefficients.
    pub fn from_even_coeffs(sig: Signature, coeffs: &[f64]) -> Result<Self> {
        Multivector::even(sig, coeffs).map(Spinor)
    }

    pub fn as_multivector(&self) -> &Multivector {
        &self.0
    }

    pub fn into_multivector(self) -> Multivector {
        self.0
    }

    /// Geometric product, which stays in the even subalgebra.
    pub fn mul(&self, other: &Spinor) -> Result<Spinor> {
        self.0.geometric_product(&other.0).map(Spinor)
    }

    pub fn reverse(&self) -> Spinor {
        Spinor(self.0.reverse())
    }

    pub fn scale(&self, factor: f64) -> Result<Spinor> {
        self.0.scale(factor).map(Spinor)
    }

    pub fn neg(&self) -> Spinor {
        Spinor(self.0.neg())
    }
}

impl Deref for Spinor {
    type Target = Multivector;

    fn deref(&self) -> &Multivector {
        &self.0
    }
}

impl From<Spinor> for Multivector {
    fn from(s: Spinor) -> Multivector {
        s.0
    }
}

/// Unit spinor: `<R† R>_0 = 1` within [`ROTOR_TOLERANCE`], so `R⁻¹ = R†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotor(Spinor);

impl Rotor {
    pub fn new(spinor: Spinor) -> Result<Self> {
        let n2 = spinor.norm_squared();
        if (n2 - 1.0).abs() > ROTOR_TOLERANCE {
            return Err(Error::arg(format!("rotor must have unit norm, got ‖R‖² = {n2}")));
        }
        Ok(Rotor(spinor))
    }

    pub fn from_multivector(mv: Multivector) -> Result<Self> {
        Rotor::new(Spinor::new(mv)?)
    }

    pub fn identity(sig: Signature) -> Self {
        Rotor(Spinor::one(sig))
    }

    pub fn as_spinor(&self) -> &Spinor {
        &self.0
    }

    pub fn into_spinor(self) -> Spinor {
        self.0
    }

    pub fn inverse(&self) -> Rotor {
        Rotor(self.0.reverse())
    }

    pub fn mul(&self, other: &Rotor) -> Result<Rotor> {
        Ok(Rotor(self.0.mul(&other.0)?))
    }

    pub fn neg(&self) -> Rotor {
        Rotor(self.0.neg())
    }

    /// Representative of `±R` with non-negative scalar part.
    pub fn canonical_sign(&self) -> Rotor {
        if self.scalar_part() < 0.0 {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl Deref for Rotor {
    type Target = Multivector;

    fn deref(&self) -> &Multivector {
        &self.0 .0
    }
}

impl From<Rotor> for Spinor {
    fn from(r: Rotor) -> Spinor {
        r.0
    }
}
