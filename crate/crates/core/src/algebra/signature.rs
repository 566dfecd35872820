use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension of the generating vector space.
pub const MAX_DIMENSION: usize = 12;

/// Metric signature `(p, q)` of the Clifford algebra Cl(p,q).
///
/// The first `p` basis vectors square to `+1`, the remaining `q` to `-1`.
/// Blades are addressed by bitmask: bit `k` set means `e_(k+1)` is a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSignature", into = "RawSignature")]
pub struct Signature {
    p: u8,
    q: u8,
}

#[derive(Serialize, Deserialize)]
struct RawSignature {
    p: usize,
    q: usize,
}

impl TryFrom<RawSignature> for Signature {
    type Error = Error;

    fn try_from(raw: RawSignature) -> Result<Self> {
        Signature::new(raw.p, raw.q)
    }
}

impl From<Signature> for RawSignature {
    fn from(sig: Signature) -> Self {
        RawSignature { p: sig.p(), q: sig.q() }
    }
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        let n = p + q;
        if n == 0 || n > MAX_DIMENSION {
            return Err(Error::arg(format!("Cl({p},{q}) has dimension {n}; supported range is 1..={MAX_DIMENSION}")));
        }
        Ok(Signature { p: p as u8, q: q as u8 })
    }

    /// Euclidean signature Cl(n,0).
    pub fn euclidean(n: usize) -> Result<Self> {
        Signature::new(n, 0)
    }

    pub fn p(&self) -> usize {
        self.p as usize
    }

    pub fn q(&self) -> usize {
        self.q as usize
    }

    /// Dimension `n = p + q` of the vector space.
    pub fn n(&self) -> usize {
        self.p() + self.q()
    }

    /// Number of basis blades, `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// Dimension of the even subalgebra, `2^(n-1)`.
    pub fn even_dim(&self) -> usize {
        1 << (self.n() - 1)
    }

    /// Number of bivector blades, `n(n-1)/2`.
    pub fn bivector_count(&self) -> usize {
        let n = self.n();
        n * (n - 1) / 2
    }

    pub fn is_euclidean(&self) -> bool {
        self.q == 0
    }

    /// Square of the basis vector `e_(k+1)` (zero-based `k`).
    pub fn basis_square(&self, k: usize) -> f64 {
        if k < self.p() {
            1.0
        } else {
            -1.0
        }
    }

    /// Bitmask of the basis vectors that square to `-1`.
    pub(crate) fn negative_mask(&self) -> u32 {
        ((1u32 << self.q) - 1) << self.p
    }

    /// All blade bitmasks in canonical order: ascending grade, then ascending bitmask.
    pub fn canonical_blades(&self) -> Vec<u32> {
        let mut blades: Vec<u32> = (0..self.dim() as u32).collect();
        blades.sort_by_key(|&b| (b.count_ones(), b));
        blades
    }

    /// Blades of a single grade in canonical order.
    pub fn blades_of_grade(&self, grade: usize) -> Vec<u32> {
        (0..self.dim() as u32).filter(|b| b.count_ones() as usize == grade).collect()
    }

    /// Bivector blades in serialization order: e12, e13, e23, e14, e24, e34, ...
    pub fn bivector_blades(&self) -> Vec<u32> {
        self.blades_of_grade(2)
    }

    /// Even-grade blades in canonical order.
    pub fn even_blades(&self) -> Vec<u32> {
        self.canonical_blades().into_iter().filter(|b| b.count_ones() % 2 == 0).collect()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl({},{})", self.p, self.q)
    }
}

/// Human-readable name of a blade: `1`, `e1`, `e13`, or `e1_10` once indices exceed 9.
pub fn blade_name(blade: u32) -> String {
    if blade == 0 {
        return "1".to_string();
    }
    let indices: Vec<usize> = (0..32).filter(|k| blade >> k & 1 == 1).map(|k| k + 1).collect();
    let wide = indices.iter().any(|&i| i > 9);
    let parts: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
    format!("e{}", parts.join(if wide { "_" } else { "" }))
}
