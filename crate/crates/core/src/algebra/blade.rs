use crate::algebra::Signature;
use crate::error::{Error, Result};

/// Number of transpositions needed to bring `e_a e_b` into ascending order, mod 2.
#[inline]
pub(crate) fn reorder_parity(a: u32, b: u32) -> u32 {
    let mut shifted = a >> 1;
    let mut swaps = 0;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps & 1
}

/// Sign of `e_a e_b` without range checks. Both reordering and metric contractions.
#[inline]
pub(crate) fn product_sign(sig: &Signature, a: u32, b: u32) -> f64 {
    let flips = reorder_parity(a, b) + (a & b & sig.negative_mask()).count_ones();
    if flips & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Product of two basis blades: `e_a e_b = sign * e_(a xor b)`.
///
/// The sign is never zero since Cl(p,q) has no null basis vectors.
pub fn blade_product(sig: &Signature, a: u32, b: u32) -> Result<(i8, u32)> {
    let dim = sig.dim() as u32;
    if a >= dim || b >= dim {
        return Err(Error::arg(format!("blade bitmask out of range for {sig}: {a:#b}, {b:#b}")));
    }
    let sign = if product_sign(sig, a, b) > 0.0 { 1 } else { -1 };
    Ok((sign, a ^ b))
}

/// Sign `(-1)^(k(k-1)/2)` picked up by a grade-`k` blade under reversion.
#[inline]
pub(crate) fn reverse_sign(grade: u32) -> f64 {
    if (grade / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
