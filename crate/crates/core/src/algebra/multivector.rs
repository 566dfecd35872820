use std::fmt;

use crate::algebra::blade::{product_sign, reverse_sign};
use crate::algebra::{blade_name, Signature};
use crate::error::{Error, Result};

/// Dense multivector: one coefficient per blade, stored at the blade's bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    sig: Signature,
    coeffs: Vec<f64>,
}

pub(crate) fn ensure_same(a: &Signature, b: &Signature) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SignatureMismatch { left: *a, right: *b })
    }
}

fn ensure_finite(coeffs: &[f64], what: &str) -> Result<()> {
    match coeffs.iter().position(|c| !c.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::numeric(format!(
            "{what} produced non-finite coefficient {} at blade {}",
            coeffs[i],
            blade_name(i as u32)
        ))),
    }
}

impl Multivector {
    pub fn zero(sig: Signature) -> Self {
        Multivector { sig, coeffs: vec![0.0; sig.dim()] }
    }

    pub fn scalar(sig: Signature, value: f64) -> Self {
        let mut mv = Multivector::zero(sig);
        mv.coeffs[0] = value;
        mv
    }

    pub fn one(sig: Signature) -> Self {
        Multivector::scalar(sig, 1.0)
    }

    /// Single blade `coeff * e_mask`.
    pub fn blade(sig: Signature, mask: u32, coeff: f64) -> Result<Self> {
        if mask as usize >= sig.dim() {
            return Err(Error::arg(format!("blade {mask:#b} out of range for {sig}")));
        }
        let mut mv = Multivector::zero(sig);
        mv.coeffs[mask as usize] = coeff;
        Ok(mv)
    }

    /// Unit basis blade from one-based, strictly ascending vector indices: `basis(sig, &[1, 3])` is e13.
    pub fn basis(sig: Signature, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        let mut last = 0;
        for &i in indices {
            if i <= last || i > sig.n() {
                return Err(Error::arg(format!(
                    "basis indices must be ascending within 1..={}, got {indices:?}",
                    sig.n()
                )));
            }
            mask |= 1 << (i - 1);
            last = i;
        }
        Multivector::blade(sig, mask, 1.0)
    }

    /// Grade-1 element with the given components along e1..en.
    pub fn vector(sig: Signature, components: &[f64]) -> Result<Self> {
        if components.len() != sig.n() {
            return Err(Error::arg(format!("expected {} vector components, got {}", sig.n(), components.len())));
        }
        let mut mv = Multivector::zero(sig);
        for (k, &c) in components.iter().enumerate() {
            mv.coeffs[1 << k] = c;
        }
        ensure_finite(&mv.coeffs, "vector")?;
        Ok(mv)
    }

    /// Grade-2 element from coefficients in bivector serialization order.
    pub fn bivector(sig: Signature, components: &[f64]) -> Result<Self> {
        let blades = sig.bivector_blades();
        if components.len() != blades.len() {
            return Err(Error::arg(format!(
                "expected {} bivector components for {sig}, got {}",
                blades.len(),
                components.len()
            )));
        }
        let mut mv = Multivector::zero(sig);
        for (&b, &c) in blades.iter().zip(components) {
            mv.coeffs[b as usize] = c;
        }
        ensure_finite(&mv.coeffs, "bivector")?;
        Ok(mv)
    }

    /// Element of the even subalgebra from coefficients in canonical even-blade order.
    pub fn even(sig: Signature, components: &[f64]) -> Result<Self> {
        let blades = sig.even_blades();
        if components.len() != blades.len() {
            return Err(Error::arg(format!(
                "expected {} even components for {sig}, got {}",
                blades.len(),
                components.len()
            )));
        }
        let mut mv = Multivector::zero(sig);
        for (&b, &c) in blades.iter().zip(components) {
            mv.coeffs[b as usize] = c;
        }
        ensure_finite(&mv.coeffs, "even multivector")?;
        Ok(mv)
    }

    /// Coefficients indexed by blade bitmask.
    pub fn from_coeffs(sig: Signature, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != sig.dim() {
            return Err(Error::arg(format!("{sig} needs {} coefficients, got {}", sig.dim(), coeffs.len())));
        }
        ensure_finite(&coeffs, "input")?;
        Ok(Multivector { sig, coeffs })
    }

    pub(crate) fn from_coeffs_unchecked(sig: Signature, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), sig.dim());
        Multivector { sig, coeffs }
    }

    pub(crate) fn checked(self, what: &str) -> Result<Self> {
        ensure_finite(&self.coeffs, what)?;
        Ok(self)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs.get(mask as usize).copied().unwrap_or(0.0)
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Bivector coefficients in serialization order.
    pub fn bivector_coeffs(&self) -> Vec<f64> {
        self.sig.bivector_blades().into_iter().map(|b| self.coeffs[b as usize]).collect()
    }

    /// Even-blade coefficients in canonical order.
    pub fn even_coeffs(&self) -> Vec<f64> {
        self.sig.even_blades().into_iter().map(|b| self.coeffs[b as usize]).collect()
    }

    /// True when every coefficient outside grade `k` is exactly zero.
    pub fn is_grade(&self, k: usize) -> bool {
        self.coeffs.iter().enumerate().all(|(i, &c)| c == 0.0 || (i as u32).count_ones() as usize == k)
    }

    /// True when every odd-grade coefficient is exactly zero.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, &c)| c == 0.0 || (i as u32).count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, &c)| c == 0.0 || (i as u32).count_ones() % 2 == 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest componentwise absolute difference. Infinite on signature mismatch.
    pub fn max_abs_diff(&self, other: &Multivector) -> f64 {
        if self.sig != other.sig {
            return f64::INFINITY;
        }
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Sum of squared coefficients (Euclidean norm of the coefficient vector).
    pub fn coeff_norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub(crate) fn gp_unchecked(&self, other: &Multivector) -> Multivector {
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                out[i ^ j] += product_sign(&self.sig, i as u32, j as u32) * a * b;
            }
        }
        Multivector::from_coeffs_unchecked(self.sig, out)
    }

    /// Bilinear blade-pair expansion keeping only pairs accepted by `keep`.
    fn filtered_product(&self, other: &Multivector, keep: impl Fn(u32, u32) -> bool) -> Multivector {
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 || !keep(i as u32, j as u32) {
                    continue;
                }
                out[i ^ j] += product_sign(&self.sig, i as u32, j as u32) * a * b;
            }
        }
        Multivector::from_coeffs_unchecked(self.sig, out)
    }

    pub fn geometric_product(&self, other: &Multivector) -> Result<Multivector> {
        ensure_same(&self.sig, &other.sig)?;
        self.gp_unchecked(other).checked("geometric product")
    }

    /// Outer (wedge) product: grade `r + s` part of each blade-pair product.
    pub fn outer_product(&self, other: &Multivector) -> Result<Multivector> {
        ensure_same(&self.sig, &other.sig)?;
        self.filtered_product(other, |a, b| a & b == 0).checked("outer product")
    }

    /// Left contraction `A ⌋ B`: grade `s - r` part, zero unless the left blade divides the right.
    pub fn inner_product(&self, other: &Multivector) -> Result<Multivector> {
        ensure_same(&self.sig, &other.sig)?;
        self.filtered_product(other, |a, b| a & !b == 0).checked("inner product")
    }

    /// Scalar part of `self * other`, without forming the full product.
    pub fn scalar_product(&self, other: &Multivector) -> Result<f64> {
        ensure_same(&self.sig, &other.sig)?;
        let s = self.scalar_product_unchecked(other);
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::numeric("scalar product is not finite"))
        }
    }

    pub(crate) fn scalar_product_unchecked(&self, other: &Multivector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(
                |(i, (a, b))| {
                    if *a == 0.0 || *b == 0.0 {
                        0.0
                    } else {
                        product_sign(&self.sig, i as u32, i as u32) * a * b
                    }
                },
            )
            .sum()
    }

    pub fn reverse(&self) -> Multivector {
        self.map_by_grade(reverse_sign)
    }

    /// Grade involution: negates odd grades.
    pub fn grade_involution(&self) -> Multivector {
        self.map_by_grade(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    fn map_by_grade(&self, sign: impl Fn(u32) -> f64) -> Multivector {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| sign((i as u32).count_ones()) * c).collect();
        Multivector::from_coeffs_unchecked(self.sig, coeffs)
    }

    pub fn grade_project(&self, k: usize) -> Result<Multivector> {
        if k > self.sig.n() {
            return Err(Error::arg(format!("grade {k} exceeds dimension {} of {}", self.sig.n(), self.sig)));
        }
        Ok(self.grade_project_unchecked(k))
    }

    pub(crate) fn grade_project_unchecked(&self, k: usize) -> Multivector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if (i as u32).count_ones() as usize == k { c } else { 0.0 })
            .collect();
        Multivector::from_coeffs_unchecked(self.sig, coeffs)
    }

    /// `<reverse(self) * self>_0`. Sum of squared coefficients when Euclidean, possibly negative otherwise.
    pub fn norm_squared(&self) -> f64 {
        self.reverse().scalar_product_unchecked(self)
    }

    pub fn scale(&self, factor: f64) -> Result<Multivector> {
        self.scale_unchecked(factor).checked("scaling")
    }

    pub(crate) fn scale_unchecked(&self, factor: f64) -> Multivector {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Multivector::from_coeffs_unchecked(self.sig, coeffs)
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector> {
        linear_combine(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &Multivector) -> Result<Multivector> {
        linear_combine(&[(1.0, self), (-1.0, other)])
    }

    pub fn neg(&self) -> Multivector {
        self.scale_unchecked(-1.0)
    }
}

/// Coefficient-wise weighted sum `Σ w_i A_i`.
pub fn linear_combine(terms: &[(f64, &Multivector)]) -> Result<Multivector> {
    let (_, first) = terms.first().ok_or_else(|| Error::arg("linear_combine needs at least one term"))?;
    let sig = first.sig;
    let mut out = vec![0.0; sig.dim()];
    for (w, mv) in terms {
        ensure_same(&sig, &mv.sig)?;
        for (o, c) in out.iter_mut().zip(&mv.coeffs) {
            *o += w * c;
        }
    }
    Multivector::from_coeffs_unchecked(sig, out).checked("linear combination")
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for blade in self.sig.canonical_blades() {
            let c = self.coeffs[blade as usize];
            if c == 0.0 {
                continue;
            }
            if wrote {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            if blade == 0 {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{}", blade_name(blade))?;
            } else {
                write!(f, "{}*{}", c.abs(), blade_name(blade))?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    fn e(s: Signature, idx: &[usize]) -> Multivector {
        Multivector::basis(s, idx).unwrap()
    }

    #[test]
    fn zero_divisor_in_cl1() {
        let s = sig(1, 0);
        let one = Multivector::one(s);
        let a = one.add(&e(s, &[1])).unwrap();
        let b = one.sub(&e(s, &[1])).unwrap();
        assert_eq!(a.geometric_product(&b).unwrap(), Multivector::zero(s));
    }

    #[test]
    fn e1_e2_is_e12_and_anticommutes() {
        let s = sig(3, 0);
        let e1 = e(s, &[1]);
        let e2 = e(s, &[2]);
        let e12 = e1.geometric_product(&e2).unwrap();
        assert_eq!(e12, e(s, &[1, 2]));
        let e21 = e2.geometric_product(&e1).unwrap();
        assert_ne!(e12, e21);
        assert_eq!(e21, e12.neg());
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = Multivector::one(sig(2, 0));
        let b = Multivector::one(sig(1, 1));
        assert!(matches!(a.geometric_product(&b), Err(Error::SignatureMismatch { .. })));
        assert!(linear_combine(&[(1.0, &a), (1.0, &b)]).is_err());
    }

    #[test]
    fn outer_and_inner_examples() {
        let s = sig(2, 0);
        let e1 = e(s, &[1]);
        assert_eq!(e1.outer_product(&e1).unwrap(), Multivector::zero(s));
        assert_eq!(e1.inner_product(&e(s, &[1, 2])).unwrap(), e(s, &[2]));
        let two = Multivector::scalar(s, 2.0);
        assert_eq!(two.outer_product(&e1).unwrap(), e1.scale(2.0).unwrap());
        // Left contraction vanishes when the left grade exceeds the right.
        assert_eq!(e(s, &[1, 2]).inner_product(&e1).unwrap(), Multivector::zero(s));
    }

    #[test]
    fn reverse_examples() {
        let s = sig(3, 0);
        assert_eq!(e(s, &[1, 2]).reverse(), e(s, &[1, 2]).neg());
        assert_eq!(e(s, &[1, 2, 3]).reverse(), e(s, &[1, 2, 3]).neg());
        let a = Multivector::one(s).add(&e(s, &[1])).unwrap();
        assert_eq!(a.reverse(), a);
    }

    #[test]
    fn grade_projection_examples() {
        let s = sig(2, 0);
        let a = linear_combine(&[(1.0, &Multivector::one(s)), (1.0, &e(s, &[1])), (1.0, &e(s, &[1, 2]))]).unwrap();
        assert_eq!(a.grade_project(1).unwrap(), e(s, &[1]));
        assert!(a.grade_project(3).is_err());
        let b = Multivector::scalar(s, 3.0).add(&e(s, &[1, 2])).unwrap();
        assert_eq!(b.scalar_part(), 3.0);
    }

    #[test]
    fn linear_combine_examples() {
        let s = sig(2, 0);
        let a = Multivector::from_coeffs(s, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(linear_combine(&[(1.0, &a), (-1.0, &a)]).unwrap(), Multivector::zero(s));
        assert_eq!(linear_combine(&[(2.0, &e(s, &[1]))]).unwrap(), Multivector::vector(s, &[2.0, 0.0]).unwrap());
        assert_eq!(
            linear_combine(&[(0.5, &e(s, &[1])), (0.5, &e(s, &[2]))]).unwrap(),
            Multivector::vector(s, &[0.5, 0.5]).unwrap()
        );
        assert!(linear_combine(&[]).is_err());
    }

    #[test]
    fn norm_squared_examples() {
        assert_eq!(e(sig(3, 0), &[1]).norm_squared(), 1.0);
        let s = sig(2, 0);
        let psi = Multivector::scalar(s, 3.0).add(&e(s, &[1, 2]).scale(4.0).unwrap()).unwrap();
        // (3 - 4e12)(3 + 4e12) = 9 + 16
        let brute = psi.reverse().geometric_product(&psi).unwrap();
        assert_eq!(brute.scalar_part(), 25.0);
        assert_eq!(psi.norm_squared(), 25.0);
        assert_eq!(e(sig(1, 1), &[2]).norm_squared(), -1.0);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let s = sig(1, 0);
        assert!(Multivector::from_coeffs(s, vec![f64::NAN, 0.0]).is_err());
        let big = Multivector::scalar(s, 1e200);
        assert!(matches!(big.geometric_product(&big), Err(Error::Numeric(_))));
    }

    #[test]
    fn display_uses_canonical_order() {
        let s = sig(2, 0);
        let a = Multivector::from_coeffs(s, vec![1.0, 0.0, -2.0, 0.5]).unwrap();
        assert_eq!(a.to_string(), "1 - 2*e2 + 0.5*e12");
        assert_eq!(Multivector::zero(s).to_string(), "0");
    }
}
