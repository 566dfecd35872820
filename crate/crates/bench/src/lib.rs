//! Shared inputs for the benchmarks.

use spinembed_core::{Multivector, Signature, Spinor};

/// Deterministic, well-spread coefficients without pulling in an RNG.
fn coefficient(seed: u64, k: usize) -> f64 {
    ((seed as f64 + 1.0) * 12.9898 + k as f64 * 78.233).sin() * 0.5
}

pub fn sample_multivector(sig: Signature, seed: u64) -> Multivector {
    let coeffs = (0..sig.dim()).map(|k| coefficient(seed, k)).collect();
    Multivector::from_coeffs(sig, coeffs).expect("dense coefficients")
}

pub fn sample_bivector(sig: Signature, seed: u64, scale: f64) -> Multivector {
    let coeffs: Vec<f64> = (0..sig.bivector_count()).map(|k| scale * coefficient(seed, k)).collect();
    Multivector::bivector(sig, &coeffs).expect("bivector coefficients")
}

pub fn sample_spinors(sig: Signature, count: usize) -> Vec<Spinor> {
    (0..count)
        .map(|i| {
            spinembed_core::algebra::exp_bivector(&sample_bivector(sig, i as u64, 1.0)).expect("finite exponential")
        })
        .collect()
}
