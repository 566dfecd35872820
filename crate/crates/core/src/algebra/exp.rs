use crate::algebra::{Multivector, Spinor};
use crate::error::{Error, Result};

/// Threshold on `|<B B>_0|` below which the closed forms are not used.
pub const BRANCH_EPSILON: f64 = 1e-12;

/// Taylor terms in the scaled series (orders 0 through 15).
pub const SERIES_TERMS: usize = 16;

/// Which formula `exp_bivector` used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpBranch {
    /// `B² < 0`: cos/sin.
    Circular,
    /// `B² > 0`: cosh/sinh.
    Hyperbolic,
    /// Null or non-simple bivector: scaling and squaring.
    Series,
}

/// Classifies a bivector by its square.
pub fn exp_branch(b: &Multivector) -> ExpBranch {
    let sq = b.gp_unchecked(b);
    let s = sq.scalar_part();
    let residual = sq.coeffs()[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let scale = b.coeff_norm_squared().max(1.0);
    if residual > BRANCH_EPSILON * scale {
        ExpBranch::Series
    } else if s < -BRANCH_EPSILON {
        ExpBranch::Circular
    } else if s > BRANCH_EPSILON {
        ExpBranch::Hyperbolic
    } else {
        ExpBranch::Series
    }
}

/// Exponential of a bivector. Always even-grade.
pub fn exp_bivector(b: &Multivector) -> Result<Spinor> {
    if !b.is_grade(2) {
        return Err(Error::arg(format!("exp_bivector expects a pure bivector, got {b}")));
    }
    let out = match exp_branch(b) {
        ExpBranch::Circular => {
            let mag = (-b.gp_unchecked(b).scalar_part()).sqrt();
            let mut out = b.scale_unchecked(mag.sin() / mag);
            out.coeffs_mut()[0] = mag.cos();
            out
        }
        ExpBranch::Hyperbolic => {
            let mag = b.gp_unchecked(b).scalar_part().sqrt();
            let mut out = b.scale_unchecked(mag.sinh() / mag);
            out.coeffs_mut()[0] = mag.cosh();
            out
        }
        ExpBranch::Series => exp_scaled_series(b),
    };
    Spinor::new(out.checked("bivector exponential")?)
}

/// Number of halvings applied before the series: smallest `k` with `‖B‖₁ / 2^k ≤ 0.5`.
pub fn halving_count(b: &Multivector) -> u32 {
    let l1: f64 = b.coeffs().iter().map(|c| c.abs()).sum();
    let mut k = 0;
    let mut scaled = l1;
    while scaled > 0.5 && k < 1100 {
        scaled *= 0.5;
        k += 1;
    }
    k
}

/// Scaling and squaring: `exp(B) = exp(B / 2^k)^(2^k)` with a truncated Taylor series.
pub fn exp_scaled_series(b: &Multivector) -> Multivector {
    let k = halving_count(b);
    let x = b.scale_unchecked(0.5f64.powi(k as i32));
    let mut term = Multivector::one(b.signature());
    let mut sum = term.clone();
    for m in 1..SERIES_TERMS {
        term = term.gp_unchecked(&x).scale_unchecked(1.0 / m as f64);
        for (s, t) in sum.coeffs_mut().iter_mut().zip(term.coeffs()) {
            *s += t;
        }
    }
    for _ in 0..k {
        sum = sum.gp_unchecked(&sum);
    }
    sum
}
