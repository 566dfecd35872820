use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ensure_same, exp_bivector, Multivector, Rotor, Signature, Spinor};
use crate::attention::EmbeddingTable;
use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::spinor::analogy_apply;

/// Sufficient-decrease constant for the backtracking line search.
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub seed: u64,
    /// Initial step length; adapted by the line search.
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Stops once the gradient norm falls below this.
    pub gradient_tolerance: f64,
    /// Half-width of the uniform initial generator.
    pub init_scale: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { seed: 0, learning_rate: 0.1, max_iterations: 5000, gradient_tolerance: 1e-10, init_scale: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotorFit {
    /// `exp(B)` as fitted. Its sign matters for the one-sided action; use
    /// [`Rotor::canonical_sign`] when only the two-sided class is of interest.
    pub rotor: Rotor,
    pub generator: Vec<f64>,
    pub loss: f64,
    /// Loss after every accepted step, starting with the initial loss.
    pub history: Vec<f64>,
}

fn loss_at(pairs: &[(Spinor, Spinor)], sig: Signature, b: &[f64]) -> Result<f64> {
    let r = exp_bivector(&Multivector::bivector(sig, b)?)?;
    pairs.iter().try_fold(0.0, |acc, (s, t)| Ok(acc + r.mul(s)?.sub(t)?.coeff_norm_squared()))
}

fn loss_and_gradient(pairs: &[(Spinor, Spinor)], sig: Signature, b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let g = tape.leaf(&Multivector::bivector(sig, b)?);
    let r = tape.exp_bivector(g)?;
    let mut terms = Vec::with_capacity(pairs.len());
    for (s, t) in pairs {
        let (s, t) = (tape.leaf(s), tape.leaf(t));
        let moved = tape.geometric_product(r, s)?;
        let d = tape.sub(moved, t)?;
        terms.push(tape.dot(d, d)?);
    }
    let loss = tape.sum(&terms)?;
    let grads = tape.backward(loss)?;
    Ok((tape.scalar(loss)?, grads.wrt_multivector(g, sig)?.bivector_coeffs()))
}

/// Gradient descent with backtracking on `Σ ‖exp(B)ψ_s − ψ_t‖²` over the bivector `B`.
pub fn fit_rotor(pairs: &[(Spinor, Spinor)], opts: &FitOptions) -> Result<RotorFit> {
    let Some((first, _)) = pairs.first() else {
        return Err(Error::arg("fit_rotor needs at least one pair"));
    };
    let sig = first.signature();
    for (s, t) in pairs {
        ensure_same(&sig, &s.signature())?;
        ensure_same(&sig, &t.signature())?;
    }
    if !(opts.learning_rate > 0.0 && opts.learning_rate.is_finite()) {
        return Err(Error::arg(format!("learning rate must be positive, got {}", opts.learning_rate)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = opts.init_scale;
    let mut b: Vec<f64> =
        (0..sig.bivector_count()).map(|_| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 }).collect();

    let (mut loss, mut grad) = loss_and_gradient(pairs, sig, &b)?;
    if !loss.is_finite() {
        return Err(Error::numeric(format!("initial loss is not finite (learning rate {})", opts.learning_rate)));
    }
    let mut history = vec![loss];
    let mut step = opts.learning_rate;
    for _ in 0..opts.max_iterations {
        let g2: f64 = grad.iter().map(|x| x * x).sum();
        if g2.sqrt() <= opts.gradient_tolerance {
            break;
        }
        let mut accepted = None;
        let mut saw_non_finite = false;
        while step > 1e-30 {
            let trial: Vec<f64> = b.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            match loss_at(pairs, sig, &trial) {
                Ok(l) if l.is_finite() && l <= loss - ARMIJO * step * g2 => {
                    accepted = Some((trial, l));
                    break;
                }
                Ok(l) if !l.is_finite() => saw_non_finite = true,
                Err(e) if e.kind() == crate::ErrorKind::Numeric => saw_non_finite = true,
                Err(e) => return Err(e),
                Ok(_) => {}
            }
            step *= 0.5;
        }
        let Some((next, _)) = accepted else {
            if saw_non_finite {
                return Err(Error::numeric(format!(
                    "loss became non-finite and the line search collapsed (learning rate {})",
                    opts.learning_rate
                )));
            }
            break;
        };
        b = next;
        let (l, g) = loss_and_gradient(pairs, sig, &b)?;
        if !l.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric(format!(
                "loss or gradient became non-finite (learning rate {})",
                opts.learning_rate
            )));
        }
        loss = l;
        grad = g;
        history.push(loss);
        step *= 2.0;
    }
    let rotor = Rotor::new(exp_bivector(&Multivector::bivector(sig, &b)?)?)?;
    Ok(RotorFit { rotor, generator: b, loss, history })
}

/// Fraction of `(source, target)` id pairs whose target ranks first under `R`.
pub fn analogy_eval(r: &Rotor, held_out: &[(usize, usize)], table: &EmbeddingTable) -> Result<f64> {
    if held_out.is_empty() {
        return Err(Error::arg("analogy evaluation needs at least one held-out pair"));
    }
    let vocab = table.spinors()?;
    let mut hits = 0usize;
    for &(s, t) in held_out {
        table.token(t)?;
        let ranked = analogy_apply(r, &table.spinor(s)?, &vocab)?;
        if ranked[0].token == t {
            hits += 1;
        }
    }
    Ok(hits as f64 / held_out.len() as f64)
}
