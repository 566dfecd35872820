use crate::algebra::{blade_name, Multivector};
use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Compares reverse-mode gradients against central finite differences.
///
/// `f` builds a scalar loss from one leaf per entry of `point`. Returns the largest
/// `|g_ad - g_fd| / max(1, |g_fd|)` over every coefficient of every leaf.
pub fn grad_check<F>(f: F, point: &[Multivector], step: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::arg(format!("finite-difference step must be positive, got {step}")));
    }
    let eval = |values: &[Multivector]| -> Result<(Tape, Vec<Var>, Var)> {
        let mut tape = Tape::new();
        let leaves: Vec<Var> = values.iter().map(|mv| tape.leaf(mv)).collect();
        let loss = f(&mut tape, &leaves)?;
        Ok((tape, leaves, loss))
    };

    let (tape, leaves, loss) = eval(point)?;
    let base = tape.scalar(loss)?;
    if !base.is_finite() {
        return Err(Error::numeric(format!("loss is not finite at the base point: {base}")));
    }
    let grads = tape.backward(loss)?;

    let mut worst = 0.0f64;
    let mut shifted = point.to_vec();
    for (leaf_idx, leaf) in leaves.iter().enumerate() {
        let analytic = grads.wrt(*leaf)?.to_vec();
        for coord in 0..point[leaf_idx].coeffs().len() {
            let probe = |delta: f64, shifted: &mut Vec<Multivector>| -> Result<f64> {
                let mut coeffs = point[leaf_idx].coeffs().to_vec();
                coeffs[coord] += delta;
                shifted[leaf_idx] = Multivector::from_coeffs(point[leaf_idx].signature(), coeffs)?;
                let (t, _, l) = eval(shifted).map_err(|e| {
                    Error::numeric(format!(
                        "evaluation failed at leaf {leaf_idx}, blade {}: {e}",
                        blade_name(coord as u32)
                    ))
                })?;
                t.scalar(l)
            };
            let plus = probe(step, &mut shifted)?;
            let minus = probe(-step, &mut shifted)?;
            shifted[leaf_idx] = point[leaf_idx].clone();
            let numeric = (plus - minus) / (2.0 * step);
            if !numeric.is_finite() || !analytic[coord].is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite gradient at leaf {leaf_idx}, blade {}: analytic {}, numeric {numeric}",
                    blade_name(coord as u32),
                    analytic[coord]
                )));
            }
            let err = (analytic[coord] - numeric).abs() / numeric.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
