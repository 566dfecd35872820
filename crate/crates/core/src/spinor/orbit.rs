use std::f64::consts::PI;
use std::fmt;

use crate::algebra::{Multivector, Signature, Spinor};
use crate::error::{Error, Result};
use crate::spinor::{apply_one_sided, make_rotor, sandwich};

/// Named point of the orbit at a multiple of π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitState {
    Actor,
    Actress,
    ActorStar,
    ActressStar,
}

impl fmt::Display for OrbitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitState::Actor => "actor",
            OrbitState::Actress => "actress",
            OrbitState::ActorStar => "actor*",
            OrbitState::ActressStar => "actress*",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow {
    pub step: usize,
    /// Rotation angle in radians.
    pub angle: f64,
    /// `⟨ψ₀† R ψ₀⟩₀`, which is `cos(θ/2)`.
    pub one_sided_overlap: f64,
    /// Coefficient of the plane blade in `R ψ₀`, which is `-sin(θ/2)`.
    pub one_sided_quadrature: f64,
    /// `⟨v (R v R†)⟩₀ / ⟨v v⟩₀` for a vector `v` in the plane, which is `cos θ`.
    pub two_sided_overlap: f64,
    pub state: Option<OrbitState>,
}

/// First coordinate plane `e_i e_j` (canonical order) whose square is `-1`.
pub fn circular_plane(sig: Signature) -> Result<(usize, usize)> {
    for j in 2..=sig.n() {
        for i in 1..j {
            if sig.basis_square(i - 1) * sig.basis_square(j - 1) > 0.0 {
                return Ok((i, j));
            }
        }
    }
    Err(Error::arg(format!("{sig} has no plane that squares to -1, so rotations there do not close")))
}

/// Orbit of `ψ₀ = 1` under `R(θ)` for `θ = 4πk/K`, `k = 0..=K`.
pub fn orbit720(sig: Signature, steps: usize) -> Result<Vec<OrbitRow>> {
    if steps == 0 {
        return Err(Error::arg("demo720 needs at least one step"));
    }
    let (i, j) = circular_plane(sig)?;
    let plane = Multivector::basis(sig, &[i, j])?;
    let mask = (1u32 << (i - 1)) | (1u32 << (j - 1));
    let probe = Multivector::basis(sig, &[i])?;
    let probe_norm = probe.scalar_product(&probe)?;
    let psi = Spinor::one(sig);
    (0..=steps)
        .map(|k| {
            let angle = 4.0 * PI * k as f64 / steps as f64;
            let r = make_rotor(&plane, angle)?;
            let moved = apply_one_sided(&r, &psi)?;
            let turned = sandwich(&r, &probe)?;
            let state = (4 * k % steps == 0).then(|| match (4 * k / steps) % 4 {
                0 => OrbitState::Actor,
                1 => OrbitState::Actress,
                2 => OrbitState::ActorStar,
                _ => OrbitState::ActressStar,
            });
            Ok(OrbitRow {
                step: k,
                angle,
                one_sided_overlap: psi.reverse().mul(&moved)?.scalar_part(),
                one_sided_quadrature: moved.coeff(mask),
                two_sided_overlap: probe.scalar_product(&turned)? / probe_norm,
                state,
            })
        })
        .collect()
}

fn fixed(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

/// CSV with six decimals; the state column is empty between multiples of π.
pub fn orbit_csv(rows: &[OrbitRow]) -> String {
    let mut out = String::from("step,angle_deg,one_sided_overlap,one_sided_quadrature,two_sided_overlap,state\n");
    for r in rows {
        let state = r.state.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step,
            fixed(r.angle.to_degrees(), 6),
            fixed(r.one_sided_overlap, 6),
            fixed(r.one_sided_quadrature, 6),
            fixed(r.two_sided_overlap, 6),
            state
        ));
    }
    out
}
