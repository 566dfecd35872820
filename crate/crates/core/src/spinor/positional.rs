use crate::algebra::{ensure_same, Multivector, Rotor, Signature, Spinor};
use crate::error::{Error, Result};
use crate::spinor::{apply_one_sided, check_unit_plane, make_rotor};

pub const DEFAULT_BASE_FREQUENCY: f64 = 1.0;
pub const DEFAULT_FREQUENCY_DECAY: f64 = 0.1;

/// Rotor-valued positional encoding: plane `k` turns by `p · base · decay^k` at position `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionalConfig {
    sig: Signature,
    planes: Vec<Multivector>,
    base_frequency: f64,
    frequency_decay: f64,
}

impl PositionalConfig {
    pub fn new(sig: Signature, planes: Vec<Multivector>, base_frequency: f64, frequency_decay: f64) -> Result<Self> {
        if !(base_frequency.is_finite() && base_frequency > 0.0) {
            return Err(Error::arg(format!("base_frequency must be positive, got {base_frequency}")));
        }
        if !(frequency_decay > 0.0 && frequency_decay <= 1.0) {
            return Err(Error::arg(format!("frequency_decay must lie in (0, 1], got {frequency_decay}")));
        }
        for plane in &planes {
            ensure_same(&sig, &plane.signature())?;
            check_unit_plane(plane)?;
        }
        for (i, a) in planes.iter().enumerate() {
            for b in &planes[i + 1..] {
                let ab = a.geometric_product(b)?;
                let ba = b.geometric_product(a)?;
                if ab.max_abs_diff(&ba) > 1e-12 {
                    return Err(Error::arg(format!("positional planes must commute: {a} and {b} do not")));
                }
            }
        }
        Ok(PositionalConfig { sig, planes, base_frequency, frequency_decay })
    }

    /// Disjoint coordinate planes at the default frequency ladder.
    pub fn default_for(sig: Signature) -> Self {
        PositionalConfig {
            sig,
            planes: default_planes(sig),
            base_frequency: DEFAULT_BASE_FREQUENCY,
            frequency_decay: DEFAULT_FREQUENCY_DECAY,
        }
    }

    /// Same planes, different base frequency.
    pub fn with_base_frequency(mut self, base_frequency: f64) -> Result<Self> {
        if !(base_frequency.is_finite() && base_frequency > 0.0) {
            return Err(Error::arg("base_frequency must be positive"));
        }
        self.base_frequency = base_frequency;
        Ok(self)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn planes(&self) -> &[Multivector] {
        &self.planes
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn frequency_decay(&self) -> f64 {
        self.frequency_decay
    }

    /// Turning angle of plane `k` at position `p`.
    pub fn angle(&self, p: usize, k: usize) -> f64 {
        p as f64 * self.base_frequency * self.frequency_decay.powi(k as i32)
    }
}

/// Disjoint index pairs of like-signed basis vectors, so every plane is circular.
/// An unpaired index of either sign is left out.
fn default_planes(sig: Signature) -> Vec<Multivector> {
    let positive: Vec<usize> = (1..=sig.p()).collect();
    let negative: Vec<usize> = (sig.p() + 1..=sig.n()).collect();
    let mut planes = Vec::new();
    for group in [&positive, &negative] {
        for pair in group.chunks_exact(2) {
            planes.push(Multivector::basis(sig, &[pair[0], pair[1]]).expect("valid indices"));
        }
    }
    planes
}

/// `R_p = Π_k exp(-(angle_k / 2) B_k)`; `R_0 = 1`.
pub fn positional_rotor(p: usize, cfg: &PositionalConfig) -> Result<Rotor> {
    let mut acc = Rotor::identity(cfg.sig);
    for (k, plane) in cfg.planes.iter().enumerate() {
        acc = acc.mul(&make_rotor(plane, cfg.angle(p, k))?)?;
    }
    Ok(acc)
}

/// `ψ^(p) = R_p ψ`.
pub fn apply_position(r_p: &Rotor, psi: &Spinor) -> Result<Spinor> {
    apply_one_sided(r_p, psi)
}
