use crate::algebra::{ensure_same, exp_bivector, Multivector, Rotor, Signature, Spinor};
use crate::error::{Error, Result};

/// Tolerance for "unit" planes and axes.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// One elementary word transformation.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// Rotation by `angle` radians in the plane of a unit bivector.
    Rotation { plane: Multivector, angle: f64 },
    /// Reflection in the hyperplane orthogonal to a unit vector.
    Reflection { axis: Multivector },
}

impl TransformSpec {
    pub fn rotation(plane: Multivector, angle: f64) -> Result<Self> {
        check_unit_plane(&plane)?;
        if !angle.is_finite() {
            return Err(Error::arg("rotation angle must be finite"));
        }
        Ok(TransformSpec::Rotation { plane, angle })
    }

    pub fn reflection(axis: Multivector) -> Result<Self> {
        check_unit_axis(&axis)?;
        Ok(TransformSpec::Reflection { axis })
    }

    pub fn signature(&self) -> Signature {
        match self {
            TransformSpec::Rotation { plane, .. } => plane.signature(),
            TransformSpec::Reflection { axis } => axis.signature(),
        }
    }

    /// The versor implementing this transform.
    pub fn versor(&self) -> Result<Versor> {
        match self {
            TransformSpec::Rotation { plane, angle } => Ok(Versor::from(make_rotor(plane, *angle)?)),
            TransformSpec::Reflection { axis } => {
                check_unit_axis(axis)?;
                Ok(Versor { mv: axis.clone(), odd: true })
            }
        }
    }
}

/// Unit bivector: pure grade 2 and squaring to a scalar of magnitude one.
pub fn check_unit_plane(plane: &Multivector) -> Result<()> {
    if !plane.is_grade(2) {
        return Err(Error::arg(format!("rotation plane must be a bivector, got {plane}")));
    }
    let sq = plane.geometric_product(plane)?;
    let residual = sq.coeffs()[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let s = sq.scalar_part();
    if residual > UNIT_TOLERANCE || (s.abs() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::arg(format!("rotation plane must be a unit simple bivector, got B² = {sq}")));
    }
    Ok(())
}

/// Unit vector: pure grade 1 with `‖n‖² = ±1`.
pub fn check_unit_axis(axis: &Multivector) -> Result<()> {
    if !axis.is_grade(1) {
        return Err(Error::arg(format!("reflection axis must be a vector, got {axis}")));
    }
    let n2 = axis.norm_squared();
    if (n2.abs() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::arg(format!("reflection axis must have unit norm, got ‖n‖² = {n2}")));
    }
    Ok(())
}

/// `R = exp(-(θ/2) B)`.
pub fn make_rotor(plane: &Multivector, theta: f64) -> Result<Rotor> {
    check_unit_plane(plane)?;
    let generator = plane.scale(-0.5 * theta)?;
    Rotor::new(exp_bivector(&generator)?)
}

/// Two-sided rotation `R v R†`.
pub fn sandwich(r: &Rotor, v: &Multivector) -> Result<Multivector> {
    ensure_same(&r.signature(), &v.signature())?;
    r.geometric_product(v)?.geometric_product(&r.reverse())
}

/// Reflection along a unit `axis`: `-n v n⁻¹` on vectors, `n ψ n⁻¹` on even spinors.
///
/// Mixed-grade inputs get the general versor action `n v̂ n⁻¹`, with `v̂` the grade involution.
pub fn reflect(axis: &Multivector, v: &Multivector) -> Result<Multivector> {
    check_unit_axis(axis)?;
    ensure_same(&axis.signature(), &v.signature())?;
    let inverse = axis.scale(1.0 / axis.norm_squared())?;
    axis.geometric_product(&v.grade_involution())?.geometric_product(&inverse)
}

/// Spinor action `R ψ`. Picks up a sign after one full turn.
pub fn apply_one_sided(r: &Rotor, psi: &Spinor) -> Result<Spinor> {
    ensure_same(&r.signature(), &psi.signature())?;
    r.as_spinor().mul(psi)
}

/// Product of unit vectors: even when it came from an even number of reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct Versor {
    mv: Multivector,
    odd: bool,
}

impl Versor {
    pub fn as_multivector(&self) -> &Multivector {
        &self.mv
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    /// Rotor view of an even versor.
    pub fn to_rotor(&self) -> Result<Rotor> {
        if self.odd {
            return Err(Error::arg("odd versor is not a rotor"));
        }
        Rotor::from_multivector(self.mv.clone())
    }

    pub fn mul(&self, other: &Versor) -> Result<Versor> {
        Ok(Versor { mv: self.mv.geometric_product(&other.mv)?, odd: self.odd ^ other.odd })
    }

    /// Versor action `V x̂ V⁻¹`, where `x̂` is `x` for even versors and its grade involution for odd ones.
    pub fn apply(&self, x: &Multivector) -> Result<Multivector> {
        ensure_same(&self.mv.signature(), &x.signature())?;
        let n2 = self.mv.norm_squared();
        let inverse = self.mv.reverse().scale(1.0 / n2)?;
        let x = if self.odd { x.grade_involution() } else { x.clone() };
        self.mv.geometric_product(&x)?.geometric_product(&inverse)
    }
}

impl From<Rotor> for Versor {
    fn from(r: Rotor) -> Self {
        Versor { mv: r.into_spinor().into_multivector(), odd: false }
    }
}

/// Composes transforms in written order, so the rightmost one acts first.
pub fn compose(transforms: &[TransformSpec]) -> Result<Versor> {
    let (first, rest) = transforms.split_first().ok_or_else(|| Error::arg("compose needs at least one transform"))?;
    let mut acc = first.versor()?;
    for t in rest {
        acc = acc.mul(&t.versor()?)?;
    }
    Ok(acc)
}
