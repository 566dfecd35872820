//! Spinor word representations and their transformations.
//!
//! Two actions are kept apart on purpose: two-sided conjugation `R v R†`
//! ([`sandwich`]) rotates vectors with period `2π`, while the one-sided spinor
//! action `R ψ` ([`apply_one_sided`]) needs `4π` to return to the start.
//! Positional encoding and word-level transforms use the one-sided form.

mod analogy;
mod orbit;
mod positional;
mod transform;

pub use analogy::{analogy_apply, phrase_embedding, similarity, Ranked};
pub use orbit::{circular_plane, orbit720, orbit_csv, OrbitRow, OrbitState};
pub use positional::{
    apply_position, positional_rotor, PositionalConfig, DEFAULT_BASE_FREQUENCY, DEFAULT_FREQUENCY_DECAY,
};
pub use transform::{
    apply_one_sided, check_unit_axis, check_unit_plane, compose, make_rotor, reflect, sandwich, TransformSpec, Versor,
    UNIT_TOLERANCE,
};
