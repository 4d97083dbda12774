//! Normal forms of planar resonant-saddle vector fields.
//!
//! The crate covers the formal side (truncated series, Poincaré–Dulac reduction,
//! formal modulus, cohomological equation) and the analytic side for `k = 1`,
//! `p = q = 1`: sectorial model first integrals, a Cauchy–Heine fixed point that
//! realizes a prescribed necklace, and the period operator computed by
//! integrating along asymptotic leaves.

pub mod cauchy_heine;
pub mod error;
pub mod formal;
pub mod ode;
pub mod period;
pub mod quadrature;
pub mod sectors;
pub mod series;

pub use error::{Error, Result};
pub use series::{
    flow_conjugate, invert_unit, lie_derivative, multiply, resonant_projection,
    substitute_resonant, BiSeries, PlanarVectorField, ResonancePair, UPoly, UyPoly, C,
};
