//! Exact pure-dephasing dynamics of impurity atoms in optical double wells
//! immersed in a homogeneous Bose gas.
//!
//! The bath is either a weakly interacting condensate (Bogoliubov
//! quasiparticles) or an ideal gas of free bosons, in one or three
//! dimensions. Each impurity occupies the left or right well of a lattice
//! site and is treated as a pseudospin coupled linearly to the bath modes,
//! so the reduced dynamics is known in closed form: off-diagonal elements
//! decay as `exp(-Γ(t))` and pick up phases. [`kernels`] evaluates the
//! continuum integrals, [`densmat`] applies them to density matrices and
//! [`oracle`] checks both against brute-force finite models.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod constants;
pub mod coupling;
pub mod densmat;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod quadrature;

mod parallel;

pub use bogoliubov::Dispersion;
pub use coupling::{Geometry, PseudospinConfig, Well};
pub use densmat::{DephasingSource, PhaseSet, ReducedDensityMatrix};

pub use error::{Error, Result};
pub use kernels::{Bath, BathKind, CurveKind, DecoherenceCurve, Estimate};
pub use params::{derive_scales, to_reduced_units, DerivedScales, Dimension, PhysicalParams, ReducedParams};
pub use quadrature::QuadratureSpec;

pub use num_complex::Complex64;
