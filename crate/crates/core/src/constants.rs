//! Physical constants (CODATA 2018) and the species masses used by the presets.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ²³Na atom, kg.
pub const MASS_NA23: f64 = 22.989_769_282_0 * ATOMIC_MASS_UNIT;
/// Mass of a ⁸⁷Rb atom, kg.
pub const MASS_RB87: f64 = 86.909_180_531 * ATOMIC_MASS_UNIT;
