//! Physical constants (CODATA 2018 exact or recommended values).

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Standard gravitational acceleration [m/s²].
pub const STANDARD_GRAVITY: f64 = 9.806_65;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
