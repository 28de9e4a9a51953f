//! Physical constants (CODATA 2018, SI).

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// Free-space impedance `1/(c·ε0)`, Ω.
pub const FREE_SPACE_IMPEDANCE: f64 = 1.0 / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY);

/// One atomic unit of dipole moment `q·a0`, C·m.
pub const ATOMIC_DIPOLE: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

/// Bundle of the constants used throughout the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub reduced_planck: f64,
    pub elementary_charge: f64,
    pub bohr_radius: f64,
    pub vacuum_permittivity: f64,
    pub speed_of_light: f64,
    pub free_space_impedance: f64,
    pub boltzmann: f64,
    pub fine_structure_constant: f64,
    pub planck: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        reduced_planck: HBAR,
        elementary_charge: ELEMENTARY_CHARGE,
        bohr_radius: BOHR_RADIUS,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        speed_of_light: SPEED_OF_LIGHT,
        free_space_impedance: FREE_SPACE_IMPEDANCE,
        boltzmann: BOLTZMANN,
        fine_structure_constant: FINE_STRUCTURE,
        planck: PLANCK,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// `2π`, spelled out where a frequency is turned into an angular frequency.
pub const TWO_PI: f64 = 2.0 * PI;
