//! Incident RF signal, RF local oscillator and their superposition.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{HBAR, SPEED_OF_LIGHT, TWO_PI, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};

/// Rabi frequency `μU/ħ` of a field amplitude on a dipole.
pub fn rabi_from_field(amplitude: f64, mu: f64) -> f64 {
    mu * amplitude / HBAR
}

/// Field amplitude producing Rabi frequency `omega` on dipole `mu`.
pub fn field_from_rabi(omega: f64, mu: f64) -> f64 {
    omega * HBAR / mu
}

/// A monochromatic RF tone at the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfTone {
    pub power: f64,
    pub amplitude_u: f64,
    pub frequency: f64,
    pub phase: f64,
    pub effective_aperture_ae: f64,
}

impl RfTone {
    pub fn from_amplitude(amplitude_u: f64, frequency: f64, phase: f64, effective_aperture_ae: f64) -> Self {
        let power = 0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * effective_aperture_ae * amplitude_u * amplitude_u;
        Self { power, amplitude_u, frequency, phase, effective_aperture_ae }
    }

    pub fn from_power(power: f64, frequency: f64, phase: f64, effective_aperture_ae: f64) -> Self {
        let amplitude_u = (2.0 * power / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * effective_aperture_ae)).sqrt();
        Self { power, amplitude_u, frequency, phase, effective_aperture_ae }
    }
}

/// LO-dominated drive on the RF transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperposedDrive {
    pub omega_l: f64,
    pub omega_x: f64,
    pub fdelta: f64,
    pub theta_delta: f64,
    /// Set when `Ωx > Ωl/100`: still accepted, but outside the region where
    /// the linear envelope is tight.
    pub weak_lo_warning: bool,
}

impl SuperposedDrive {
    /// Linearized drive `Ωl + Ωx·cos(2πfδt + θδ)`.
    pub fn omega_linear(&self, t: f64) -> f64 {
        self.omega_l + self.omega_x * (TWO_PI * self.fdelta * t + self.theta_delta).cos()
    }

    /// Exact envelope `√(Ωx² + Ωl² + 2ΩxΩl·cos(2πfδt + θδ))`.
    pub fn omega_exact(&self, t: f64) -> f64 {
        let c = (TWO_PI * self.fdelta * t + self.theta_delta).cos();
        (self.omega_x * self.omega_x + self.omega_l * self.omega_l + 2.0 * self.omega_x * self.omega_l * c).sqrt()
    }
}

/// Superposes a weak tone `x` onto the LO `y` as seen by a dipole `mu34`.
pub fn superpose(x: &RfTone, y: &RfTone, mu34: f64) -> Result<SuperposedDrive> {
    let omega_l = rabi_from_field(y.amplitude_u, mu34);
    let omega_x = rabi_from_field(x.amplitude_u, mu34);
    if omega_x > omega_l / 10.0 {
        return Err(Error::WeakLoViolation { omega_x, limit: omega_l / 10.0 });
    }
    Ok(SuperposedDrive {
        omega_l,
        omega_x,
        fdelta: x.frequency - y.frequency,
        theta_delta: x.phase - y.phase,
        weak_lo_warning: omega_x > omega_l / 100.0,
    })
}

/// Exact envelope of the summed fields at phase `arg = 2πfδt + θδ`.
pub fn exact_envelope(ux: f64, uy: f64, arg: f64) -> f64 {
    (ux * ux + uy * uy + 2.0 * ux * uy * arg.cos()).sqrt()
}

pub fn linearized_envelope(ux: f64, uy: f64, arg: f64) -> f64 {
    uy + ux * arg.cos()
}

/// Complex baseband of the superposition relative to the LO carrier.
pub fn superposed_baseband(ux: f64, theta_x: f64, uy: f64, theta_y: f64, fdelta: f64, t: f64) -> Complex64 {
    Complex64::from_polar(uy, theta_y) + Complex64::from_polar(ux, TWO_PI * fdelta * t + theta_x)
}

/// Effective aperture `λ²/(4π)` of an isotropic antenna.
pub fn effective_aperture_iso(frequency: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / frequency;
    lambda * lambda / (4.0 * PI)
}

/// Large-scale fading `−30 + 10β·log10(1/L)` in dB.
pub fn pathloss_db(distance_l: f64, beta: f64) -> f64 {
    -30.0 + 10.0 * beta * (1.0 / distance_l).log10()
}

/// Received amplitude in dBV/m for a transmit reference in dBV/m.
pub fn free_space_rx_amplitude_dbv(distance_l: f64, beta: f64, tx_reference_dbv: f64) -> f64 {
    tx_reference_dbv + pathloss_db(distance_l, beta)
}

/// Received amplitude in V/m.
pub fn free_space_rx_amplitude(distance_l: f64, beta: f64, tx_reference_dbv: f64) -> f64 {
    crate::config::from_dbv_per_m(free_space_rx_amplitude_dbv(distance_l, beta, tx_reference_dbv))
}

/// Transmit reference that lands the preset link (1500 m, β = 2) on the
/// tabulated received amplitude.
pub fn preset_tx_reference_dbv() -> f64 {
    crate::config::RECEIVED_AMPLITUDE_DBV - pathloss_db(1500.0, 2.0)
}
