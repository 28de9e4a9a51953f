//! Probe beam through the vapor cell.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::quantum::ComplexSusceptibility;

/// Gaussian probe beam described by its peak amplitude and FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBeamState {
    pub power: f64,
    pub amplitude_u: f64,
    pub phase: f64,
    pub frequency_fp: f64,
    pub fwhm_fp: f64,
}

impl ProbeBeamState {
    pub fn from_power(power: f64, phase: f64, wavelength: f64, fwhm_fp: f64) -> Self {
        Self {
            power,
            amplitude_u: amplitude_from_power(power, fwhm_fp),
            phase,
            frequency_fp: SPEED_OF_LIGHT / wavelength,
            fwhm_fp,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_fp
    }

    /// Beam leaving a cell of length `d` with susceptibility `chi`.
    pub fn through_cell(&self, chi: ComplexSusceptibility, cell_length_d: f64) -> ProbeBeamState {
        let lambda = self.wavelength();
        let u = output_amplitude(self.amplitude_u, chi, cell_length_d, lambda);
        ProbeBeamState {
            power: power_from_amplitude(u, self.fwhm_fp),
            amplitude_u: u,
            phase: output_phase(self.phase, chi, cell_length_d, lambda),
            ..*self
        }
    }
}

/// `P = (π·c·ε0/(8 ln 2))·Fp²·U²`.
pub fn power_from_amplitude(amplitude: f64, fwhm: f64) -> f64 {
    PI * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY / (8.0 * LN_2) * fwhm * fwhm * amplitude * amplitude
}

pub fn amplitude_from_power(power: f64, fwhm: f64) -> f64 {
    (power * 8.0 * LN_2 / (PI * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * fwhm * fwhm)).sqrt()
}

/// Cross-section `πFp²/(2 ln 2)` of the interaction cylinder.
pub fn beam_area(fwhm: f64) -> f64 {
    PI * fwhm * fwhm / (2.0 * LN_2)
}

/// Half the optical depth per unit `ℐ{χ}`, `π·d/λp`.
pub fn phase_factor(cell_length_d: f64, lambda_p: f64) -> f64 {
    PI * cell_length_d / lambda_p
}

/// Beer–Lambert: `Up = U0·exp(−(πd/λp)·ℐ{χ})`.
pub fn output_amplitude(u0: f64, chi: ComplexSusceptibility, cell_length_d: f64, lambda_p: f64) -> f64 {
    u0 * (-phase_factor(cell_length_d, lambda_p) * chi.im).exp()
}

/// `φp = φ0 + (πd/λp)·ℛ{χ}`.
pub fn output_phase(phi0: f64, chi: ComplexSusceptibility, cell_length_d: f64, lambda_p: f64) -> f64 {
    phi0 + phase_factor(cell_length_d, lambda_p) * chi.re
}

/// Baseband phasor `√P1·e^{jφ0}·e^{j(πd/λp)ℛ{χ}}` of the output probe.
pub fn output_probe_baseband(input: &ProbeBeamState, chi: ComplexSusceptibility, cell_length_d: f64) -> Complex64 {
    let out = input.through_cell(chi, cell_length_d);
    Complex64::from_polar(out.power.sqrt(), out.phase)
}
