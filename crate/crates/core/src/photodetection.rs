//! Photodetector output under DIOD and BCOD, exact and linearized.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chain::OperatingPoint;
use crate::config::{ConfigSet, Scheme};
use crate::constants::{ELEMENTARY_CHARGE, FREE_SPACE_IMPEDANCE, HBAR, TWO_PI};
use crate::error::{Error, Result};
use crate::quantum::susceptibility;
use crate::signal::{exact_envelope, rabi_from_field};

/// Observation window used for waveform validation, s.
pub const OBSERVATION_WINDOW: f64 = 2e-5;
/// Minimum samples per beat period.
pub const SAMPLES_PER_BEAT: f64 = 400.0;

/// `α = η1·q/(2πħfp)`, A/W.
pub fn responsivity(eta1: f64, fp: f64) -> f64 {
    eta1 * ELEMENTARY_CHARGE / (TWO_PI * HBAR * fp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedResponse {
    pub kappa: f64,
    pub varphi: f64,
    pub psi_p: f64,
    pub gain_rho: f64,
    pub phase_phi: Complex64,
    pub scheme: Scheme,
}

impl LinearizedResponse {
    pub fn cos_varphi(&self) -> f64 {
        self.varphi.cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotodetectorOutput {
    pub dc_volts: f64,
    /// `V(t) − dc_volts`.
    pub ac_waveform: Vec<f64>,
    pub sampling_rate: f64,
}

/// Weak tone beating against the LO, sampled on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatDrive {
    pub ux: f64,
    pub uy: f64,
    pub fdelta: f64,
    pub theta_delta: f64,
    pub sampling_rate: f64,
    pub samples: usize,
}

impl BeatDrive {
    /// The validation window at the configured LO, offset and phases.
    pub fn validation(cfg: &ConfigSet, ux: f64) -> Self {
        let l = &cfg.laser;
        let fs = SAMPLES_PER_BEAT * l.offset_frequency_fdelta;
        Self {
            ux,
            uy: l.lo_amplitude_uy,
            fdelta: l.offset_frequency_fdelta,
            theta_delta: l.phase_x - l.phase_y,
            sampling_rate: fs,
            samples: (OBSERVATION_WINDOW * fs).round() as usize,
        }
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 / self.sampling_rate
    }

    pub fn beat_phase(&self, m: usize) -> f64 {
        TWO_PI * self.fdelta * self.time(m) + self.theta_delta
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|m| self.time(m)).collect()
    }
}

/// Output probe power and phase at each sample under the exact drive envelope.
pub fn exact_probe_waveform(op: &OperatingPoint, cfg: &ConfigSet, drive: &BeatDrive) -> Result<Vec<(f64, f64)>> {
    let v = &cfg.vapor;
    (0..drive.samples)
        .into_par_iter()
        .map(|m| {
            // Without detuning the closed form is 0/0 at a zero envelope; a
            // vanishing floor evaluates its limit.
            let u = exact_envelope(drive.ux, drive.uy, drive.beat_phase(m)).max(drive.uy * 1e-9);
            let rabi = op.rabi.with_rf(rabi_from_field(u, v.dipole_mu34));
            let chi = susceptibility(rabi, op.detuning, v)?;
            let out = op.input.through_cell(chi, v.cell_length_d);
            Ok((out.power, out.phase))
        })
        .collect()
}

/// `V(t) = √G·α·𝒫1(Ω_RF(t))`, with the DC taken at `Ωx = 0`.
pub fn diod_exact(p1: &[f64], p1_dc: f64, alpha: f64, gain_g: f64, sampling_rate: f64) -> PhotodetectorOutput {
    let k = gain_g.sqrt() * alpha;
    let dc = k * p1_dc;
    PhotodetectorOutput { dc_volts: dc, ac_waveform: p1.iter().map(|p| k * p - dc).collect(), sampling_rate }
}

/// `V(t) = 2√G·α·√(𝒫l·𝒫1(t))·cos(φl − φp(t))`, with the DC taken at `Ωx = 0`.
pub fn bcod_exact(
    probe: &[(f64, f64)],
    probe_dc: (f64, f64),
    local_power: f64,
    local_phase: f64,
    alpha: f64,
    gain_g: f64,
    sampling_rate: f64,
) -> PhotodetectorOutput {
    let v = |(p, phi): (f64, f64)| 2.0 * gain_g.sqrt() * alpha * (local_power * p).sqrt() * (local_phase - phi).cos();
    let dc = v(probe_dc);
    PhotodetectorOutput { dc_volts: dc, ac_waveform: probe.iter().map(|&s| v(s) - dc).collect(), sampling_rate }
}

fn linear_output(dc: f64, slope: f64, drive: &BeatDrive) -> PhotodetectorOutput {
    PhotodetectorOutput {
        dc_volts: dc,
        ac_waveform: (0..drive.samples).map(|m| slope * drive.ux * drive.beat_phase(m).cos()).collect(),
        sampling_rate: drive.sampling_rate,
    }
}

/// `V ≈ √G·α·𝒫1·[1 − 2κ1·cos φ1·Ux·cos(2πfδt + θδ)]`.
pub fn diod_linearized(op: &OperatingPoint, theta_y: f64, drive: &BeatDrive) -> (LinearizedResponse, PhotodetectorOutput) {
    let resp = linearized_response(op, Scheme::Diod, theta_y);
    let dc = op.gain_g.sqrt() * op.alpha * op.p1();
    let out = linear_output(dc, -2.0 * dc * op.kappa1 * op.varphi1.cos(), drive);
    (resp, out)
}

/// `V ≈ 2√G·α·√(𝒫l𝒫1)·[cos(φl − φp) − κ2·cos φ2·Ux·cos(2πfδt + θδ)]`.
pub fn bcod_linearized(op: &OperatingPoint, theta_y: f64, drive: &BeatDrive) -> (LinearizedResponse, PhotodetectorOutput) {
    let resp = linearized_response(op, Scheme::Bcod, theta_y);
    let amp = 2.0 * op.gain_g.sqrt() * op.alpha * (op.local_power * op.p1()).sqrt();
    let dc = amp * (op.local_phase - op.output.phase).cos();
    let out = linear_output(dc, -amp * op.kappa2 * op.varphi2.cos(), drive);
    (resp, out)
}

/// Baseband gain `ϱ` and phase factor `Φ` of the time-varying component.
pub fn linearized_response(op: &OperatingPoint, scheme: Scheme, theta_y: f64) -> LinearizedResponse {
    let (kappa, varphi, psi_p, power_term) = match scheme {
        Scheme::Diod => (op.kappa1, op.varphi1, 0.0, op.p1() * op.p1()),
        Scheme::Bcod => (op.kappa2, op.varphi2, op.psi_p, op.local_power * op.p1()),
    };
    let (gain_rho, phase_phi) = extract_ac_baseband(op.alpha, op.gain_g, power_term, kappa, varphi, theta_y);
    LinearizedResponse { kappa, varphi, psi_p, gain_rho, phase_phi, scheme }
}

/// `ϱ = 4Z0α²G·𝒫²κ²` and `Φ = ½e^{−j(θy−φ)} + ½e^{−j(θy+φ)}`, where `𝒫²` is
/// `𝒫1²` for DIOD and `𝒫l𝒫1` for BCOD.
pub fn extract_ac_baseband(alpha: f64, gain_g: f64, power_term: f64, kappa: f64, varphi: f64, theta_y: f64) -> (f64, Complex64) {
    let rho = 4.0 * FREE_SPACE_IMPEDANCE * alpha * alpha * gain_g * power_term * kappa * kappa;
    let phi = 0.5 * Complex64::from_polar(1.0, -(theta_y - varphi)) + 0.5 * Complex64::from_polar(1.0, -(theta_y + varphi));
    (rho, phi)
}

/// Returns `x − mean(x)`.
pub fn remove_mean(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// `‖exact − approx‖₂ / ‖exact‖₂` of mean-removed waveforms.
pub fn normalized_approx_error(exact_ac: &[f64], approx_ac: &[f64]) -> Result<f64> {
    if exact_ac.len() != approx_ac.len() {
        return Err(Error::LengthMismatch(exact_ac.len(), approx_ac.len()));
    }
    let e = remove_mean(exact_ac);
    let a = remove_mean(approx_ac);
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = e.iter().zip(&a).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    Ok(diff / norm)
}

/// Exact and linearized AC waveforms of one scheme at tone amplitude `ux`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformPair {
    pub exact: PhotodetectorOutput,
    pub linear: PhotodetectorOutput,
    pub response: LinearizedResponse,
}

impl WaveformPair {
    pub fn error(&self) -> Result<f64> {
        normalized_approx_error(&self.exact.ac_waveform, &self.linear.ac_waveform)
    }
}

pub fn waveform_pair(cfg: &ConfigSet, scheme: Scheme, drive: &BeatDrive) -> Result<WaveformPair> {
    let mut op = OperatingPoint::new(cfg, scheme)?;
    if scheme == Scheme::Bcod {
        op = op.with_aligned_local_phase();
    }
    let theta_y = cfg.laser.phase_y;
    let probe = exact_probe_waveform(&op, cfg, drive)?;
    let dc = (op.p1(), op.output.phase);
    Ok(match scheme {
        Scheme::Diod => {
            let p1: Vec<f64> = probe.iter().map(|s| s.0).collect();
            let (response, linear) = diod_linearized(&op, theta_y, drive);
            WaveformPair { exact: diod_exact(&p1, dc.0, op.alpha, op.gain_g, drive.sampling_rate), linear, response }
        }
        Scheme::Bcod => {
            let (response, linear) = bcod_linearized(&op, theta_y, drive);
            let exact = bcod_exact(&probe, dc, op.local_power, op.local_phase, op.alpha, op.gain_g, drive.sampling_rate);
            WaveformPair { exact, linear, response }
        }
    })
}

/// `φ1` from the sign of `ℐ{χ′}`.
pub fn varphi1_from_sign(im_chi_prime: f64) -> f64 {
    if im_chi_prime >= 0.0 {
        0.0
    } else {
        PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::table1_preset;
    use crate::constants::{PLANCK, SPEED_OF_LIGHT};
    use crate::quantum::DetuningSet;

    #[test]
    fn responsivity_values() {
        assert_eq!(responsivity(0.0, 3.5e14), 0.0);
        let fp = SPEED_OF_LIGHT / 852e-9;
        let want = 0.8 * ELEMENTARY_CHARGE * 852e-9 / (PLANCK * SPEED_OF_LIGHT);
        assert!((responsivity(0.8, fp) - want).abs() < 1e-9 * want);
        assert!((responsivity(0.8, fp) - 0.550).abs() < 1e-3);
        assert!((responsivity(0.8, 2.0 * fp) * 2.0 - responsivity(0.8, fp)).abs() < 1e-15);
    }

    #[test]
    fn exact_outputs() {
        let out = diod_exact(&[2.0, 2.0], 2.0, 0.5, 4.0, 1.0);
        assert_eq!(out.dc_volts, 2.0);
        assert_eq!(out.ac_waveform, vec![0.0, 0.0]);
        let out = bcod_exact(&[(1e-6, 0.3)], (1e-6, 0.3), 1e-6, 0.3, 0.5, 4.0, 1.0);
        assert!((out.dc_volts - 2.0 * 2.0 * 0.5 * 1e-6).abs() < 1e-18);
        let out = bcod_exact(&[(1e-6, 0.0)], (1e-6, 0.0), 1e-6, PI / 2.0, 0.5, 4.0, 1.0);
        assert!(out.dc_volts.abs() < 1e-20);
        let a = diod_exact(&[1.0], 1.0, 1.0, 1.0, 1.0).dc_volts;
        let b = diod_exact(&[1.0], 1.0, 1.0, 2.0, 1.0).dc_volts;
        assert!((b / a - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn baseband_factor_limits() {
        let (_, phi) = extract_ac_baseband(1.0, 1.0, 1.0, 1.0, 0.0, 0.7);
        assert!((phi - Complex64::from_polar(1.0, -0.7)).norm() < 1e-15);
        let (_, phi) = extract_ac_baseband(1.0, 1.0, 1.0, 1.0, PI / 2.0, 0.7);
        assert!(phi.norm() < 1e-15);
    }

    #[test]
    fn bcod_gain_exceeds_diod_at_zero_detuning() {
        let mut cfg = table1_preset();
        cfg.laser.detuning = DetuningSet::default();
        cfg.laser.bcod_detuning = None;
        let op = OperatingPoint::new(&cfg, Scheme::Bcod).unwrap().with_aligned_local_phase();
        assert!(op.p1() > 0.0);
        let d = linearized_response(&op, Scheme::Diod, 0.0);
        let b = linearized_response(&op, Scheme::Bcod, 0.0);
        let ratio = b.gain_rho / d.gain_rho;
        assert!((ratio - op.local_power / op.p1()).abs() / ratio < 1e-9);
        assert!(ratio > 1.0);
    }

    #[test]
    fn error_metric() {
        let x = [1.0, -2.0, 3.0, 0.5];
        assert_eq!(normalized_approx_error(&x, &x).unwrap(), 0.0);
        assert!((normalized_approx_error(&x, &[0.0; 4]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(normalized_approx_error(&[1.0; 3], &[0.0; 3]), Err(Error::ZeroReference)));
        assert!(matches!(normalized_approx_error(&x, &[0.0; 3]), Err(Error::LengthMismatch(4, 3))));
    }

    #[test]
    fn validation_grid_density() {
        let d = BeatDrive::validation(&table1_preset(), 1e-4);
        let per_beat = d.sampling_rate / d.fdelta;
        assert!(per_beat >= 200.0);
        assert!((d.samples as f64 / d.sampling_rate - OBSERVATION_WINDOW).abs() < 1e-12);
    }

    #[test]
    fn error_is_first_order_in_tone_amplitude() {
        let cfg = table1_preset();
        let uy = cfg.laser.lo_amplitude_uy;
        for s in Scheme::ALL {
            let err = |r: f64| waveform_pair(&cfg, s, &BeatDrive::validation(&cfg, uy * r)).unwrap().error().unwrap();
            let (a, b) = (err(1e-4), err(1e-3));
            assert!(a < 1e-3 && b < 1e-2, "{s:?}: {a} {b}");
            assert!((b / a - 10.0).abs() < 0.05, "{s:?}: {a} {b}");
        }
    }

    #[test]
    fn error_grows_with_tone_amplitude() {
        let cfg = table1_preset();
        let uy = cfg.laser.lo_amplitude_uy;
        for s in Scheme::ALL {
            let errs: Vec<f64> = [0.003, 0.03, 0.3, 1.0]
                .iter()
                .map(|r| waveform_pair(&cfg, s, &BeatDrive::validation(&cfg, uy * r)).unwrap().error().unwrap())
                .collect();
            assert!(errs.windows(2).all(|w| w[1] > w[0]), "{s:?}: {errs:?}");
        }
    }

    fn fd_slope(cfg: &ConfigSet, scheme: Scheme) -> (f64, f64) {
        let mut op = OperatingPoint::new(cfg, scheme).unwrap();
        if scheme == Scheme::Bcod {
            op.local_phase = op.output.phase + 0.4;
            op.varphi2 = op.local_phase - op.output.phase + op.psi_p;
        }
        let v = &cfg.vapor;
        let volts = |u: f64| {
            let rabi = op.rabi.with_rf(rabi_from_field(u, v.dipole_mu34));
            let out = op.input.through_cell(susceptibility(rabi, op.detuning, v).unwrap(), v.cell_length_d);
            match scheme {
                Scheme::Diod => diod_exact(&[out.power], 0.0, op.alpha, op.gain_g, 1.0).ac_waveform[0],
                Scheme::Bcod => bcod_exact(&[(out.power, out.phase)], (0.0, 0.0), op.local_power, op.local_phase, op.alpha, op.gain_g, 1.0).ac_waveform[0],
            }
        };
        let uy = cfg.laser.lo_amplitude_uy;
        let h = uy * 1e-5;
        let fd = (volts(uy + h) - volts(uy - h)) / (2.0 * h);
        let model = match scheme {
            Scheme::Diod => -2.0 * op.gain_g.sqrt() * op.alpha * op.p1() * op.kappa1 * op.varphi1.cos(),
            Scheme::Bcod => -2.0 * op.gain_g.sqrt() * op.alpha * (op.local_power * op.p1()).sqrt() * op.kappa2 * op.varphi2.cos(),
        };
        (fd, model)
    }

    #[test]
    fn linearization_slopes_match_finite_difference() {
        let cfg = table1_preset();
        for s in Scheme::ALL {
            let (fd, model) = fd_slope(&cfg, s);
            assert!((fd - model).abs() <= 1e-4 * model.abs(), "{s:?}: {fd} vs {model}");
        }
    }
}
