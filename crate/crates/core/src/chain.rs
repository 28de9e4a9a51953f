//! The receiver evaluated at its LO operating point.

use crate::config::{ConfigSet, Scheme};
use crate::constants::HBAR;
use crate::error::Result;
use crate::optical::{amplitude_from_power, phase_factor, ProbeBeamState};
use crate::photodetection::{responsivity, varphi1_from_sign};
use crate::quantum::{susceptibility, susceptibility_derivative, ComplexSusceptibility, DetuningSet, RabiSet};
use crate::signal::rabi_from_field;

/// Optical and atomic state at `Ω_RF = Ωl` for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub scheme: Scheme,
    pub rabi: RabiSet,
    pub detuning: DetuningSet,
    pub input: ProbeBeamState,
    pub output: ProbeBeamState,
    pub chi: ComplexSusceptibility,
    pub chi_prime: ComplexSusceptibility,
    /// `πd/λp`.
    pub phase_factor: f64,
    pub alpha: f64,
    pub kappa1: f64,
    pub varphi1: f64,
    pub kappa2: f64,
    pub psi_p: f64,
    pub varphi2: f64,
    pub local_power: f64,
    pub local_phase: f64,
    pub gain_g: f64,
}

impl OperatingPoint {
    pub fn new(cfg: &ConfigSet, scheme: Scheme) -> Result<Self> {
        let v = &cfg.vapor;
        let l = &cfg.laser;
        let fwhm = l.fwhm_fp;
        let input = ProbeBeamState::from_power(l.probe_power_p0, l.probe_input_phase, l.probe_wavelength, fwhm);
        let omega_p = rabi_from_field(input.amplitude_u, v.dipole_mu12);
        let omega_c = rabi_from_field(amplitude_from_power(l.coupling_power_pc, fwhm), v.dipole_mu23);
        let omega_l = rabi_from_field(l.lo_amplitude_uy, v.dipole_mu34);
        let rabi = RabiSet::new(omega_p, omega_c, omega_l);
        let detuning = l.detuning_for(scheme);

        let chi = susceptibility(rabi, detuning, v)?;
        let chi_prime = susceptibility_derivative(rabi, detuning, v)?;
        let output = input.through_cell(chi, v.cell_length_d);
        let k0 = phase_factor(v.cell_length_d, l.probe_wavelength);
        let slope = k0 * v.dipole_mu34 / HBAR;
        let kappa1 = slope * chi_prime.im.abs();
        let varphi1 = varphi1_from_sign(chi_prime.im);
        let kappa2 = slope * chi_prime.norm();
        let psi_p = chi_prime.re.atan2(chi_prime.im);
        let varphi2 = l.local_optical_phase - output.phase + psi_p;

        Ok(Self {
            scheme,
            rabi,
            detuning,
            input,
            output,
            chi,
            chi_prime,
            phase_factor: k0,
            alpha: responsivity(cfg.receiver.quantum_efficiency_eta1, input.frequency_fp),
            kappa1,
            varphi1,
            kappa2,
            psi_p,
            varphi2,
            local_power: l.local_optical_power_pl,
            local_phase: l.local_optical_phase,
            gain_g: cfg.receiver.lna_gain_g,
        })
    }

    /// Output probe power `𝒫1(Ωl)`.
    pub fn p1(&self) -> f64 {
        self.output.power
    }

    /// `κ` and `φ` of this point's scheme.
    pub fn kappa_varphi(&self) -> (f64, f64) {
        match self.scheme {
            Scheme::Diod => (self.kappa1, self.varphi1),
            Scheme::Bcod => (self.kappa2, self.varphi2),
        }
    }

    /// Local optical phase that makes `φ2 = 0`.
    pub fn optimal_local_phase(&self) -> f64 {
        self.output.phase - self.psi_p
    }

    /// Same point with the local optical phase chosen so that `cos²φ2 = 1`.
    pub fn with_aligned_local_phase(&self) -> Self {
        let phi_l = self.optimal_local_phase();
        Self { local_phase: phi_l, varphi2: 0.0, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{table1_preset, FrequencyConvention};

    #[test]
    fn table1_attenuates() {
        let cfg = table1_preset();
        for s in Scheme::ALL {
            let op = OperatingPoint::new(&cfg, s).unwrap();
            assert!(op.chi.im > 0.0);
            assert!(op.output.amplitude_u < op.input.amplitude_u);
            assert!(op.kappa2 >= op.kappa1);
        }
    }

    #[test]
    fn bcod_optimum_separates_kappas() {
        let cfg = table1_preset();
        let op = OperatingPoint::new(&cfg, Scheme::Bcod).unwrap();
        assert!(op.kappa2 > op.kappa1);
        assert!(op.output.phase != op.input.phase);
    }

    #[test]
    fn zero_detuning_kappas_agree() {
        for conv in [FrequencyConvention::Angular, FrequencyConvention::Ordinary] {
            let cfg = crate::config::table1_preset_with(conv);
            let mut cfg = cfg.clone();
            cfg.laser.detuning = DetuningSet::default();
            cfg.laser.bcod_detuning = None;
            let op = OperatingPoint::new(&cfg, Scheme::Bcod).unwrap();
            assert!((op.kappa1 - op.kappa2).abs() <= 1e-10 * op.kappa2);
            assert_eq!(op.psi_p, 0.0);
        }
    }

    #[test]
    fn aligned_phase_zeroes_varphi2() {
        let op = OperatingPoint::new(&table1_preset(), Scheme::Bcod).unwrap().with_aligned_local_phase();
        let recomputed = op.local_phase - op.output.phase + op.psi_p;
        assert!(recomputed.abs() < 1e-12 * (1.0 + op.output.phase.abs()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kappa1_never_exceeds_kappa2(dp in -3.0..3.0f64, dc in -3.0..3.0f64, dl in -3.0..3.0f64) {
                let mut cfg = table1_preset();
                let m = cfg.convention.mhz(1.0);
                cfg.laser.detuning = DetuningSet::new(dp * m, dc * m, dl * m);
                cfg.laser.bcod_detuning = None;
                let op = OperatingPoint::new(&cfg, Scheme::Bcod).unwrap();
                prop_assert!(op.kappa1 <= op.kappa2 * (1.0 + 1e-12));
            }
        }
    }
}
