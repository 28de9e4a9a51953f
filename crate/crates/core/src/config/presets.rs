//! Built-in parameter sets for Cs.

use super::{
    from_db, from_dbv_per_m, AtomicVaporConfig, ConfigSet, DensityBasis, FrequencyConvention, LaserRfConfig,
    ReceiverChainConfig, Scheme,
};
use crate::constants::ATOMIC_DIPOLE;
use crate::quantum::DetuningSet;

/// Received amplitude at 1500 m with β = 2, dBV/m.
pub const RECEIVED_AMPLITUDE_DBV: f64 = -71.8;

/// Probe power used before the LO-amplitude sweep, W.
pub const INITIAL_PROBE_POWER: f64 = 29.8e-6;

/// Baseline Cs parameters under the default (angular) reading.
pub fn table1_preset() -> ConfigSet {
    table1_preset_with(FrequencyConvention::Angular)
}

/// Baseline Cs parameters. Detunings are the DIOD optimum, with the BCOD
/// optimum held as the BCOD override.
pub fn table1_preset_with(convention: FrequencyConvention) -> ConfigSet {
    let mhz = |x: f64| convention.mhz(x);
    let (gamma_total, t2) = match convention {
        FrequencyConvention::Angular => (mhz(5.0), 1.0 / mhz(5.0)),
        FrequencyConvention::Ordinary => (5e6, 0.2e-6),
    };
    let r0 = 1.7e-3;
    let fc = 6.9458e9;
    let fdelta = 150e3;
    let vapor = AtomicVaporConfig {
        cell_length_d: 0.10,
        atomic_density_n0: 4.89e16,
        population_rate_y: 0.01,
        dipole_mu12: 2.2327 * ATOMIC_DIPOLE,
        dipole_mu23: 0.0226 * ATOMIC_DIPOLE,
        dipole_mu34: 1443.45 * ATOMIC_DIPOLE,
        decay_gamma2: mhz(5.2),
        decay_gamma3: mhz(3.9e-3),
        decay_gamma4: mhz(1.7e-3),
        total_dephasing: gamma_total,
        coherence_time_t2: t2,
        principal_quantum_number_n: 47.0,
        lifetime_tau0: None,
        lifetime_exponent_u: None,
        room_temperature: 290.0,
        susceptibility_density: DensityBasis::Effective,
    };
    let laser = LaserRfConfig {
        probe_wavelength: 852e-9,
        coupling_wavelength: 510e-9,
        probe_power_p0: 20.7e-6,
        coupling_power_pc: 17e-3,
        local_optical_power_pl: 30e-3,
        local_optical_phase: 0.0,
        probe_input_phase: 0.0,
        beam_radius_r0: r0,
        fwhm_fp: r0 * (2.0 * std::f64::consts::LN_2).sqrt(),
        detuning: DetuningSet::new(mhz(-0.9033), mhz(-0.0025), mhz(0.0125)),
        bcod_detuning: Some(DetuningSet::new(mhz(-0.9133), mhz(1.8090), mhz(-0.0075))),
        lo_amplitude_uy: 0.0661,
        rf_amplitude_ux: from_dbv_per_m(RECEIVED_AMPLITUDE_DBV),
        carrier_frequency_fc: fc,
        lo_frequency_fl: fc - fdelta,
        offset_frequency_fdelta: fdelta,
        phase_x: 0.0,
        phase_y: 0.0,
        bandwidth_b: 100e3,
    };
    let receiver = ReceiverChainConfig {
        scheme: Scheme::Bcod,
        quantum_efficiency_eta1: 0.8,
        lna_gain_g: from_db(30.0),
        lna_temperature_t: 100.0,
        load_resistance: 1.0,
        antenna_efficiency_eta0: 0.7,
        antenna_gain_gant: from_db(5.5),
        classical_lna_gain: from_db(60.0),
        noise_figure_f: from_db(6.0),
        background_temperature_tbg: 290.0,
        ue_antenna_gain: from_db(0.0),
        ue_noise_figure: from_db(9.0),
    };
    ConfigSet { vapor, laser, receiver, convention }
}

/// Rydberg transitions with tabulated operating points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    D47ToP48,
    D45ToP46,
    D43ToP44,
    D40ToP41,
    S66ToP66,
    S63ToP63,
}

struct Row {
    mu34_qa0: f64,
    fc_ghz: f64,
    uy: f64,
    p0_uw: f64,
    diod: [f64; 3],
    bcod: [f64; 3],
}

impl Transition {
    pub const ALL: [Transition; 6] = [
        Transition::D47ToP48,
        Transition::D45ToP46,
        Transition::D43ToP44,
        Transition::D40ToP41,
        Transition::S66ToP66,
        Transition::S63ToP63,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transition::D47ToP48 => "47D5/2-48P3/2",
            Transition::D45ToP46 => "45D5/2-46P3/2",
            Transition::D43ToP44 => "43D5/2-44P3/2",
            Transition::D40ToP41 => "40D5/2-41P3/2",
            Transition::S66ToP66 => "66S1/2-66P3/2",
            Transition::S63ToP63 => "63S1/2-63P3/2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace("->", "-");
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(&norm))
    }

    /// Principal quantum number of the upper Rydberg level |3⟩.
    pub fn principal_quantum_number(self) -> f64 {
        match self {
            Transition::D47ToP48 => 47.0,
            Transition::D45ToP46 => 45.0,
            Transition::D43ToP44 => 43.0,
            Transition::D40ToP41 => 40.0,
            Transition::S66ToP66 => 66.0,
            Transition::S63ToP63 => 63.0,
        }
    }

    fn row(self) -> Row {
        match self {
            Transition::D47ToP48 => Row {
                mu34_qa0: 1443.4,
                fc_ghz: 6.9458,
                uy: 0.0661,
                p0_uw: 20.7,
                diod: [-0.9033, -0.0025, 0.0125],
                bcod: [-0.9133, 1.8090, -0.0075],
            },
            Transition::D45ToP46 => Row {
                mu34_qa0: 1316.6,
                fc_ghz: 7.9752,
                uy: 0.0708,
                p0_uw: 20.3,
                diod: [-0.8832, -0.0025, 0.0125],
                bcod: [-0.8932, 1.7690, -0.0025],
            },
            Transition::D43ToP44 => Row {
                mu34_qa0: 1195.7,
                fc_ghz: 9.2186,
                uy: 0.0794,
                p0_uw: 20.6,
                diod: [-0.8982, -0.0025, 0.0075],
                bcod: [-0.9083, 1.7990, -0.0025],
            },
            Transition::D40ToP41 => Row {
                mu34_qa0: 1025.1,
                fc_ghz: 11.6187,
                uy: 0.0912,
                p0_uw: 20.4,
                diod: [-0.8832, -0.0025, 0.0075],
                bcod: [-0.8932, 1.7740, -0.0075],
            },
            Transition::S66ToP66 => Row {
                mu34_qa0: 2055.4,
                fc_ghz: 13.4078,
                uy: 0.0501,
                p0_uw: 20.4,
                diod: [-0.9883, 0.0025, 0.0325],
                bcod: [-0.9883, 1.9291, -0.0225],
            },
            Transition::S63ToP63 => Row {
                mu34_qa0: 1862.7,
                fc_ghz: 15.5513,
                uy: 0.0537,
                p0_uw: 20.1,
                diod: [-0.9583, 0.0025, 0.0225],
                bcod: [-0.9633, 1.8791, -0.0125],
            },
        }
    }
}

/// Baseline preset with the given transition's row applied.
pub fn table2_preset(transition: Transition) -> ConfigSet {
    table2_preset_with(transition, FrequencyConvention::Angular)
}

pub fn table2_preset_with(transition: Transition, convention: FrequencyConvention) -> ConfigSet {
    let mut cfg = table1_preset_with(convention);
    let row = transition.row();
    let mhz = |x: f64| convention.mhz(x);
    let det = |d: [f64; 3]| DetuningSet::new(mhz(d[0]), mhz(d[1]), mhz(d[2]));
    cfg.vapor.dipole_mu34 = row.mu34_qa0 * ATOMIC_DIPOLE;
    cfg.vapor.principal_quantum_number_n = transition.principal_quantum_number();
    cfg.laser.carrier_frequency_fc = row.fc_ghz * 1e9;
    cfg.laser.lo_frequency_fl = cfg.laser.carrier_frequency_fc - cfg.laser.offset_frequency_fdelta;
    cfg.laser.lo_amplitude_uy = row.uy;
    cfg.laser.probe_power_p0 = row.p0_uw * 1e-6;
    cfg.laser.detuning = det(row.diod);
    cfg.laser.bcod_detuning = Some(det(row.bcod));
    cfg
}
