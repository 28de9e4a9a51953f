//! Noise, SNR, ratios against a classical receiver, and sensitivities.

use crate::chain::OperatingPoint;
use crate::config::{db, dephasing_from_lifetime, AtomicVaporConfig, ConfigSet, Scheme};
use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, FREE_SPACE_IMPEDANCE, HBAR, SPEED_OF_LIGHT, TWO_PI, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::optical::beam_area;
use crate::photodetection::{linearized_response, LinearizedResponse};
use crate::signal::effective_aperture_iso;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;

/// Natural, black-body and total dephasing rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dephasing {
    pub natural: f64,
    pub black_body: f64,
    pub total: f64,
}

/// Resolves `Γ2`: a direct value wins, otherwise the lifetime scaling is used.
pub fn dephasing(vapor: &AtomicVaporConfig, direct_gamma2: Option<f64>) -> Result<Dephasing> {
    if let Some(g) = direct_gamma2 {
        return Ok(Dephasing { natural: f64::NAN, black_body: f64::NAN, total: g });
    }
    match (vapor.lifetime_tau0, vapor.lifetime_exponent_u) {
        (Some(tau0), Some(u)) => {
            let (natural, black_body, total) =
                dephasing_from_lifetime(vapor.principal_quantum_number_n, tau0, u, vapor.room_temperature);
            Ok(Dephasing { natural, black_body, total })
        }
        _ => Err(Error::MissingLifetimeConstants),
    }
}

/// Atoms in the probed cylinder, `ΥN0·πFp²d/(2 ln 2)`.
pub fn atom_number(cfg: &ConfigSet) -> f64 {
    cfg.vapor.effective_density() * beam_area(cfg.laser.fwhm_fp) * cfg.vapor.cell_length_d
}

/// `ħ/(μ34·√(N·T2))`, V/m/√Hz.
pub fn sql_field(mu34: f64, atoms: f64, t2: f64) -> f64 {
    HBAR / (mu34 * (atoms * t2).sqrt())
}

/// `ϱ·c·ε0·cos²φ·U_SQL²·B`.
pub fn qpn_power(gain_rho: f64, cos2_varphi: f64, u_sql: f64, bandwidth: f64) -> f64 {
    gain_rho * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * cos2_varphi * u_sql * u_sql * bandwidth
}

/// Total detected optical power entering the shot-noise term.
pub fn shot_noise_power(scheme: Scheme, p1: f64, local_power: f64) -> f64 {
    match scheme {
        Scheme::Diod => p1,
        Scheme::Bcod => local_power + p1,
    }
}

/// `2qB·α𝒫·G`.
pub fn psn_power(scheme: Scheme, alpha: f64, p1: f64, local_power: f64, gain_g: f64, bandwidth: f64) -> f64 {
    2.0 * ELEMENTARY_CHARGE * bandwidth * alpha * shot_noise_power(scheme, p1, local_power) * gain_g
}

/// `k_B·T·B·G`.
pub fn itn_power(temperature: f64, bandwidth: f64, gain_g: f64) -> f64 {
    BOLTZMANN * temperature * bandwidth * gain_g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown {
    pub qpn: f64,
    pub psn: f64,
    pub itn: f64,
    pub sigma_w_sq: f64,
    pub scheme: Scheme,
}

impl NoiseBreakdown {
    pub fn new(qpn: f64, psn: f64, itn: f64, scheme: Scheme) -> Self {
        Self { qpn, psn, itn, sigma_w_sq: (qpn + psn + itn) / 2.0, scheme }
    }

    pub fn total(&self) -> f64 {
        self.qpn + self.psn + self.itn
    }

    /// Keeps only the listed contributions.
    pub fn only(&self, qpn: bool, psn: bool, itn: bool) -> Self {
        let pick = |on: bool, x: f64| if on { x } else { 0.0 };
        Self::new(pick(qpn, self.qpn), pick(psn, self.psn), pick(itn, self.itn), self.scheme)
    }
}

/// Noise of one operating point with the response `resp`.
pub fn noise_breakdown(cfg: &ConfigSet, op: &OperatingPoint, resp: &LinearizedResponse) -> NoiseBreakdown {
    let b = cfg.laser.bandwidth_b;
    let u_sql = sql_field(cfg.vapor.dipole_mu34, atom_number(cfg), cfg.vapor.coherence_time_t2);
    let cos2 = resp.varphi.cos().powi(2);
    NoiseBreakdown::new(
        qpn_power(resp.gain_rho, cos2, u_sql, b),
        psn_power(resp.scheme, op.alpha, op.p1(), op.local_power, op.gain_g, b),
        itn_power(cfg.receiver.lna_temperature_t, b, op.gain_g),
        resp.scheme,
    )
}

/// Received `|h|²·Ps` for a field amplitude `ux`, `Ux²/(2Z0)`.
pub fn signal_flux(ux: f64) -> f64 {
    ux * ux / (2.0 * FREE_SPACE_IMPEDANCE)
}

/// Linear `2ϱcos²φ·|h|²Ps / N_total`.
pub fn snr_total(resp: &LinearizedResponse, noise: &NoiseBreakdown, h_sq_ps: f64) -> Result<f64> {
    let n = noise.total();
    if n == 0.0 {
        return Err(Error::InfiniteSnr);
    }
    Ok(2.0 * resp.gain_rho * resp.varphi.cos().powi(2) * h_sq_ps / n)
}

/// Linear `2Z0(μ34/ħ)²·N·T2·|h|²Ps/B`.
pub fn snr_sql(mu34: f64, atoms: f64, t2: f64, h_sq_ps: f64, bandwidth: f64) -> f64 {
    2.0 * FREE_SPACE_IMPEDANCE * (mu34 / HBAR).powi(2) * atoms * t2 * h_sq_ps / bandwidth
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PslForm {
    /// Keeps the `𝒫l/(𝒫l + 𝒫1)` factor of the balanced scheme.
    Exact,
    /// `𝒫l ≫ 𝒫1`, i.e. `η1·Ap·Up²·κ²/(2πħfp)`.
    #[default]
    Approximate,
}

/// Linear photon-shot-limited SNR.
pub fn snr_psl(op: &OperatingPoint, scheme: Scheme, form: PslForm, h_sq_ps: f64, bandwidth: f64) -> f64 {
    let kappa = match scheme {
        Scheme::Diod => op.kappa1,
        Scheme::Bcod => op.kappa2,
    };
    let power = match (scheme, form) {
        (Scheme::Bcod, PslForm::Exact) => op.local_power * op.p1() / (op.local_power + op.p1()),
        _ => op.p1(),
    };
    4.0 * op.alpha * FREE_SPACE_IMPEDANCE / ELEMENTARY_CHARGE * power * kappa * kappa * h_sq_ps / bandwidth
}

/// Single-antenna RF front end used as the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRxConfig {
    pub eta0: f64,
    pub g_ant: f64,
    pub g_lna: f64,
    pub noise_factor_f: f64,
    pub t_bg: f64,
    pub a_iso: f64,
}

impl ClassicalRxConfig {
    pub fn bs(cfg: &ConfigSet) -> Self {
        let r = &cfg.receiver;
        Self {
            eta0: r.antenna_efficiency_eta0,
            g_ant: r.antenna_gain_gant,
            g_lna: r.classical_lna_gain,
            noise_factor_f: r.noise_figure_f,
            t_bg: r.background_temperature_tbg,
            a_iso: effective_aperture_iso(cfg.laser.carrier_frequency_fc),
        }
    }

    pub fn ue(cfg: &ConfigSet) -> Self {
        Self { g_ant: cfg.receiver.ue_antenna_gain, noise_factor_f: cfg.receiver.ue_noise_figure, ..Self::bs(cfg) }
    }

    /// `σ_RF² = k_B·T_BG·B·F·G_LNA`, W.
    pub fn noise_power(&self, bandwidth: f64) -> f64 {
        BOLTZMANN * self.t_bg * bandwidth * self.noise_factor_f * self.g_lna
    }

    /// `−174 dBm/Hz + 10 log B + NF + G_LNA`.
    pub fn noise_power_dbm(&self, bandwidth: f64) -> f64 {
        THERMAL_FLOOR_DBM_HZ + db(bandwidth) + db(self.noise_factor_f) + db(self.g_lna)
    }
}

/// Linear `η0·A_iso·G_ant·|h|²Ps/(k_B·T_BG·B·F)`.
pub fn classical_snr(rx: &ClassicalRxConfig, h_sq_ps: f64, bandwidth: f64) -> f64 {
    rx.eta0 * rx.a_iso * rx.g_ant * h_sq_ps / (BOLTZMANN * rx.t_bg * bandwidth * rx.noise_factor_f)
}

/// `√q/(κ·√(2α𝒫1))`.
pub fn psl_sensitivity(kappa: f64, alpha: f64, p1: f64) -> f64 {
    ELEMENTARY_CHARGE.sqrt() / (kappa * (2.0 * alpha * p1).sqrt())
}

/// `√(2Z0·k_B·T_BG·F/(η0·A_iso·G_ant))`.
pub fn classical_sensitivity(rx: &ClassicalRxConfig) -> f64 {
    (2.0 * FREE_SPACE_IMPEDANCE * BOLTZMANN * rx.t_bg * rx.noise_factor_f / (rx.eta0 * rx.a_iso * rx.g_ant)).sqrt()
}

/// Field amplitude giving unit SNR per √Hz for a full noise breakdown.
pub fn total_sensitivity(resp: &LinearizedResponse, noise: &NoiseBreakdown, bandwidth: f64) -> f64 {
    let cos2 = resp.varphi.cos().powi(2);
    (FREE_SPACE_IMPEDANCE * noise.total() / (resp.gain_rho * cos2 * bandwidth)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioForm {
    /// The full quotient of total SNRs.
    #[default]
    Exact,
    /// The same quotient with `𝒫1/𝒫l → 0` in the balanced shot noise.
    Limit,
}

/// Performance summary for one scheme. SNR and ratio fields are in dB,
/// sensitivities in V/m/√Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub scheme: Scheme,
    pub snr_total: f64,
    pub snr_sql: f64,
    pub snr_psl: f64,
    pub snr_classical: f64,
    pub snr_classical_ue: f64,
    pub ratio_bcod_diod: f64,
    pub ratio0_sql: f64,
    pub ratio0_psl: f64,
    pub ratio0_sql_ue: f64,
    pub ratio0_psl_ue: f64,
    pub sensitivity_sql: f64,
    pub sensitivity_psl: f64,
    pub sensitivity_total: f64,
    pub sensitivity_classical: f64,
    pub sensitivity_classical_ue: f64,
    pub noise: NoiseBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationOptions {
    /// Sets `φl` so that `φ2 = 0` for the balanced scheme.
    pub align_local_phase: bool,
    pub psl_form: PslForm,
    pub ratio_form: RatioForm,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self { align_local_phase: true, psl_form: PslForm::Approximate, ratio_form: RatioForm::Exact }
    }
}

/// Operating point and response of one scheme under `opts`.
pub fn scheme_response(cfg: &ConfigSet, scheme: Scheme, opts: &EvaluationOptions) -> Result<(OperatingPoint, LinearizedResponse)> {
    let mut op = OperatingPoint::new(cfg, scheme)?;
    if scheme == Scheme::Bcod && opts.align_local_phase {
        op = op.with_aligned_local_phase();
    }
    let resp = linearized_response(&op, scheme, cfg.laser.phase_y);
    Ok((op, resp))
}

/// `SNR_BCOD/SNR_DIOD` as a linear ratio.
pub fn ratio_bcod_diod(cfg: &ConfigSet, opts: &EvaluationOptions) -> Result<f64> {
    let h = signal_flux(cfg.laser.rf_amplitude_ux);
    let (op_d, resp_d) = scheme_response(cfg, Scheme::Diod, opts)?;
    let (op_b, resp_b) = scheme_response(cfg, Scheme::Bcod, opts)?;
    let snr_d = snr_total(&resp_d, &noise_breakdown(cfg, &op_d, &resp_d), h)?;
    let mut noise_b = noise_breakdown(cfg, &op_b, &resp_b);
    if opts.ratio_form == RatioForm::Limit {
        noise_b = NoiseBreakdown::new(noise_b.qpn, noise_b.psn * op_b.local_power / (op_b.local_power + op_b.p1()), noise_b.itn, Scheme::Bcod);
    }
    Ok(snr_total(&resp_b, &noise_b, h)? / snr_d)
}

/// Full report for `scheme` at the configured signal amplitude.
pub fn evaluate(cfg: &ConfigSet, scheme: Scheme, opts: &EvaluationOptions) -> Result<SnrReport> {
    let b = cfg.laser.bandwidth_b;
    let h = signal_flux(cfg.laser.rf_amplitude_ux);
    let (op, resp) = scheme_response(cfg, scheme, opts)?;
    let noise = noise_breakdown(cfg, &op, &resp);
    let atoms = atom_number(cfg);
    let t2 = cfg.vapor.coherence_time_t2;
    let mu34 = cfg.vapor.dipole_mu34;

    let sql = snr_sql(mu34, atoms, t2, h, b);
    let psl = snr_psl(&op, scheme, opts.psl_form, h, b);
    let bs = ClassicalRxConfig::bs(cfg);
    let ue = ClassicalRxConfig::ue(cfg);
    let snr_bs = classical_snr(&bs, h, b);
    let snr_ue = classical_snr(&ue, h, b);
    let (kappa, _) = op.kappa_varphi();

    Ok(SnrReport {
        scheme,
        snr_total: db(snr_total(&resp, &noise, h)?),
        snr_sql: db(sql),
        snr_psl: db(psl),
        snr_classical: db(snr_bs),
        snr_classical_ue: db(snr_ue),
        ratio_bcod_diod: db(ratio_bcod_diod(cfg, opts)?),
        ratio0_sql: db(sql / snr_bs),
        ratio0_psl: db(psl / snr_bs),
        ratio0_sql_ue: db(sql / snr_ue),
        ratio0_psl_ue: db(psl / snr_ue),
        sensitivity_sql: sql_field(mu34, atoms, t2),
        sensitivity_psl: psl_sensitivity(kappa, op.alpha, op.p1()),
        sensitivity_total: total_sensitivity(&resp, &noise, b),
        sensitivity_classical: classical_sensitivity(&bs),
        sensitivity_classical_ue: classical_sensitivity(&ue),
        noise,
    })
}

/// Closed-form `SNR_SQL/SNR0`, independent of `|h|²`, `Ps` and `B`.
pub fn ratio0_sql_closed(cfg: &ConfigSet, rx: &ClassicalRxConfig) -> f64 {
    let v = &cfg.vapor;
    2.0 * FREE_SPACE_IMPEDANCE
        * (v.dipole_mu34 / HBAR).powi(2)
        * (v.effective_density() / v.total_dephasing)
        * (beam_area(cfg.laser.fwhm_fp) * v.cell_length_d / rx.a_iso)
        * (BOLTZMANN * rx.t_bg * rx.noise_factor_f / (rx.eta0 * rx.g_ant))
}

/// Closed-form `SNR_PSL/SNR0` in the `𝒫l ≫ 𝒫1` form.
pub fn ratio0_psl_closed(op: &OperatingPoint, kappa: f64, eta1: f64, rx: &ClassicalRxConfig) -> f64 {
    eta1 * op.output.amplitude_u.powi(2) * kappa * kappa / (TWO_PI * HBAR * op.input.frequency_fp)
        * (beam_area(op.input.fwhm_fp) / rx.a_iso)
        * (BOLTZMANN * rx.t_bg * rx.noise_factor_f / (rx.eta0 * rx.g_ant))
}

/// V/m/√Hz to V/cm/√Hz.
pub fn per_cm(v_per_m: f64) -> f64 {
    v_per_m * 0.01
}
