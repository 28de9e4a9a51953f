//! Receiver parameters: types, the flat `key = value` reader and writer,
//! and the built-in presets.

mod presets;
mod units;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

pub use presets::{
    table1_preset, table1_preset_with, table2_preset, table2_preset_with, Transition, INITIAL_PROBE_POWER,
    RECEIVED_AMPLITUDE_DBV,
};
pub use units::{db, dbv_per_m, from_db, from_dbv_per_m, to_si, FrequencyConvention, Quantity};

use crate::constants::{BOLTZMANN, FINE_STRUCTURE, PLANCK};
use crate::quantum::DetuningSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("key `{key}`: unrecognized unit suffix `{unit}`")]
    UnknownUnit { key: String, unit: String },
    #[error("key `{key}`: cannot parse `{value}`")]
    InvalidValue { key: String, value: String },
    #[error("key `{key}` = {value:e}: {reason}")]
    Invariant { key: String, value: f64, reason: &'static str },
    #[error("unknown preset `{0}` (expected table1)")]
    UnknownPreset(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
}

/// Photodetection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Direct incoherent optical detection.
    Diod,
    /// Balanced coherent optical detection.
    Bcod,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Diod, Scheme::Bcod];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Diod => "DIOD",
            Scheme::Bcod => "BCOD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DIOD" => Some(Scheme::Diod),
            "BCOD" => Some(Scheme::Bcod),
            _ => None,
        }
    }
}

/// Which density enters the susceptibility prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityBasis {
    /// `Υ·N0`, the population actually addressed by the ladder.
    #[default]
    Effective,
    /// `N0` as written.
    Total,
}

impl DensityBasis {
    pub fn name(self) -> &'static str {
        match self {
            DensityBasis::Effective => "effective",
            DensityBasis::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "effective" => Some(DensityBasis::Effective),
            "total" => Some(DensityBasis::Total),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicVaporConfig {
    pub cell_length_d: f64,
    pub atomic_density_n0: f64,
    pub population_rate_y: f64,
    pub dipole_mu12: f64,
    pub dipole_mu23: f64,
    pub dipole_mu34: f64,
    pub decay_gamma2: f64,
    pub decay_gamma3: f64,
    pub decay_gamma4: f64,
    pub total_dephasing: f64,
    pub coherence_time_t2: f64,
    pub principal_quantum_number_n: f64,
    pub lifetime_tau0: Option<f64>,
    pub lifetime_exponent_u: Option<f64>,
    pub room_temperature: f64,
    pub susceptibility_density: DensityBasis,
}

impl AtomicVaporConfig {
    /// `Υ·N0`.
    pub fn effective_density(&self) -> f64 {
        self.population_rate_y * self.atomic_density_n0
    }

    /// Density used in the susceptibility prefactor.
    pub fn chi_density(&self) -> f64 {
        match self.susceptibility_density {
            DensityBasis::Effective => self.effective_density(),
            DensityBasis::Total => self.atomic_density_n0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserRfConfig {
    pub probe_wavelength: f64,
    pub coupling_wavelength: f64,
    pub probe_power_p0: f64,
    pub coupling_power_pc: f64,
    pub local_optical_power_pl: f64,
    pub local_optical_phase: f64,
    pub probe_input_phase: f64,
    pub beam_radius_r0: f64,
    pub fwhm_fp: f64,
    pub detuning: DetuningSet,
    /// Detunings used under BCOD when they differ from `detuning`.
    pub bcod_detuning: Option<DetuningSet>,
    pub lo_amplitude_uy: f64,
    pub rf_amplitude_ux: f64,
    pub carrier_frequency_fc: f64,
    pub lo_frequency_fl: f64,
    pub offset_frequency_fdelta: f64,
    pub phase_x: f64,
    pub phase_y: f64,
    pub bandwidth_b: f64,
}

impl LaserRfConfig {
    pub fn detuning_for(&self, scheme: Scheme) -> DetuningSet {
        match (scheme, self.bcod_detuning) {
            (Scheme::Bcod, Some(d)) => d,
            _ => self.detuning,
        }
    }

    /// Sets the detunings used by `scheme` only.
    pub fn set_detuning_for(&mut self, scheme: Scheme, det: DetuningSet) {
        match scheme {
            Scheme::Bcod => self.bcod_detuning = Some(det),
            Scheme::Diod => {
                if self.bcod_detuning.is_none() {
                    self.bcod_detuning = Some(self.detuning);
                }
                self.detuning = det;
            }
        }
    }

    /// Probe frequency `c/λp`, Hz.
    pub fn probe_frequency(&self) -> f64 {
        crate::constants::SPEED_OF_LIGHT / self.probe_wavelength
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChainConfig {
    pub scheme: Scheme,
    pub quantum_efficiency_eta1: f64,
    pub lna_gain_g: f64,
    pub lna_temperature_t: f64,
    pub load_resistance: f64,
    pub antenna_efficiency_eta0: f64,
    pub antenna_gain_gant: f64,
    pub classical_lna_gain: f64,
    pub noise_figure_f: f64,
    pub background_temperature_tbg: f64,
    pub ue_antenna_gain: f64,
    pub ue_noise_figure: f64,
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSet {
    pub vapor: AtomicVaporConfig,
    pub laser: LaserRfConfig,
    pub receiver: ReceiverChainConfig,
    pub convention: FrequencyConvention,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Num(Quantity),
    Text,
}

const KEYS: &[(&str, Kind)] = &[
    ("frequency_convention", Kind::Text),
    ("preset", Kind::Text),
    ("transition", Kind::Text),
    ("chi_density", Kind::Text),
    ("scheme", Kind::Text),
    ("d", Kind::Num(Quantity::Length)),
    ("N0", Kind::Num(Quantity::Density)),
    ("Upsilon", Kind::Num(Quantity::Fraction)),
    ("mu12", Kind::Num(Quantity::Dipole)),
    ("mu23", Kind::Num(Quantity::Dipole)),
    ("mu34", Kind::Num(Quantity::Dipole)),
    ("gamma2", Kind::Num(Quantity::Rate)),
    ("gamma3", Kind::Num(Quantity::Rate)),
    ("gamma4", Kind::Num(Quantity::Rate)),
    ("Gamma2", Kind::Num(Quantity::Rate)),
    ("T2", Kind::Num(Quantity::Time)),
    ("n", Kind::Num(Quantity::Dimensionless)),
    ("tau0", Kind::Num(Quantity::Time)),
    ("u", Kind::Num(Quantity::Dimensionless)),
    ("T_room", Kind::Num(Quantity::Temperature)),
    ("lambda_p", Kind::Num(Quantity::Length)),
    ("lambda_c", Kind::Num(Quantity::Length)),
    ("P0", Kind::Num(Quantity::Power)),
    ("Pc", Kind::Num(Quantity::Power)),
    ("Pl", Kind::Num(Quantity::Power)),
    ("phi_l", Kind::Num(Quantity::Angle)),
    ("phi_0", Kind::Num(Quantity::Angle)),
    ("r0", Kind::Num(Quantity::Length)),
    ("Fp", Kind::Num(Quantity::Length)),
    ("Delta_p", Kind::Num(Quantity::Rate)),
    ("Delta_c", Kind::Num(Quantity::Rate)),
    ("Delta_l", Kind::Num(Quantity::Rate)),
    ("Delta_p_bcod", Kind::Num(Quantity::Rate)),
    ("Delta_c_bcod", Kind::Num(Quantity::Rate)),
    ("Delta_l_bcod", Kind::Num(Quantity::Rate)),
    ("Uy", Kind::Num(Quantity::Field)),
    ("Ux", Kind::Num(Quantity::Field)),
    ("fc", Kind::Num(Quantity::Frequency)),
    ("fl", Kind::Num(Quantity::Frequency)),
    ("fdelta", Kind::Num(Quantity::Frequency)),
    ("theta_x", Kind::Num(Quantity::Angle)),
    ("theta_y", Kind::Num(Quantity::Angle)),
    ("B", Kind::Num(Quantity::Frequency)),
    ("eta1", Kind::Num(Quantity::Fraction)),
    ("G", Kind::Num(Quantity::Gain)),
    ("T", Kind::Num(Quantity::Temperature)),
    ("R", Kind::Num(Quantity::Resistance)),
    ("eta0", Kind::Num(Quantity::Fraction)),
    ("G_ant", Kind::Num(Quantity::Gain)),
    ("G_LNA", Kind::Num(Quantity::Gain)),
    ("NF", Kind::Num(Quantity::Gain)),
    ("T_BG", Kind::Num(Quantity::Temperature)),
    ("G_ant_ue", Kind::Num(Quantity::Gain)),
    ("NF_ue", Kind::Num(Quantity::Gain)),
];

fn kind_of(key: &str) -> Option<(&'static str, Kind)> {
    KEYS.iter().find(|(k, _)| *k == key).copied()
}

/// Names of every accepted key, in serialization order.
pub fn known_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(k, _)| *k)
}

/// Dimension of a numeric key.
pub fn key_quantity(key: &str) -> Option<Quantity> {
    match kind_of(key)?.1 {
        Kind::Num(q) => Some(q),
        Kind::Text => None,
    }
}

/// One `key = value` assignment as written.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits a document into assignments. Blank lines and `#` comments are
/// skipped; keys are checked against the known set and for duplicates.
pub fn parse_document(text: &str) -> Result<Vec<Assignment>, ConfigError> {
    let mut out: Vec<Assignment> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let a = parse_assignment(body).map_err(|message| ConfigError::Syntax { line, message })?;
        if kind_of(&a.0).is_none() {
            return Err(ConfigError::UnknownKey { line, key: a.0 });
        }
        if !seen.insert(a.0.clone()) {
            return Err(ConfigError::DuplicateKey { line, key: a.0 });
        }
        out.push(Assignment { key: a.0, value: a.1, line });
    }
    Ok(out)
}

fn parse_assignment(body: &str) -> Result<(String, String), String> {
    let (k, v) = body.split_once('=').ok_or_else(|| format!("expected `key = value`, got `{body}`"))?;
    let k = k.trim();
    let v = v.trim();
    if k.is_empty() || k.chars().any(char::is_whitespace) {
        return Err(format!("malformed key `{k}`"));
    }
    if v.is_empty() {
        return Err(format!("key `{k}` has no value"));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Parses a command-line override `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = parse_assignment(s.trim()).map_err(|message| ConfigError::Syntax { line: 0, message })?;
    if kind_of(&k).is_none() {
        return Err(ConfigError::UnknownKey { line: 0, key: k });
    }
    Ok((k, v))
}

/// Splits `"1.7 mm"` or `"1.7mm"` into number and suffix.
fn split_number(value: &str) -> Option<(f64, &str)> {
    let value = value.trim();
    let (num, unit) = match value.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => (value, ""),
    };
    if let Ok(x) = num.parse::<f64>() {
        return Some((x, unit));
    }
    if !unit.is_empty() {
        return None;
    }
    let mut best = None;
    for (i, _) in value.char_indices().skip(1) {
        if let Ok(x) = value[..i].parse::<f64>() {
            best = Some((x, value[i..].trim()));
        }
    }
    best
}

fn numeric(key: &str, quantity: Quantity, value: &str, conv: FrequencyConvention) -> Result<f64, ConfigError> {
    let bad = || ConfigError::InvalidValue { key: key.to_string(), value: value.to_string() };
    let (x, unit) = split_number(value).ok_or_else(bad)?;
    if !x.is_finite() {
        return Err(bad());
    }
    let si = to_si(quantity, x, unit, conv)
        .ok_or_else(|| ConfigError::UnknownUnit { key: key.to_string(), unit: unit.to_string() })?;
    if !si.is_finite() {
        return Err(bad());
    }
    Ok(si)
}

/// Parses a document into a validated configuration.
pub fn load_config(text: &str) -> Result<ConfigSet, ConfigError> {
    load_with_overrides(text, &[])
}

/// Reads and parses a config file.
pub fn load_config_file(path: &std::path::Path) -> Result<ConfigSet, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
    load_config(&text)
}

/// Parses `text`, then applies `overrides` on top; an override replaces any
/// assignment of the same key in the document.
pub fn load_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<ConfigSet, ConfigError> {
    let mut entries = parse_document(text)?;
    for (k, v) in overrides {
        if kind_of(k).is_none() {
            return Err(ConfigError::UnknownKey { line: 0, key: k.clone() });
        }
        match entries.iter_mut().find(|e| &e.key == k) {
            Some(e) => e.value = v.clone(),
            None => entries.push(Assignment { key: k.clone(), value: v.clone(), line: 0 }),
        }
    }
    build(&entries)
}

fn build(entries: &[Assignment]) -> Result<ConfigSet, ConfigError> {
    let text = |k: &str| entries.iter().find(|e| e.key == k).map(|e| e.value.as_str());

    let convention = match text("frequency_convention") {
        Some(s) => FrequencyConvention::parse(s)
            .ok_or_else(|| ConfigError::InvalidValue { key: "frequency_convention".into(), value: s.into() })?,
        None => FrequencyConvention::Angular,
    };

    let base = match (text("preset"), text("transition")) {
        (Some(p), _) if p != "table1" => return Err(ConfigError::UnknownPreset(p.to_string())),
        (_, Some(t)) => {
            let tr = Transition::parse(t).ok_or_else(|| ConfigError::UnknownTransition(t.to_string()))?;
            Some(table2_preset_with(tr, convention))
        }
        (Some(_), None) => Some(table1_preset_with(convention)),
        (None, None) => None,
    };

    let mut values: HashMap<&'static str, f64> = match &base {
        Some(cfg) => cfg.numeric_values().into_iter().collect(),
        None => defaults().into_iter().collect(),
    };
    let mut explicit = HashSet::new();
    for e in entries {
        let (key, kind) = kind_of(&e.key).expect("keys checked on parse");
        if let Kind::Num(q) = kind {
            values.insert(key, numeric(key, q, &e.value, convention)?);
            explicit.insert(key);
        }
    }

    let mut cfg = assemble(&values, &explicit, convention)?;
    if let Some(s) = text("scheme") {
        cfg.receiver.scheme =
            Scheme::parse(s).ok_or_else(|| ConfigError::InvalidValue { key: "scheme".into(), value: s.into() })?;
    } else if let Some(b) = &base {
        cfg.receiver.scheme = b.receiver.scheme;
    }
    if let Some(s) = text("chi_density") {
        cfg.vapor.susceptibility_density = DensityBasis::parse(s)
            .ok_or_else(|| ConfigError::InvalidValue { key: "chi_density".into(), value: s.into() })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn defaults() -> Vec<(&'static str, f64)> {
    vec![
        ("phi_l", 0.0),
        ("phi_0", 0.0),
        ("theta_x", 0.0),
        ("theta_y", 0.0),
        ("Delta_p", 0.0),
        ("Delta_c", 0.0),
        ("Delta_l", 0.0),
    ]
}

fn fwhm_factor() -> f64 {
    (2.0 * std::f64::consts::LN_2).sqrt()
}

/// Total dephasing from lifetime constants: `(Γnat, Γbbr, Γ2)`.
pub fn dephasing_from_lifetime(n: f64, tau0: f64, u: f64, t_room: f64) -> (f64, f64, f64) {
    let nat = 1.0 / (tau0 * n.powf(u));
    let bbr = 4.0 * FINE_STRUCTURE.powi(3) * BOLTZMANN * t_room / (3.0 * PLANCK * n * n);
    (nat, bbr, nat + bbr)
}

fn assemble(
    v: &HashMap<&'static str, f64>,
    explicit: &HashSet<&'static str>,
    convention: FrequencyConvention,
) -> Result<ConfigSet, ConfigError> {
    let get = |k: &'static str| v.get(k).copied().ok_or_else(|| ConfigError::MissingKey(k.to_string()));
    let given = |k: &str| explicit.contains(k);

    let (r0, fp) = match (given("r0"), given("Fp")) {
        (true, false) => (get("r0")?, get("r0")? * fwhm_factor()),
        (false, true) => (get("Fp")? / fwhm_factor(), get("Fp")?),
        _ => match (v.get("r0"), v.get("Fp")) {
            (Some(&r), Some(&f)) => (r, f),
            (Some(&r), None) => (r, r * fwhm_factor()),
            (None, Some(&f)) => (f / fwhm_factor(), f),
            (None, None) => return Err(ConfigError::MissingKey("r0".into())),
        },
    };
    if given("r0") && given("Fp") && ((fp - r0 * fwhm_factor()) / fp).abs() > 1e-12 {
        return Err(ConfigError::Invariant { key: "Fp".into(), value: fp, reason: "must equal r0·√(2 ln 2)" });
    }

    let fc = get("fc")?;
    let (fl, fdelta) = if given("fl") && !given("fdelta") {
        (get("fl")?, fc - get("fl")?)
    } else if given("fl") && given("fdelta") {
        let (fl, fd) = (get("fl")?, get("fdelta")?);
        if (fd - (fc - fl)).abs() > 1e-12 * fc.abs().max(1.0) {
            return Err(ConfigError::Invariant { key: "fdelta".into(), value: fd, reason: "must equal fc − fl" });
        }
        (fl, fd)
    } else {
        match (v.get("fdelta"), v.get("fl")) {
            (Some(&fd), _) => (fc - fd, fd),
            (None, Some(&fl)) => (fl, fc - fl),
            (None, None) => return Err(ConfigError::MissingKey("fdelta".into())),
        }
    };

    let n = get("n")?;
    let t_room = get("T_room")?;
    let tau0 = v.get("tau0").copied();
    let u = v.get("u").copied();
    let lifetime = || match (tau0, u) {
        (Some(t), Some(u)) => Some(dephasing_from_lifetime(n, t, u, t_room).2),
        _ => None,
    };
    let (gamma_total, t2) = match (given("Gamma2"), given("T2")) {
        (true, false) => (get("Gamma2")?, 1.0 / get("Gamma2")?),
        (false, true) => (1.0 / get("T2")?, get("T2")?),
        (true, true) => {
            let (g, t) = (get("Gamma2")?, get("T2")?);
            if (g * t - 1.0).abs() > 1e-9 {
                return Err(ConfigError::Invariant { key: "T2".into(), value: t, reason: "T2·Gamma2 must equal 1" });
            }
            (g, t)
        }
        (false, false) => {
            let lifetime_given = given("tau0") || given("u") || given("n") || given("T_room");
            match (v.get("Gamma2"), v.get("T2"), lifetime()) {
                (_, _, Some(g)) if lifetime_given => (g, 1.0 / g),
                (Some(&g), Some(&t), _) => (g, t),
                (Some(&g), None, _) => (g, 1.0 / g),
                (None, Some(&t), _) => (1.0 / t, t),
                (None, None, Some(g)) => (g, 1.0 / g),
                (None, None, None) => return Err(ConfigError::MissingKey("Gamma2".into())),
            }
        }
    };

    let detuning = DetuningSet::new(get("Delta_p")?, get("Delta_c")?, get("Delta_l")?);
    let bcod_keys = ["Delta_p_bcod", "Delta_c_bcod", "Delta_l_bcod"];
    let any_bcod_given = bcod_keys.iter().any(|k| given(k));
    let any_shared_given = ["Delta_p", "Delta_c", "Delta_l"].iter().any(|k| given(k));
    let bcod_detuning = if any_shared_given && !any_bcod_given {
        None
    } else if bcod_keys.iter().any(|k| v.contains_key(k)) {
        let pick = |k: &'static str, fallback: f64| v.get(k).copied().unwrap_or(fallback);
        Some(DetuningSet::new(
            pick("Delta_p_bcod", detuning.delta_p),
            pick("Delta_c_bcod", detuning.delta_c),
            pick("Delta_l_bcod", detuning.delta_l),
        ))
    } else {
        None
    };

    let vapor = AtomicVaporConfig {
        cell_length_d: get("d")?,
        atomic_density_n0: get("N0")?,
        population_rate_y: get("Upsilon")?,
        dipole_mu12: get("mu12")?,
        dipole_mu23: get("mu23")?,
        dipole_mu34: get("mu34")?,
        decay_gamma2: get("gamma2")?,
        decay_gamma3: get("gamma3")?,
        decay_gamma4: get("gamma4")?,
        total_dephasing: gamma_total,
        coherence_time_t2: t2,
        principal_quantum_number_n: n,
        lifetime_tau0: tau0,
        lifetime_exponent_u: u,
        room_temperature: t_room,
        susceptibility_density: DensityBasis::Effective,
    };
    let laser = LaserRfConfig {
        probe_wavelength: get("lambda_p")?,
        coupling_wavelength: get("lambda_c")?,
        probe_power_p0: get("P0")?,
        coupling_power_pc: get("Pc")?,
        local_optical_power_pl: get("Pl")?,
        local_optical_phase: get("phi_l")?,
        probe_input_phase: get("phi_0")?,
        beam_radius_r0: r0,
        fwhm_fp: fp,
        detuning,
        bcod_detuning,
        lo_amplitude_uy: get("Uy")?,
        rf_amplitude_ux: get("Ux")?,
        carrier_frequency_fc: fc,
        lo_frequency_fl: fl,
        offset_frequency_fdelta: fdelta,
        phase_x: get("theta_x")?,
        phase_y: get("theta_y")?,
        bandwidth_b: get("B")?,
    };
    let receiver = ReceiverChainConfig {
        scheme: Scheme::Bcod,
        quantum_efficiency_eta1: get("eta1")?,
        lna_gain_g: get("G")?,
        lna_temperature_t: get("T")?,
        load_resistance: get("R")?,
        antenna_efficiency_eta0: get("eta0")?,
        antenna_gain_gant: get("G_ant")?,
        classical_lna_gain: get("G_LNA")?,
        noise_figure_f: get("NF")?,
        background_temperature_tbg: get("T_BG")?,
        ue_antenna_gain: get("G_ant_ue")?,
        ue_noise_figure: get("NF_ue")?,
    };
    Ok(ConfigSet { vapor, laser, receiver, convention })
}

impl ConfigSet {
    /// Numeric keys in SI (rates in rad/s, frequencies in Hz).
    pub fn numeric_values(&self) -> Vec<(&'static str, f64)> {
        let v = &self.vapor;
        let l = &self.laser;
        let r = &self.receiver;
        let mut out = vec![
            ("d", v.cell_length_d),
            ("N0", v.atomic_density_n0),
            ("Upsilon", v.population_rate_y),
            ("mu12", v.dipole_mu12),
            ("mu23", v.dipole_mu23),
            ("mu34", v.dipole_mu34),
            ("gamma2", v.decay_gamma2),
            ("gamma3", v.decay_gamma3),
            ("gamma4", v.decay_gamma4),
            ("Gamma2", v.total_dephasing),
            ("T2", v.coherence_time_t2),
            ("n", v.principal_quantum_number_n),
        ];
        if let Some(t) = v.lifetime_tau0 {
            out.push(("tau0", t));
        }
        if let Some(u) = v.lifetime_exponent_u {
            out.push(("u", u));
        }
        out.extend([
            ("T_room", v.room_temperature),
            ("lambda_p", l.probe_wavelength),
            ("lambda_c", l.coupling_wavelength),
            ("P0", l.probe_power_p0),
            ("Pc", l.coupling_power_pc),
            ("Pl", l.local_optical_power_pl),
            ("phi_l", l.local_optical_phase),
            ("phi_0", l.probe_input_phase),
            ("r0", l.beam_radius_r0),
            ("Fp", l.fwhm_fp),
            ("Delta_p", l.detuning.delta_p),
            ("Delta_c", l.detuning.delta_c),
            ("Delta_l", l.detuning.delta_l),
        ]);
        if let Some(b) = l.bcod_detuning {
            out.extend([("Delta_p_bcod", b.delta_p), ("Delta_c_bcod", b.delta_c), ("Delta_l_bcod", b.delta_l)]);
        }
        out.extend([
            ("Uy", l.lo_amplitude_uy),
            ("Ux", l.rf_amplitude_ux),
            ("fc", l.carrier_frequency_fc),
            ("fl", l.lo_frequency_fl),
            ("fdelta", l.offset_frequency_fdelta),
            ("theta_x", l.phase_x),
            ("theta_y", l.phase_y),
            ("B", l.bandwidth_b),
            ("eta1", r.quantum_efficiency_eta1),
            ("G", r.lna_gain_g),
            ("T", r.lna_temperature_t),
            ("R", r.load_resistance),
            ("eta0", r.antenna_efficiency_eta0),
            ("G_ant", r.antenna_gain_gant),
            ("G_LNA", r.classical_lna_gain),
            ("NF", r.noise_figure_f),
            ("T_BG", r.background_temperature_tbg),
            ("G_ant_ue", r.ue_antenna_gain),
            ("NF_ue", r.ue_noise_figure),
        ]);
        out
    }

    /// Value of a numeric key in SI units.
    pub fn get(&self, key: &str) -> Option<f64> {
        self.numeric_values().into_iter().find(|(k, _)| *k == key).map(|(_, x)| x)
    }

    /// Returns a copy with `key` set to `si_value`, re-deriving dependent
    /// fields (`Fp` from `r0`, `T2` from `Gamma2`, ...).
    pub fn with_value(&self, key: &str, si_value: f64) -> Result<ConfigSet, ConfigError> {
        let (key, kind) = kind_of(key).ok_or_else(|| ConfigError::UnknownKey { line: 0, key: key.to_string() })?;
        if kind == Kind::Text {
            return Err(ConfigError::InvalidValue { key: key.to_string(), value: si_value.to_string() });
        }
        let mut values: HashMap<&'static str, f64> = self.numeric_values().into_iter().collect();
        values.insert(key, si_value);
        let explicit: HashSet<&'static str> = [key].into_iter().collect();
        let mut cfg = assemble(&values, &explicit, self.convention)?;
        cfg.receiver.scheme = self.receiver.scheme;
        cfg.vapor.susceptibility_density = self.vapor.susceptibility_density;
        if key.starts_with("Delta_") && !key.ends_with("_bcod") {
            cfg.laser.bcod_detuning = self.laser.bcod_detuning;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Writes a document that `load_config` reads back bit-for-bit.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frequency_convention = {}", self.convention.name());
        let _ = writeln!(s, "scheme = {}", self.receiver.scheme.name());
        let _ = writeln!(s, "chi_density = {}", self.vapor.susceptibility_density.name());
        for (k, x) in self.numeric_values() {
            let suffix = key_quantity(k).map(Quantity::canonical_suffix).unwrap_or("");
            if suffix.is_empty() {
                let _ = writeln!(s, "{k} = {x:e}");
            } else {
                let _ = writeln!(s, "{k} = {x:e} {suffix}");
            }
        }
        s
    }

    /// Checks the documented invariants, naming the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: f64, reason: &'static str| {
            Err(ConfigError::Invariant { key: key.to_string(), value, reason })
        };
        for (k, x) in self.numeric_values() {
            if !x.is_finite() {
                return bad(k, x, "must be finite");
            }
        }
        const POSITIVE: &[&str] = &[
            "d", "N0", "mu12", "mu23", "mu34", "gamma2", "gamma3", "gamma4", "Gamma2", "T2", "n", "T_room",
            "lambda_p", "lambda_c", "P0", "Pc", "Pl", "r0", "Fp", "Uy", "fc", "fl", "B", "T", "R", "T_BG", "tau0",
        ];
        const FRACTION: &[&str] = &["Upsilon", "eta1", "eta0"];
        const GAIN: &[&str] = &["G", "G_ant", "G_LNA", "NF", "G_ant_ue", "NF_ue"];
        for (k, x) in self.numeric_values() {
            if POSITIVE.contains(&k) && x <= 0.0 {
                return bad(k, x, "must be strictly positive");
            }
            if FRACTION.contains(&k) && !(x > 0.0 && x <= 1.0) {
                return bad(k, x, "must lie in (0, 1]");
            }
            if GAIN.contains(&k) && x < 1.0 {
                return bad(k, x, "gain must be at least 1 (0 dB)");
            }
            if k == "Ux" && x < 0.0 {
                return bad(k, x, "must be non-negative");
            }
        }
        let v = &self.vapor;
        if (v.coherence_time_t2 * v.total_dephasing - 1.0).abs() > 1e-9 {
            return bad("T2", v.coherence_time_t2, "T2·Gamma2 must equal 1");
        }
        let l = &self.laser;
        if ((l.fwhm_fp - l.beam_radius_r0 * fwhm_factor()) / l.fwhm_fp).abs() > 1e-12 {
            return bad("Fp", l.fwhm_fp, "must equal r0·√(2 ln 2)");
        }
        if (l.offset_frequency_fdelta - (l.carrier_frequency_fc - l.lo_frequency_fl)).abs()
            > 1e-12 * l.carrier_frequency_fc.abs().max(1.0)
        {
            return bad("fdelta", l.offset_frequency_fdelta, "must equal fc − fl");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ATOMIC_DIPOLE;
    use std::f64::consts::PI;

    #[test]
    fn dipole_suffix_converts() {
        let cfg = load_config("preset = table1\nmu34 = 1443.45 qa0\n").unwrap();
        assert_eq!(cfg.vapor.dipole_mu34, 1443.45 * ATOMIC_DIPOLE);
    }

    #[test]
    fn radius_fills_fwhm() {
        let cfg = load_config("preset = table1\nr0 = 1.7 mm\n").unwrap();
        let want = 1.7e-3 * (2.0 * 2f64.ln()).sqrt();
        assert!((cfg.laser.fwhm_fp - want).abs() / want < 1e-12);
        let cfg = load_config("preset = table1\nr0 = 2.5mm\n").unwrap();
        assert!((cfg.laser.fwhm_fp - 2.5e-3 * fwhm_factor()).abs() < 1e-15);
    }

    #[test]
    fn dephasing_fills_coherence_time() {
        let cfg = load_config("preset = table1\nGamma2 = 5 MHz\n").unwrap();
        let want = 1.0 / (2.0 * PI * 5e6);
        assert!((cfg.vapor.coherence_time_t2 - want).abs() / want < 1e-12);
    }

    #[test]
    fn ordinary_reading_pairs_t2() {
        let cfg = load_config("preset = table1\nfrequency_convention = ordinary\n").unwrap();
        assert!((cfg.vapor.coherence_time_t2 - 0.2e-6).abs() < 1e-18);
        assert_eq!(cfg.vapor.decay_gamma2, 5.2e6);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(load_config("preset = table1\nfoo = 1\n"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(load_config("d = 1 cm\nd = 2 cm\n"), Err(ConfigError::DuplicateKey { line: 2, .. })));
        assert!(matches!(load_config("d 1 cm\n"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn rejects_bad_units_and_values() {
        let e = load_config("preset = table1\nd = 10 MHz\n").unwrap_err();
        assert_eq!(e, ConfigError::UnknownUnit { key: "d".into(), unit: "MHz".into() });
        let e = load_config("preset = table1\nd = ten cm\n").unwrap_err();
        assert!(matches!(e, ConfigError::InvalidValue { .. }));
        let e = load_config("preset = table1\nd = inf m\n").unwrap_err();
        assert!(matches!(e, ConfigError::InvalidValue { .. }));
    }

    #[test]
    fn invariant_names_key_and_value() {
        let e = load_config("preset = table1\nUpsilon = 150 %\n").unwrap_err();
        assert_eq!(e, ConfigError::Invariant { key: "Upsilon".into(), value: 1.5, reason: "must lie in (0, 1]" });
        let e = load_config("preset = table1\nT2 = 1 us\nGamma2 = 5 MHz\n").unwrap_err();
        assert!(matches!(e, ConfigError::Invariant { ref key, .. } if key == "T2"));
        let e = load_config("preset = table1\nP0 = -1 uW\n").unwrap_err();
        assert!(matches!(e, ConfigError::Invariant { ref key, .. } if key == "P0"));
    }

    #[test]
    fn missing_key_without_preset() {
        let e = load_config("d = 10 cm\n").unwrap_err();
        assert!(matches!(e, ConfigError::MissingKey(_)));
    }

    #[test]
    fn full_document_without_preset_loads() {
        let doc = table1_preset().serialize();
        assert!(!doc.contains("preset"));
        let cfg = load_config(&doc).unwrap();
        assert_eq!(cfg, table1_preset());
    }

    #[test]
    fn offset_frequency_derivations() {
        let cfg = load_config("preset = table1\nfl = 6.9457 GHz\n").unwrap();
        assert!((cfg.laser.offset_frequency_fdelta - 100e3).abs() < 1e-3);
        let cfg = load_config("preset = table1\nfc = 7 GHz\n").unwrap();
        assert_eq!(cfg.laser.offset_frequency_fdelta, 150e3);
        assert_eq!(cfg.laser.lo_frequency_fl, 7e9 - 150e3);
    }

    #[test]
    fn lifetime_path_sets_dephasing() {
        let cfg = load_config("preset = table1\ntau0 = 1.43 ns\nu = 2.96\nn = 47\n").unwrap();
        let (_, _, g) = dephasing_from_lifetime(47.0, 1.43e-9, 2.96, 290.0);
        assert_eq!(cfg.vapor.total_dephasing, g);
        assert!((cfg.vapor.coherence_time_t2 * g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_detuning_clears_bcod_override() {
        let cfg = load_config("preset = table1\nDelta_p = 0 MHz\nDelta_c = 0 MHz\nDelta_l = 0 MHz\n").unwrap();
        assert_eq!(cfg.laser.bcod_detuning, None);
        assert_eq!(cfg.laser.detuning_for(Scheme::Bcod), DetuningSet::default());
        let cfg = load_config("preset = table1\nDelta_p_bcod = -1 MHz\n").unwrap();
        let want = FrequencyConvention::Angular.mhz(-1.0);
        assert_eq!(cfg.laser.detuning_for(Scheme::Bcod).delta_p, want);
    }

    #[test]
    fn overrides_replace_document_values() {
        let over = vec![parse_override("N0=5e10 cm^-3").unwrap()];
        let cfg = load_with_overrides("preset = table1\nN0 = 1e10 cm^-3\n", &over).unwrap();
        assert_eq!(cfg.vapor.atomic_density_n0, 5e16);
        assert!(parse_override("nope=1").is_err());
        assert!(parse_override("N0").is_err());
    }

    #[test]
    fn with_value_rederives() {
        let cfg = table1_preset().with_value("r0", 2e-3).unwrap();
        assert!((cfg.laser.fwhm_fp - 2e-3 * fwhm_factor()).abs() < 1e-15);
        assert!(table1_preset().with_value("Upsilon", 2.0).is_err());
    }

    #[test]
    fn transition_selects_row() {
        let cfg = load_config("transition = 66S1/2-66P3/2\n").unwrap();
        assert_eq!(cfg.vapor.dipole_mu34, 2055.4 * ATOMIC_DIPOLE);
        assert_eq!(cfg.laser.lo_amplitude_uy, 0.0501);
        assert!(load_config("transition = 1S-2P\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn serialize_round_trips(
                d in 1e-3..0.5f64, n0 in 1e15..1e18f64, y in 1e-6..1.0f64, p0 in 1e-7..1e-3f64,
                dp in -2e7..2e7f64, uy in 1e-3..1.0f64, ordinary in any::<bool>(),
            ) {
                let conv = if ordinary { FrequencyConvention::Ordinary } else { FrequencyConvention::Angular };
                let mut cfg = table1_preset_with(conv);
                cfg.vapor.cell_length_d = d;
                cfg.vapor.atomic_density_n0 = n0;
                cfg.vapor.population_rate_y = y;
                cfg.laser.probe_power_p0 = p0;
                cfg.laser.detuning.delta_p = dp;
                cfg.laser.lo_amplitude_uy = uy;
                let back = load_config(&cfg.serialize()).unwrap();
                prop_assert_eq!(back, cfg);
            }

            #[test]
            fn parser_never_panics(text in "\\PC{0,200}") {
                let _ = load_config(&text);
                let _ = parse_override(&text);
            }
        }
    }
}
