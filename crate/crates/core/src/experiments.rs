//! Scenario runner: named sweeps that produce CSV tables and `.dat` curves.
//!
//! Default axes:
//!
//! | scenario | axis | range | points |
//! |---|---|---|---|
//! | validate-waveform | time | 0 to 0.02 ms | 1200 |
//! | validate-error | Ux/Uy | 1e-3 to 1, log | 20 |
//! | validate-transfer | Ux/Uy | 0.01 to 1, linear | 40 |
//! | opt-uy | Uy | −40 to −10 dBV/m | step 0.5 |
//! | opt-p0 | P0 | 1 to 60 µW | step 0.1 |
//! | opt-detunings | Δ | −3 to 3 MHz | step 0.0025 |
//! | snr-vs-density | N0 | 1e10 to 9e10 cm⁻³ | 41 |
//! | snr-vs-localpower | Pl | 30 µW to 300 mW, log | 41 |
//! | snr-vs-frequency | transition | six tabulated lines | 6 |
//! | ratio-vs-cell, sensitivity-vs-cell | d | 0.1 to 10 cm, log | 41 |
//! | ratio-vs-fwhm, sensitivity-vs-fwhm | Fp | 0.2 to 5 mm | 49 |
//! | ratio-vs-population, sensitivity-vs-population | Υ | 1e-7 to 1e-2, log | 51 |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{dbv_per_m, table2_preset_with, ConfigSet, Scheme, Transition};
use crate::error::{Error, Result};
use crate::optimizer::{alternate, default_specs, initial_state, sweep_1d, Objective, Parameter, SweepSpec};
use crate::performance::{evaluate, per_cm, EvaluationOptions, SnrReport};
use crate::photodetection::{waveform_pair, BeatDrive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    ValidateWaveform,
    ValidateError,
    ValidateTransfer,
    OptUy,
    OptP0,
    OptDetunings,
    SnrVsDensity,
    SnrVsLocalPower,
    SnrVsFrequency,
    RatioVsCell,
    RatioVsFwhm,
    RatioVsPopulation,
    SensitivityVsCell,
    SensitivityVsFwhm,
    SensitivityVsPopulation,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 15] = [
        ScenarioName::ValidateWaveform,
        ScenarioName::ValidateError,
        ScenarioName::ValidateTransfer,
        ScenarioName::OptUy,
        ScenarioName::OptP0,
        ScenarioName::OptDetunings,
        ScenarioName::SnrVsDensity,
        ScenarioName::SnrVsLocalPower,
        ScenarioName::SnrVsFrequency,
        ScenarioName::RatioVsCell,
        ScenarioName::RatioVsFwhm,
        ScenarioName::RatioVsPopulation,
        ScenarioName::SensitivityVsCell,
        ScenarioName::SensitivityVsFwhm,
        ScenarioName::SensitivityVsPopulation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioName::ValidateWaveform => "validate-waveform",
            ScenarioName::ValidateError => "validate-error",
            ScenarioName::ValidateTransfer => "validate-transfer",
            ScenarioName::OptUy => "opt-uy",
            ScenarioName::OptP0 => "opt-p0",
            ScenarioName::OptDetunings => "opt-detunings",
            ScenarioName::SnrVsDensity => "snr-vs-density",
            ScenarioName::SnrVsLocalPower => "snr-vs-localpower",
            ScenarioName::SnrVsFrequency => "snr-vs-frequency",
            ScenarioName::RatioVsCell => "ratio-vs-cell",
            ScenarioName::RatioVsFwhm => "ratio-vs-fwhm",
            ScenarioName::RatioVsPopulation => "ratio-vs-population",
            ScenarioName::SensitivityVsCell => "sensitivity-vs-cell",
            ScenarioName::SensitivityVsFwhm => "sensitivity-vs-fwhm",
            ScenarioName::SensitivityVsPopulation => "sensitivity-vs-population",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.name() == s)
    }

    /// Config assignments applied beneath the user's own. The validation
    /// runs are made without detuning.
    pub fn base_overrides(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ScenarioName::ValidateWaveform | ScenarioName::ValidateError | ScenarioName::ValidateTransfer => {
                &[("Delta_p", "0 MHz"), ("Delta_c", "0 MHz"), ("Delta_l", "0 MHz")]
            }
            _ => &[],
        }
    }
}

/// A scenario request: name plus `key=value` config overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub overrides: Vec<(String, String)>,
    pub output_path: Option<PathBuf>,
}

/// Numeric table with named columns; column 0 is the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    /// Reads a CSV produced by [`Table::to_csv`]: one header row, then
    /// rectangular numeric rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().any(|h| h.is_empty()) {
            return Err(csv_error("header row must name every column"));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != headers.len() {
                return Err(Error::LengthMismatch(headers.len(), rec.len()));
            }
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| csv_error(&format!("row {}: `{f}` is not a number", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    /// `(curve name, x/y pairs)` for every column after the axis.
    pub fn curves(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        self.headers
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, h)| (h.clone(), self.rows.iter().map(|r| (r[0], r[j])).collect()))
            .collect()
    }
}

fn csv_error(msg: &str) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string()))
}

/// Writes one `<scenario>__<curve>.dat` file per curve into `dir`.
pub fn emit_plotdata(scenario: &str, table: &Table, dir: &Path) -> Result<Vec<PathBuf>> {
    let curves = table.curves();
    if curves.is_empty() || table.rows.is_empty() {
        return Err(Error::EmptyScenario);
    }
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(curves.len());
    for (name, points) in curves {
        let mut s = format!("# {} {}\n", table.headers[0], name);
        for (x, y) in points {
            let _ = writeln!(s, "{x:.8e} {y:.8e}");
        }
        let path = dir.join(format!("{scenario}__{name}.dat"));
        std::fs::write(&path, s)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// Ux/Uy points of the approximation-error sweep.
pub fn error_sweep_ratios() -> Vec<f64> {
    logspace(1e-3, 1.0, 20)
}

/// Runs `name` against `cfg`; failures are tagged with the scenario name.
pub fn run_scenario(name: ScenarioName, cfg: &ConfigSet) -> Result<Table> {
    run_inner(name, cfg).map_err(|e| match e {
        Error::Scenario { .. } | Error::EmptyScenario => e,
        other => Error::Scenario { scenario: name.name().to_string(), message: other.to_string() },
    })
}

fn run_inner(name: ScenarioName, cfg: &ConfigSet) -> Result<Table> {
    use ScenarioName::*;
    match name {
        ValidateWaveform => validate_waveform(cfg),
        ValidateError => validate_error(cfg),
        ValidateTransfer => validate_transfer(cfg),
        OptUy => opt_sweeps(cfg, &[Parameter::Uy]),
        OptP0 => opt_sweeps(cfg, &[Parameter::P0]),
        OptDetunings => opt_sweeps(cfg, &[Parameter::DeltaP, Parameter::DeltaC, Parameter::DeltaL]),
        SnrVsDensity => snr_sweep(cfg, "n0_per_cm3", &linspace(1e10, 9e10, 41), |c, x| c.with_value("N0", x * 1e6)),
        SnrVsLocalPower => snr_sweep(cfg, "pl_w", &logspace(30e-6, 0.3, 41), |c, x| c.with_value("Pl", x)),
        SnrVsFrequency => snr_vs_frequency(cfg),
        RatioVsCell => ratio_sweep(cfg, "d_cm", &cell_axis(), cell_setter),
        RatioVsFwhm => ratio_sweep(cfg, "fp_mm", &fwhm_axis(), fwhm_setter),
        RatioVsPopulation => ratio_sweep(cfg, "upsilon", &population_axis(), population_setter),
        SensitivityVsCell => sensitivity_sweep(cfg, "d_cm", &cell_axis(), cell_setter),
        SensitivityVsFwhm => sensitivity_sweep(cfg, "fp_mm", &fwhm_axis(), fwhm_setter),
        SensitivityVsPopulation => sensitivity_sweep(cfg, "upsilon", &population_axis(), population_setter),
    }
}

type Setter = fn(&ConfigSet, f64) -> std::result::Result<ConfigSet, crate::config::ConfigError>;

fn cell_axis() -> Vec<f64> {
    logspace(0.1, 10.0, 41)
}
fn fwhm_axis() -> Vec<f64> {
    linspace(0.2, 5.0, 49)
}
fn population_axis() -> Vec<f64> {
    logspace(1e-7, 1e-2, 51)
}
fn cell_setter(c: &ConfigSet, x: f64) -> std::result::Result<ConfigSet, crate::config::ConfigError> {
    c.with_value("d", x * 1e-2)
}
fn fwhm_setter(c: &ConfigSet, x: f64) -> std::result::Result<ConfigSet, crate::config::ConfigError> {
    c.with_value("Fp", x * 1e-3)
}
fn population_setter(c: &ConfigSet, x: f64) -> std::result::Result<ConfigSet, crate::config::ConfigError> {
    c.with_value("Upsilon", x)
}

fn rows_par<F>(xs: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    xs.par_iter().map(|&x| f(x).map(|mut r| {
        r.insert(0, x);
        r
    })).collect()
}

fn reports(cfg: &ConfigSet) -> Result<(SnrReport, SnrReport)> {
    let opts = EvaluationOptions::default();
    Ok((evaluate(cfg, Scheme::Diod, &opts)?, evaluate(cfg, Scheme::Bcod, &opts)?))
}

const SNR_COLUMNS: [&str; 7] =
    ["snr_sql_db", "snr_psl_diod_db", "snr_psl_bcod_db", "snr_total_diod_db", "snr_total_bcod_db", "snr_bs_db", "snr_ue_db"];

fn snr_row(cfg: &ConfigSet) -> Result<Vec<f64>> {
    let (d, b) = reports(cfg)?;
    Ok(vec![b.snr_sql, d.snr_psl, b.snr_psl, d.snr_total, b.snr_total, b.snr_classical, b.snr_classical_ue])
}

fn snr_sweep<F>(cfg: &ConfigSet, axis: &str, xs: &[f64], set: F) -> Result<Table>
where
    F: Fn(&ConfigSet, f64) -> std::result::Result<ConfigSet, crate::config::ConfigError> + Sync,
{
    let mut t = Table::new(&[&[axis][..], &SNR_COLUMNS[..]].concat());
    t.rows = rows_par(xs, |x| snr_row(&set(cfg, x)?))?;
    Ok(t)
}

/// The given config with a tabulated transition's line and operating point.
pub fn with_transition(cfg: &ConfigSet, t: Transition) -> ConfigSet {
    let row = table2_preset_with(t, cfg.convention);
    let mut out = cfg.clone();
    out.vapor.dipole_mu34 = row.vapor.dipole_mu34;
    out.vapor.principal_quantum_number_n = row.vapor.principal_quantum_number_n;
    out.laser.carrier_frequency_fc = row.laser.carrier_frequency_fc;
    out.laser.lo_frequency_fl = row.laser.carrier_frequency_fc - cfg.laser.offset_frequency_fdelta;
    out.laser.lo_amplitude_uy = row.laser.lo_amplitude_uy;
    out.laser.probe_power_p0 = row.laser.probe_power_p0;
    out.laser.detuning = row.laser.detuning;
    out.laser.bcod_detuning = row.laser.bcod_detuning;
    out
}

fn snr_vs_frequency(cfg: &ConfigSet) -> Result<Table> {
    let mut transitions = Transition::ALL.to_vec();
    transitions.sort_by(|a, b| {
        let f = |t: &Transition| table2_preset_with(*t, cfg.convention).laser.carrier_frequency_fc;
        f(a).total_cmp(&f(b))
    });
    let mut t = Table::new(&[&["fc_ghz"][..], &SNR_COLUMNS[..]].concat());
    t.rows = transitions
        .par_iter()
        .map(|&tr| {
            let c = with_transition(cfg, tr);
            let mut r = snr_row(&c)?;
            r.insert(0, c.laser.carrier_frequency_fc / 1e9);
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(t)
}

fn ratio_sweep(cfg: &ConfigSet, axis: &str, xs: &[f64], set: Setter) -> Result<Table> {
    let mut t = Table::new(&[axis, "ratio_sql_bs_db", "ratio_psl_bs_db", "ratio_sql_ue_db", "ratio_psl_ue_db"]);
    t.rows = rows_par(xs, |x| {
        let r = evaluate(&set(cfg, x)?, Scheme::Bcod, &EvaluationOptions::default())?;
        Ok(vec![r.ratio0_sql, r.ratio0_psl, r.ratio0_sql_ue, r.ratio0_psl_ue])
    })?;
    Ok(t)
}

fn sensitivity_sweep(cfg: &ConfigSet, axis: &str, xs: &[f64], set: Setter) -> Result<Table> {
    let mut t = Table::new(&[
        axis,
        "sens_sql_nv_per_cm_rthz",
        "sens_psl_bcod_nv_per_cm_rthz",
        "sens_total_bcod_nv_per_cm_rthz",
        "sens_bs_nv_per_cm_rthz",
        "sens_ue_nv_per_cm_rthz",
    ]);
    let nv = |x: f64| per_cm(x) * 1e9;
    t.rows = rows_par(xs, |x| {
        let r = evaluate(&set(cfg, x)?, Scheme::Bcod, &EvaluationOptions::default())?;
        Ok(vec![
            nv(r.sensitivity_sql),
            nv(r.sensitivity_psl),
            nv(r.sensitivity_total),
            nv(r.sensitivity_classical),
            nv(r.sensitivity_classical_ue),
        ])
    })?;
    Ok(t)
}

fn validate_waveform(cfg: &ConfigSet) -> Result<Table> {
    let drive = BeatDrive::validation(cfg, cfg.laser.rf_amplitude_ux);
    let d = waveform_pair(cfg, Scheme::Diod, &drive)?;
    let b = waveform_pair(cfg, Scheme::Bcod, &drive)?;
    let mut t = Table::new(&["time_s", "exact_diod_v", "linear_diod_v", "exact_bcod_v", "linear_bcod_v"]);
    t.rows = (0..drive.samples)
        .map(|m| {
            vec![
                drive.time(m),
                d.exact.ac_waveform[m],
                d.linear.ac_waveform[m],
                b.exact.ac_waveform[m],
                b.linear.ac_waveform[m],
            ]
        })
        .collect();
    Ok(t)
}

fn validate_error(cfg: &ConfigSet) -> Result<Table> {
    let uy = cfg.laser.lo_amplitude_uy;
    let mut t = Table::new(&["ux_over_uy", "ux_v_per_m", "error_diod", "error_bcod"]);
    t.rows = rows_par(&error_sweep_ratios(), |r| {
        let drive = BeatDrive::validation(cfg, r * uy);
        Ok(vec![r * uy, waveform_pair(cfg, Scheme::Diod, &drive)?.error()?, waveform_pair(cfg, Scheme::Bcod, &drive)?.error()?])
    })?;
    Ok(t)
}

fn half_swing(x: &[f64]) -> f64 {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    (hi - lo) / 2.0
}

fn validate_transfer(cfg: &ConfigSet) -> Result<Table> {
    let uy = cfg.laser.lo_amplitude_uy;
    let mut t = Table::new(&["ux_dbv_per_m", "exact_diod_dbv", "linear_diod_dbv", "exact_bcod_dbv", "linear_bcod_dbv"]);
    t.rows = rows_par(&linspace(0.01, 1.0, 40), |r| {
        let drive = BeatDrive::validation(cfg, r * uy);
        let d = waveform_pair(cfg, Scheme::Diod, &drive)?;
        let b = waveform_pair(cfg, Scheme::Bcod, &drive)?;
        Ok(vec![
            half_swing(&d.exact.ac_waveform),
            half_swing(&d.linear.ac_waveform),
            half_swing(&b.exact.ac_waveform),
            half_swing(&b.linear.ac_waveform),
        ]
        .into_iter()
        .map(dbv_per_m)
        .collect())
    })?;
    for row in &mut t.rows {
        row[0] = dbv_per_m(row[0] * uy);
    }
    Ok(t)
}

/// Alternating sweeps from the initial state for both PSL objectives,
/// reporting the curves of `shown`.
fn opt_sweeps(cfg: &ConfigSet, shown: &[Parameter]) -> Result<Table> {
    let objectives = [(Objective::SnrPslDiod, Scheme::Diod), (Objective::SnrPslBcod, Scheme::Bcod)];
    let last = Parameter::ALTERNATING_ORDER.iter().position(|p| shown.contains(p)).map_or(0, |i| i + shown.len());
    let traces = objectives
        .par_iter()
        .map(|&(obj, scheme)| {
            let start = initial_state(cfg, scheme);
            let specs: Vec<SweepSpec> = default_specs(obj).into_iter().take(last).collect();
            if last == 1 {
                return Ok((sweep_1d(&specs[0], &start)?.curve, vec![], obj.evaluate(&start)?));
            }
            let trace = alternate(&specs, &start, 1)?;
            let before = &trace.steps[last - shown.len() - 1];
            let curves: Vec<Vec<f64>> = trace.steps[last - shown.len()..].iter().map(|s| s.sweep.curve.clone()).collect();
            Ok((curves[0].clone(), curves, before.value))
        })
        .collect::<Result<Vec<_>>>()?;

    let spec = SweepSpec::default_for(shown[0], Objective::SnrPslDiod);
    let grid = spec.grid();
    let axis = match shown[0] {
        Parameter::Uy => "uy_dbv_per_m",
        Parameter::P0 => "p0_uw",
        _ => "delta_mhz",
    };
    let mut headers = vec![axis.to_string()];
    for (obj, _) in &objectives {
        let scheme = if *obj == Objective::SnrPslDiod { "diod" } else { "bcod" };
        if shown.len() == 1 {
            headers.push(format!("snr_psl_{scheme}_db"));
        } else {
            for p in shown {
                headers.push(format!("snr_psl_{scheme}_{}_db", p.name().to_ascii_lowercase()));
            }
            headers.push(format!("snr_psl_{scheme}_no_detuning_db"));
        }
    }
    let mut t = Table { headers, rows: Vec::with_capacity(grid.len()) };
    for (i, x) in grid.iter().enumerate() {
        let mut row = vec![*x];
        for (single, curves, reference) in &traces {
            if shown.len() == 1 {
                row.push(single[i]);
            } else {
                row.extend(curves.iter().map(|c| c[i]));
                row.push(*reference);
            }
        }
        t.rows.push(row);
    }
    Ok(t)
}
