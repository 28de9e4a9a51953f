//! Exhaustive one-dimensional sweeps, alternating optimization and a joint
//! detuning grid search.

use rayon::prelude::*;

use crate::config::{db, dbv_per_m, from_dbv_per_m, ConfigSet, Scheme, INITIAL_PROBE_POWER};
use crate::error::{Error, Result};
use crate::performance::{scheme_response, signal_flux, snr_psl, snr_total, noise_breakdown, EvaluationOptions, PslForm};
use crate::quantum::DetuningSet;

/// Default cap on joint grid size.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    /// LO amplitude, swept in dBV/m.
    Uy,
    /// Probe power, swept in µW.
    P0,
    /// Detunings, swept in MHz.
    DeltaP,
    DeltaC,
    DeltaL,
}

impl Parameter {
    pub const ALTERNATING_ORDER: [Parameter; 5] =
        [Parameter::Uy, Parameter::P0, Parameter::DeltaP, Parameter::DeltaC, Parameter::DeltaL];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Uy => "Uy",
            Parameter::P0 => "P0",
            Parameter::DeltaP => "Delta_p",
            Parameter::DeltaC => "Delta_c",
            Parameter::DeltaL => "Delta_l",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Parameter::Uy => "dBV/m",
            Parameter::P0 => "uW",
            _ => "MHz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Uy" => Some(Parameter::Uy),
            "P0" => Some(Parameter::P0),
            "Delta_p" => Some(Parameter::DeltaP),
            "Delta_c" => Some(Parameter::DeltaC),
            "Delta_l" => Some(Parameter::DeltaL),
            _ => None,
        }
    }

    /// Default grid `(lower, upper, step)` in display units.
    pub fn default_grid(self) -> (f64, f64, f64) {
        match self {
            Parameter::Uy => (-40.0, -10.0, 0.5),
            Parameter::P0 => (1.0, 60.0, 0.1),
            _ => (-3.0, 3.0, 0.0025),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    SnrPslDiod,
    SnrPslBcod,
    /// Total SNR of the configured scheme.
    SnrTotal,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::SnrPslDiod => "SNR_PSL_DIOD",
            Objective::SnrPslBcod => "SNR_PSL_BCOD",
            Objective::SnrTotal => "SNR_TOTAL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SNR_PSL_DIOD" | "PSL_DIOD" => Some(Objective::SnrPslDiod),
            "SNR_PSL_BCOD" | "PSL_BCOD" => Some(Objective::SnrPslBcod),
            "SNR_TOTAL" | "TOTAL" => Some(Objective::SnrTotal),
            _ => None,
        }
    }

    pub fn scheme(self, cfg: &ConfigSet) -> Scheme {
        match self {
            Objective::SnrPslDiod => Scheme::Diod,
            Objective::SnrPslBcod => Scheme::Bcod,
            Objective::SnrTotal => cfg.receiver.scheme,
        }
    }

    /// Objective in dB at the configured signal amplitude.
    pub fn evaluate(self, cfg: &ConfigSet) -> Result<f64> {
        let opts = EvaluationOptions::default();
        let scheme = self.scheme(cfg);
        let h = signal_flux(cfg.laser.rf_amplitude_ux);
        let (op, resp) = scheme_response(cfg, scheme, &opts)?;
        let linear = match self {
            Objective::SnrTotal => snr_total(&resp, &noise_breakdown(cfg, &op, &resp), h)?,
            _ => snr_psl(&op, scheme, PslForm::Approximate, h, cfg.laser.bandwidth_b),
        };
        Ok(db(linear))
    }
}

/// Reads `parameter` from `cfg` in display units.
pub fn current_value(cfg: &ConfigSet, parameter: Parameter, scheme: Scheme) -> f64 {
    let det = cfg.laser.detuning_for(scheme);
    let mhz = |x: f64| cfg.convention.from_angular(x) / 1e6;
    match parameter {
        Parameter::Uy => dbv_per_m(cfg.laser.lo_amplitude_uy),
        Parameter::P0 => cfg.laser.probe_power_p0 * 1e6,
        Parameter::DeltaP => mhz(det.delta_p),
        Parameter::DeltaC => mhz(det.delta_c),
        Parameter::DeltaL => mhz(det.delta_l),
    }
}

/// Copy of `cfg` with `parameter` set to `value` (display units). Detunings
/// are written to the set used by `scheme`.
pub fn apply(cfg: &ConfigSet, parameter: Parameter, value: f64, scheme: Scheme) -> ConfigSet {
    let mut out = cfg.clone();
    let mut det = cfg.laser.detuning_for(scheme);
    let w = cfg.convention.mhz(value);
    match parameter {
        Parameter::Uy => out.laser.lo_amplitude_uy = from_dbv_per_m(value),
        Parameter::P0 => out.laser.probe_power_p0 = value * 1e-6,
        Parameter::DeltaP => det.delta_p = w,
        Parameter::DeltaC => det.delta_c = w,
        Parameter::DeltaL => det.delta_l = w,
    }
    if matches!(parameter, Parameter::DeltaP | Parameter::DeltaC | Parameter::DeltaL) {
        out.laser.set_detuning_for(scheme, det);
    }
    out
}

/// Copy of `cfg` with detunings given in MHz for `scheme`.
pub fn with_detunings_mhz(cfg: &ConfigSet, scheme: Scheme, mhz: [f64; 3]) -> ConfigSet {
    let mut out = cfg.clone();
    let c = cfg.convention;
    out.laser.set_detuning_for(scheme, DetuningSet::new(c.mhz(mhz[0]), c.mhz(mhz[1]), c.mhz(mhz[2])));
    out
}

/// The starting point of the alternating procedure: `P0 = 29.8 µW`, `Δ = 0`.
pub fn initial_state(cfg: &ConfigSet, scheme: Scheme) -> ConfigSet {
    let mut out = with_detunings_mhz(cfg, scheme, [0.0; 3]);
    out.laser.probe_power_p0 = INITIAL_PROBE_POWER;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    pub objective: Objective,
}

impl SweepSpec {
    pub fn new(parameter: Parameter, lower: f64, upper: f64, step: f64, objective: Objective) -> Result<Self> {
        let spec = Self { parameter, lower, upper, step, objective };
        spec.validate()?;
        Ok(spec)
    }

    pub fn default_for(parameter: Parameter, objective: Objective) -> Self {
        let (lower, upper, step) = parameter.default_grid();
        Self { parameter, lower, upper, step, objective }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !(self.step > 0.0) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::InvalidSweep(format!(
                "{}: need lower < upper and step > 0 (got {}..{} step {})",
                self.parameter.name(),
                self.lower,
                self.upper,
                self.step
            )));
        }
        if self.len() < 3 {
            return Err(Error::InvalidSweep(format!("{}: grid has fewer than 3 points", self.parameter.name())));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        grid_len(self.lower, self.upper, self.step)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points `lower + k·step` up to `upper` (inclusive within 1e-9 step).
    pub fn grid(&self) -> Vec<f64> {
        grid_points(self.lower, self.upper, self.step)
    }
}

fn grid_len(lower: f64, upper: f64, step: f64) -> usize {
    if !(upper >= lower) || !(step > 0.0) {
        return 0;
    }
    ((upper - lower) / step + 1e-9).floor() as usize + 1
}

fn grid_points(lower: f64, upper: f64, step: f64) -> Vec<f64> {
    (0..grid_len(lower, upper, step)).map(|k| lower + k as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepWarning {
    /// Every grid point gave the same value; the lower bound was returned.
    FlatCurve,
    /// The maximum sits on the first or last grid point.
    BoundaryHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub grid: Vec<f64>,
    pub curve: Vec<f64>,
    pub argmax_index: usize,
    pub argmax: f64,
    pub max: f64,
    pub warnings: Vec<SweepWarning>,
}

/// Index of the largest value; ties go to the smaller index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Evaluates `f` on every grid point (in parallel, order preserved) and
/// picks the argmax.
pub fn sweep_values<F>(name: &str, grid: &[f64], f: F) -> Result<(usize, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let curve: Vec<f64> = grid
        .par_iter()
        .map(|&x| {
            let v = f(x)?;
            if v.is_nan() {
                return Err(Error::ObjectiveUndefined { parameter: name.to_string(), value: x });
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let i = argmax(&curve).ok_or_else(|| Error::InvalidSweep(format!("{name}: empty grid")))?;
    Ok((i, curve))
}

fn warnings_for(curve: &[f64], i: usize) -> Vec<SweepWarning> {
    let mut w = Vec::new();
    if curve.iter().all(|v| *v == curve[0]) {
        w.push(SweepWarning::FlatCurve);
    } else if i == 0 || i + 1 == curve.len() {
        w.push(SweepWarning::BoundaryHit);
    }
    w
}

/// Exhaustive sweep of one parameter around `base`.
pub fn sweep_1d(spec: &SweepSpec, base: &ConfigSet) -> Result<SweepResult> {
    spec.validate()?;
    let scheme = spec.objective.scheme(base);
    let grid = spec.grid();
    let (i, curve) = sweep_values(spec.parameter.name(), &grid, |x| {
        spec.objective.evaluate(&apply(base, spec.parameter, x, scheme))
    })?;
    Ok(SweepResult {
        spec: *spec,
        argmax_index: i,
        argmax: grid[i],
        max: curve[i],
        warnings: warnings_for(&curve, i),
        grid,
        curve,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub round: usize,
    pub sweep: SweepResult,
    /// Value kept after the step (display units).
    pub chosen: f64,
    /// Objective after the step, dB.
    pub value: f64,
    /// The pre-sweep value beat every grid point and was kept.
    pub kept_incumbent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub initial_value: f64,
    pub steps: Vec<TraceStep>,
    pub final_config: ConfigSet,
}

impl OptimizationTrace {
    pub fn final_value(&self) -> f64 {
        self.steps.last().map_or(self.initial_value, |s| s.value)
    }

    /// Last chosen value of `parameter`.
    pub fn chosen(&self, parameter: Parameter) -> Option<f64> {
        self.steps.iter().rev().find(|s| s.sweep.spec.parameter == parameter).map(|s| s.chosen)
    }
}

/// Sequential sweeps, each substituting its optimum into the next.
pub fn alternate(specs: &[SweepSpec], base: &ConfigSet, rounds: usize) -> Result<OptimizationTrace> {
    let mut cfg = base.clone();
    let objective = specs.first().map(|s| s.objective);
    let initial_value = match objective {
        Some(o) => o.evaluate(&cfg)?,
        None => f64::NEG_INFINITY,
    };
    let mut steps = Vec::new();
    for round in 0..rounds {
        for spec in specs {
            let scheme = spec.objective.scheme(&cfg);
            let incumbent = current_value(&cfg, spec.parameter, scheme);
            let incumbent_value = spec.objective.evaluate(&cfg)?;
            let sweep = sweep_1d(spec, &cfg)?;
            let kept = incumbent_value > sweep.max;
            let (chosen, v) = if kept { (incumbent, incumbent_value) } else { (sweep.argmax, sweep.max) };
            if !kept {
                cfg = apply(&cfg, spec.parameter, chosen, scheme);
            }
            steps.push(TraceStep { round, sweep, chosen, value: v, kept_incumbent: kept });
        }
    }
    Ok(OptimizationTrace { initial_value, steps, final_config: cfg })
}

/// Default alternating specs in the order `Uy, P0, Δp, Δc, Δl`.
pub fn default_specs(objective: Objective) -> Vec<SweepSpec> {
    Parameter::ALTERNATING_ORDER.iter().map(|&p| SweepSpec::default_for(p, objective)).collect()
}

/// Axis `(lower, upper, step)` of a joint grid, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, step: f64) -> Self {
        Self { lower, upper, step }
    }

    pub fn point(value: f64) -> Self {
        Self { lower: value, upper: value, step: 1.0 }
    }

    pub fn len(&self) -> usize {
        grid_len(self.lower, self.upper, self.step)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        grid_points(self.lower, self.upper, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointResult {
    /// `(Δp, Δc, Δl)` in MHz.
    pub argmax: [f64; 3],
    pub value: f64,
    pub points: u64,
}

/// Exhaustive 3-D search over detunings for `objective` at `base`.
pub fn joint_detuning_grid(axes: [Axis; 3], base: &ConfigSet, objective: Objective, budget: u64) -> Result<JointResult> {
    let vals: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let points = vals.iter().map(|v| v.len() as u64).product::<u64>();
    if points > budget {
        return Err(Error::BudgetExceeded { points, budget });
    }
    if points == 0 {
        return Err(Error::InvalidSweep("joint grid has an empty axis".into()));
    }
    let scheme = objective.scheme(base);
    let (nc, nl) = (vals[1].len(), vals[2].len());
    let at = |k: usize| [vals[0][k / (nc * nl)], vals[1][(k / nl) % nc], vals[2][k % nl]];
    let best = (0..points as usize)
        .into_par_iter()
        .map(|k| {
            let d = at(k);
            let v = objective.evaluate(&with_detunings_mhz(base, scheme, d))?;
            if v.is_nan() {
                return Err(Error::ObjectiveUndefined { parameter: "Delta".into(), value: d[0] });
            }
            Ok((v, k))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
        )?;
    Ok(JointResult { argmax: at(best.1), value: best.0, points })
}

/// Coarse grid followed by `levels` refinements, each a `±span` box around
/// the incumbent with a step `shrink` times smaller.
pub fn joint_detuning_refined(
    coarse: [Axis; 3],
    base: &ConfigSet,
    objective: Objective,
    levels: usize,
    shrink: f64,
    budget: u64,
) -> Result<JointResult> {
    let mut best = joint_detuning_grid(coarse, base, objective, budget)?;
    let mut steps = coarse.map(|a| a.step);
    let mut total = best.points;
    for _ in 0..levels {
        let axes: [Axis; 3] = std::array::from_fn(|i| {
            let span = steps[i];
            let step = steps[i] / shrink;
            let a = &coarse[i];
            if a.len() <= 1 {
                return *a;
            }
            Axis::new((best.argmax[i] - span).max(a.lower), (best.argmax[i] + span).min(a.upper), step)
        });
        steps = axes.map(|a| a.step);
        let next = joint_detuning_grid(axes, base, objective, budget)?;
        total += next.points;
        if next.value > best.value {
            best = next;
        }
    }
    best.points = total;
    Ok(best)
}

/// Joint search compared with single-axis sweeps from `Δ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointReport {
    pub zero_value: f64,
    pub independent: Vec<SweepResult>,
    pub best_independent: f64,
    pub joint: JointResult,
}

impl JointReport {
    pub fn improvement_over_independent(&self) -> f64 {
        self.joint.value - self.best_independent
    }

    pub fn improvement_over_zero(&self) -> f64 {
        self.joint.value - self.zero_value
    }
}

/// Compares `joint` with single-axis sweeps from `Δ = 0` over the same axes.
pub fn joint_report(base: &ConfigSet, objective: Objective, axes: [Axis; 3], joint: JointResult) -> Result<JointReport> {
    let scheme = objective.scheme(base);
    let zero = with_detunings_mhz(base, scheme, [0.0; 3]);
    let zero_value = objective.evaluate(&zero)?;
    let params = [Parameter::DeltaP, Parameter::DeltaC, Parameter::DeltaL];
    let independent = params
        .iter()
        .zip(axes)
        .map(|(&p, a)| sweep_1d(&SweepSpec::new(p, a.lower, a.upper, a.step, objective)?, &zero))
        .collect::<Result<Vec<_>>>()?;
    let best_independent = independent.iter().map(|s| s.max).fold(zero_value, f64::max);
    Ok(JointReport { zero_value, independent, best_independent, joint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::table1_preset;

    #[test]
    fn quadratic_argmax() {
        let grid = grid_points(0.0, 6.0, 1.0);
        let (i, _) = sweep_values("x", &grid, |x| Ok(-(x - 3.0) * (x - 3.0))).unwrap();
        assert_eq!(grid[i], 3.0);
    }

    #[test]
    fn ties_go_low() {
        assert_eq!(argmax(&[1.0, 2.0, 2.0, 1.0]), Some(1));
        let grid = grid_points(0.0, 4.0, 1.0);
        let (i, _) = sweep_values("x", &grid, |_| Ok(5.0)).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn nan_is_reported() {
        let grid = grid_points(0.0, 4.0, 1.0);
        let e = sweep_values("x", &grid, |x| Ok(if x == 2.0 { f64::NAN } else { x })).unwrap_err();
        assert!(matches!(e, Error::ObjectiveUndefined { value, .. } if value == 2.0));
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::new(Parameter::P0, 2.0, 1.0, 0.1, Objective::SnrPslDiod).is_err());
        assert!(SweepSpec::new(Parameter::P0, 1.0, 2.0, 0.0, Objective::SnrPslDiod).is_err());
        assert!(SweepSpec::new(Parameter::P0, 1.0, 1.1, 0.1, Objective::SnrPslDiod).is_err());
        let s = SweepSpec::default_for(Parameter::DeltaP, Objective::SnrPslBcod);
        assert_eq!(s.len(), 2401);
        assert_eq!(SweepSpec::default_for(Parameter::Uy, Objective::SnrPslBcod).len(), 61);
        assert_eq!(SweepSpec::default_for(Parameter::P0, Objective::SnrPslBcod).len(), 591);
    }

    #[test]
    fn apply_round_trips() {
        let cfg = table1_preset();
        for p in Parameter::ALTERNATING_ORDER {
            for s in Scheme::ALL {
                let c = apply(&cfg, p, 0.75, s);
                assert!((current_value(&c, p, s) - 0.75).abs() < 1e-9, "{p:?}");
            }
        }
        let c = apply(&cfg, Parameter::DeltaC, 1.0, Scheme::Bcod);
        assert_eq!(c.laser.detuning_for(Scheme::Diod), cfg.laser.detuning_for(Scheme::Diod));
    }

    #[test]
    fn flat_curve_warns() {
        let cfg = table1_preset();
        assert_eq!(warnings_for(&[1.0; 5], 0), vec![SweepWarning::FlatCurve]);
        assert_eq!(warnings_for(&[1.0, 2.0, 3.0], 2), vec![SweepWarning::BoundaryHit]);
        assert!(warnings_for(&[1.0, 3.0, 2.0], 1).is_empty());
        let r = sweep_1d(&SweepSpec::new(Parameter::P0, 10.0, 30.0, 5.0, Objective::SnrPslDiod).unwrap(), &cfg).unwrap();
        assert_eq!(r.grid.len(), 5);
    }

    #[test]
    fn alternating_is_monotone_and_deterministic() {
        let cfg = initial_state(&table1_preset(), Scheme::Diod);
        let specs = vec![
            SweepSpec::new(Parameter::Uy, -30.0, -15.0, 1.0, Objective::SnrPslDiod).unwrap(),
            SweepSpec::new(Parameter::P0, 5.0, 40.0, 1.0, Objective::SnrPslDiod).unwrap(),
            SweepSpec::new(Parameter::DeltaP, -2.0, 2.0, 0.05, Objective::SnrPslDiod).unwrap(),
            SweepSpec::new(Parameter::DeltaC, -2.0, 2.0, 0.05, Objective::SnrPslDiod).unwrap(),
            SweepSpec::new(Parameter::DeltaL, -2.0, 2.0, 0.05, Objective::SnrPslDiod).unwrap(),
        ];
        let a = alternate(&specs, &cfg, 2).unwrap();
        let mut last = a.initial_value;
        for s in &a.steps {
            assert!(s.value >= last);
            last = s.value;
        }
        assert_eq!(a, alternate(&specs, &cfg, 2).unwrap());
    }

    #[test]
    fn joint_grid_basics() {
        let cfg = table1_preset();
        let single = [Axis::point(0.1), Axis::point(-0.2), Axis::point(0.3)];
        let r = joint_detuning_grid(single, &cfg, Objective::SnrPslBcod, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.argmax, [0.1, -0.2, 0.3]);
        assert_eq!(r.points, 1);
        let big = [Axis::new(-3.0, 3.0, 0.0025); 3];
        assert!(matches!(
            joint_detuning_grid(big, &cfg, Objective::SnrPslBcod, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn joint_dominates_independent_and_zero() {
        let cfg = table1_preset();
        let axes = [Axis::new(-2.0, 2.0, 0.25), Axis::new(-2.0, 2.0, 0.25), Axis::new(-2.0, 2.0, 0.25)];
        let joint = joint_detuning_grid(axes, &cfg, Objective::SnrPslBcod, DEFAULT_BUDGET).unwrap();
        let report = joint_report(&cfg, Objective::SnrPslBcod, axes, joint).unwrap();
        assert!(report.improvement_over_zero() >= 0.0);
        assert!(report.improvement_over_independent() >= -1e-12);
        let refined = joint_detuning_refined(axes, &cfg, Objective::SnrPslBcod, 2, 5.0, DEFAULT_BUDGET).unwrap();
        assert!(refined.value >= joint.value);
    }
}
