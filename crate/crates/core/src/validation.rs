//! Self-checks run by `raqr validate`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::OperatingPoint;
use crate::config::{ConfigSet, FrequencyConvention, Scheme};
use crate::error::Result;
use crate::performance::{evaluate, per_cm, EvaluationOptions};
use crate::quantum::{
    lindblad_steady_state, rho21, susceptibility, susceptibility_derivative, DetuningSet, RabiSet,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub points: usize,
    pub max_rel_error: f64,
    /// Every oracle density matrix had unit trace, was Hermitian and PSD.
    pub all_physical: bool,
    pub elapsed: Duration,
}

/// Random operating point near `op`: Rabi frequencies scaled by
/// `[0.5, 2]`, detunings within ±3 MHz.
pub fn perturbed_point(op: &OperatingPoint, conv: FrequencyConvention, rng: &mut ChaCha8Rng) -> (RabiSet, DetuningSet) {
    let mut s = || rng.random_range(0.5..2.0);
    let rabi = RabiSet::new(op.rabi.omega_p * s(), op.rabi.omega_c * s(), op.rabi.omega_rf * s());
    let mut d = || conv.mhz(rng.random_range(-3.0..3.0));
    (rabi, DetuningSet::new(d(), d(), d()))
}

/// Closed-form `ρ21` against the master-equation steady state.
pub fn oracle_equivalence(cfg: &ConfigSet, points: usize, seed: u64) -> Result<CheckReport> {
    let start = Instant::now();
    let op = OperatingPoint::new(cfg, Scheme::Diod)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut physical = true;
    for _ in 0..points {
        let (rabi, det) = perturbed_point(&op, cfg.convention, &mut rng);
        let closed = rho21(rabi, det, cfg.vapor.decay_gamma2)?;
        let dm = lindblad_steady_state(rabi, det, &cfg.vapor, false)?;
        physical &= dm.is_physical(1e-9);
        worst = worst.max((closed - dm.rho21()).norm() / dm.rho21().norm());
    }
    Ok(CheckReport { points, max_rel_error: worst, all_physical: physical, elapsed: start.elapsed() })
}

/// Analytic `χ′` against a central difference in `Ω_RF`.
pub fn derivative_check(cfg: &ConfigSet, points: usize, seed: u64) -> Result<CheckReport> {
    let start = Instant::now();
    let op = OperatingPoint::new(cfg, Scheme::Diod)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let (rabi, det) = perturbed_point(&op, cfg.convention, &mut rng);
        let h = 1e-4 * rabi.omega_rf;
        let up = susceptibility(rabi.with_rf(rabi.omega_rf + h), det, &cfg.vapor)?;
        let down = susceptibility(rabi.with_rf(rabi.omega_rf - h), det, &cfg.vapor)?;
        let fd = (up - down) / (2.0 * h);
        let exact = susceptibility_derivative(rabi, det, &cfg.vapor)?;
        worst = worst.max((fd - exact).norm() / exact.norm());
    }
    Ok(CheckReport { points, max_rel_error: worst, all_physical: true, elapsed: start.elapsed() })
}

/// Headline figures at `N0 = 5×10¹⁰ cm⁻³`: gains in dB, sensitivities in
/// V/cm/√Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Headline {
    pub convention: FrequencyConvention,
    pub psl_gain_bs: f64,
    pub sql_gain_bs: f64,
    pub bcod_total_gain_bs: f64,
    pub bcod_total_gain_ue: f64,
    pub sensitivity_sql: f64,
    pub sensitivity_psl: f64,
    pub sensitivity_bs: f64,
    pub sensitivity_ue: f64,
}

pub const HEADLINE_DENSITY: f64 = 5e16;

pub fn headline(cfg: &ConfigSet) -> Result<Headline> {
    let cfg = cfg.with_value("N0", HEADLINE_DENSITY)?;
    let r = evaluate(&cfg, Scheme::Bcod, &EvaluationOptions::default())?;
    Ok(Headline {
        convention: cfg.convention,
        psl_gain_bs: r.snr_psl - r.snr_classical,
        sql_gain_bs: r.snr_sql - r.snr_classical,
        bcod_total_gain_bs: r.snr_total - r.snr_classical,
        bcod_total_gain_ue: r.snr_total - r.snr_classical_ue,
        sensitivity_sql: per_cm(r.sensitivity_sql),
        sensitivity_psl: per_cm(r.sensitivity_psl),
        sensitivity_bs: per_cm(r.sensitivity_classical),
        sensitivity_ue: per_cm(r.sensitivity_classical_ue),
    })
}
