use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("degenerate denominator in rho21 (|C1·Ω⁴ + C2·Ω² + C3| = {0:e})")]
    DegenerateDenominator(f64),

    #[error("steady-state superoperator is singular (σ_min/σ_max = {0:e}); steady state is not unique")]
    SingularSuperoperator(f64),

    #[error("RF signal too strong relative to the LO: Ωx = {omega_x:e} rad/s exceeds Ωl/10 = {limit:e} rad/s")]
    WeakLoViolation { omega_x: f64, limit: f64 },

    #[error("normalized error undefined: reference waveform has zero energy")]
    ZeroReference,

    #[error("waveform lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("SNR is infinite: every noise contribution is zero")]
    InfiniteSnr,

    #[error("dephasing rate unavailable: supply Gamma2 directly or both tau0 and u")]
    MissingLifetimeConstants,

    #[error("objective undefined at {parameter} = {value}")]
    ObjectiveUndefined { parameter: String, value: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("grid of {points} points exceeds budget of {budget}")]
    BudgetExceeded { points: u64, budget: u64 },

    #[error("invalid sensing geometry: {0}")]
    InvalidTarget(String),

    #[error("scenario produced no curves")]
    EmptyScenario,

    #[error("scenario {scenario}: {message}")]
    Scenario { scenario: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
