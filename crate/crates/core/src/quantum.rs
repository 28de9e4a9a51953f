//! Four-level ladder response: closed-form coherence, susceptibility and
//! its derivative, and a numerical steady-state solver used as an oracle.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use crate::config::AtomicVaporConfig;
use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};

pub type ComplexSusceptibility = Complex64;

const DENOMINATOR_FLOOR: f64 = 1e-300;
const SINGULAR_RATIO: f64 = 1e-10;

/// Probe, coupling and RF-transition Rabi frequencies, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RabiSet {
    pub omega_p: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
}

impl RabiSet {
    pub fn new(omega_p: f64, omega_c: f64, omega_rf: f64) -> Self {
        Self { omega_p, omega_c, omega_rf }
    }

    pub fn with_rf(self, omega_rf: f64) -> Self {
        Self { omega_rf, ..self }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.omega_p * s, self.omega_c * s, self.omega_rf * s)
    }
}

/// Probe, coupling and LO detunings, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DetuningSet {
    pub delta_p: f64,
    pub delta_c: f64,
    pub delta_l: f64,
}

impl DetuningSet {
    pub fn new(delta_p: f64, delta_c: f64, delta_l: f64) -> Self {
        Self { delta_p, delta_c, delta_l }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.delta_p * s, self.delta_c * s, self.delta_l * s)
    }

    pub fn is_zero(&self) -> bool {
        self.delta_p == 0.0 && self.delta_c == 0.0 && self.delta_l == 0.0
    }
}

/// The nine polynomials of the closed-form coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl DensityCoefficients {
    /// `(A1x²+A2x+A3, B1x²+B2x+B3, C1x²+C2x+C3)` at `x = Ω²`.
    fn quartics(&self, x: f64) -> (f64, f64, f64) {
        (
            (self.a1 * x + self.a2) * x + self.a3,
            (self.b1 * x + self.b2) * x + self.b3,
            (self.c1 * x + self.c2) * x + self.c3,
        )
    }

    /// Derivatives of the quartics with respect to `x = Ω²`.
    fn quartic_slopes(&self, x: f64) -> (f64, f64, f64) {
        (2.0 * self.a1 * x + self.a2, 2.0 * self.b1 * x + self.b2, 2.0 * self.c1 * x + self.c2)
    }
}

#[rustfmt::skip]
pub fn density_coefficients(det: DetuningSet, omega_p: f64, omega_c: f64, gamma2: f64) -> DensityCoefficients {
    let (dp, dc, dl) = (det.delta_p, det.delta_c, det.delta_l);
    let (wp, wc, g2) = (omega_p, omega_c, gamma2);
    let p = |x: f64, n: i32| x.powi(n);

    let a1 = -2.0 * dp;
    let a2 = 16.0 * p(dc, 2) * dp + 32.0 * dc * p(dp, 2) + 16.0 * dl * dc * dp - 2.0 * dc * p(wc, 2)
        + 16.0 * p(dp, 3) + 16.0 * dl * p(dp, 2) - 2.0 * dp * p(wc, 2) - 2.0 * dl * p(wc, 2);
    let a3 = -32.0 * p(dc, 4) * dp - 64.0 * p(dc, 3) * dl * dp - 128.0 * p(dc, 3) * p(dp, 2)
        + 8.0 * p(dc, 3) * p(wc, 2) - 32.0 * p(dc, 2) * p(dl, 2) * dp - 192.0 * p(dc, 2) * dl * p(dp, 2)
        + 16.0 * p(dc, 2) * dl * p(wc, 2) - 192.0 * p(dc, 2) * p(dp, 3) + 24.0 * p(dc, 2) * dp * p(wc, 2)
        - 64.0 * dc * p(dl, 2) * p(dp, 2) + 8.0 * dc * p(dl, 2) * p(wc, 2) - 192.0 * dc * dl * p(dp, 3)
        + 32.0 * dc * dl * dp * p(wc, 2) - 128.0 * dc * p(dp, 4) + 24.0 * dc * p(dp, 2) * p(wc, 2)
        - 32.0 * p(dl, 2) * p(dp, 3) + 8.0 * p(dl, 2) * dp * p(wc, 2) - 64.0 * dl * p(dp, 4)
        + 16.0 * dl * p(dp, 2) * p(wc, 2) - 32.0 * p(dp, 5) + 8.0 * p(dp, 3) * p(wc, 2);

    let b1 = g2;
    let b2 = 8.0 * g2 * (-p(dc, 2) - 2.0 * dc * dp - dl * dc - p(dp, 2) - dl * dp);
    let b3 = g2 * (16.0 * p(dc, 4) + 32.0 * p(dc, 3) * dl + 64.0 * p(dc, 3) * dp + 16.0 * p(dc, 2) * p(dl, 2)
        + 96.0 * p(dc, 2) * dl * dp + 96.0 * p(dc, 2) * p(dp, 2) + 32.0 * dc * p(dl, 2) * dp
        + 96.0 * dc * dl * p(dp, 2) + 64.0 * dc * p(dp, 3) + 16.0 * p(dl, 2) * p(dp, 2)
        + 32.0 * dl * p(dp, 3) + 16.0 * p(dp, 4));

    let c1 = 4.0 * p(dp, 2) + 2.0 * p(wp, 2) + p(g2, 2);
    let c2 = -32.0 * p(dc, 2) * p(dp, 2) - 16.0 * p(dc, 2) * p(wp, 2) - 8.0 * p(dc, 2) * p(g2, 2)
        - 64.0 * dc * p(dp, 3) - 32.0 * dl * dc * p(dp, 2) + 8.0 * dc * dp * p(wc, 2)
        - 32.0 * dc * dp * p(wp, 2) - 16.0 * dc * dp * p(g2, 2) - 16.0 * dl * dc * p(wp, 2)
        - 8.0 * dl * dc * p(g2, 2) - 32.0 * p(dp, 4) - 32.0 * dl * p(dp, 3) + 8.0 * p(dp, 2) * p(wc, 2)
        - 16.0 * p(dp, 2) * p(wp, 2) - 8.0 * p(dp, 2) * p(g2, 2) + 8.0 * dl * dp * p(wc, 2)
        - 16.0 * dl * dp * p(wp, 2) - 8.0 * dl * dp * p(g2, 2) + 2.0 * p(wc, 2) * p(wp, 2) + 2.0 * p(wp, 4);
    let c3 = 64.0 * p(dc, 4) * p(dp, 2) + 32.0 * p(dc, 4) * p(wp, 2) + 16.0 * p(dc, 4) * p(g2, 2)
        + 128.0 * p(dc, 3) * dl * p(dp, 2) + 64.0 * p(dc, 3) * dl * p(wp, 2) + 32.0 * p(dc, 3) * dl * p(g2, 2)
        + 256.0 * p(dc, 3) * p(dp, 3) - 32.0 * p(dc, 3) * dp * p(wc, 2) + 128.0 * p(dc, 3) * dp * p(wp, 2)
        + 64.0 * p(dc, 3) * dp * p(g2, 2) + 64.0 * p(dc, 2) * p(dl, 2) * p(dp, 2)
        + 32.0 * p(dc, 2) * p(dl, 2) * p(wp, 2) + 16.0 * p(dc, 2) * p(dl, 2) * p(g2, 2)
        + 384.0 * p(dc, 2) * dl * p(dp, 3) - 64.0 * p(dc, 2) * dl * dp * p(wc, 2)
        + 192.0 * p(dc, 2) * dl * dp * p(wp, 2) + 96.0 * p(dc, 2) * dl * dp * p(g2, 2)
        + 384.0 * p(dc, 2) * p(dp, 4) - 96.0 * p(dc, 2) * p(dp, 2) * p(wc, 2)
        + 192.0 * p(dc, 2) * p(dp, 2) * p(wp, 2) + 96.0 * p(dc, 2) * p(dp, 2) * p(g2, 2)
        + 4.0 * p(dc, 2) * p(wc, 4) + 8.0 * p(dc, 2) * p(wc, 2) * p(wp, 2) + 8.0 * p(dc, 2) * p(wp, 4)
        + 128.0 * dc * p(dl, 2) * p(dp, 3) - 32.0 * dc * p(dl, 2) * dp * p(wc, 2)
        + 64.0 * dc * p(dl, 2) * dp * p(wp, 2) + 32.0 * dc * p(dl, 2) * dp * p(g2, 2)
        + 384.0 * dc * dl * p(dp, 4) - 128.0 * dc * dl * p(dp, 2) * p(wc, 2)
        + 192.0 * dc * dl * p(dp, 2) * p(wp, 2) + 96.0 * dc * dl * p(dp, 2) * p(g2, 2)
        + 8.0 * dc * dl * p(wc, 4) + 16.0 * dc * dl * p(wc, 2) * p(wp, 2) + 8.0 * dc * dl * p(wp, 4)
        + 256.0 * dc * p(dp, 5) - 96.0 * dc * p(dp, 3) * p(wc, 2) + 128.0 * dc * p(dp, 3) * p(wp, 2)
        + 64.0 * dc * p(dp, 3) * p(g2, 2) + 8.0 * dc * dp * p(wc, 4) + 16.0 * dc * dp * p(wc, 2) * p(wp, 2)
        + 16.0 * dc * dp * p(wp, 4) + 64.0 * p(dl, 2) * p(dp, 4) - 32.0 * p(dl, 2) * p(dp, 2) * p(wc, 2)
        + 32.0 * p(dl, 2) * p(dp, 2) * p(wp, 2) + 16.0 * p(dl, 2) * p(dp, 2) * p(g2, 2)
        + 4.0 * p(dl, 2) * p(wc, 4) + 8.0 * p(dl, 2) * p(wc, 2) * p(wp, 2) + 4.0 * p(dl, 2) * p(wp, 4)
        + 128.0 * dl * p(dp, 5) - 64.0 * dl * p(dp, 3) * p(wc, 2) + 64.0 * dl * p(dp, 3) * p(wp, 2)
        + 32.0 * dl * p(dp, 3) * p(g2, 2) + 8.0 * dl * dp * p(wc, 4) + 16.0 * dl * dp * p(wc, 2) * p(wp, 2)
        + 8.0 * dl * dp * p(wp, 4) + 64.0 * p(dp, 6) - 32.0 * p(dp, 4) * p(wc, 2)
        + 32.0 * p(dp, 4) * p(wp, 2) + 16.0 * p(dp, 4) * p(g2, 2) + 4.0 * p(dp, 2) * p(wc, 4)
        + 8.0 * p(dp, 2) * p(wc, 2) * p(wp, 2) + 8.0 * p(dp, 2) * p(wp, 4);

    DensityCoefficients { a1, a2, a3, b1, b2, b3, c1, c2, c3 }
}

/// Frequency scale used to keep the degree-6 polynomials near unity.
fn frequency_scale(rabi: &RabiSet, det: &DetuningSet, gamma2: f64) -> f64 {
    let s = [gamma2, rabi.omega_p, rabi.omega_c, rabi.omega_rf, det.delta_p, det.delta_c, det.delta_l]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

struct Normalized {
    coeffs: DensityCoefficients,
    omega_p: f64,
    omega: f64,
    scale: f64,
}

fn normalized(rabi: RabiSet, det: DetuningSet, gamma2: f64) -> Normalized {
    let scale = frequency_scale(&rabi, &det, gamma2);
    let r = rabi.scaled(1.0 / scale);
    let coeffs = density_coefficients(det.scaled(1.0 / scale), r.omega_p, r.omega_c, gamma2 / scale);
    Normalized { coeffs, omega_p: r.omega_p, omega: r.omega_rf, scale }
}

fn checked_denominator(den: f64) -> Result<f64> {
    if !(den.abs() >= DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateDenominator(den.abs()));
    }
    Ok(den)
}

/// Closed-form steady-state coherence `ρ21`.
pub fn rho21(rabi: RabiSet, det: DetuningSet, gamma2: f64) -> Result<Complex64> {
    let n = normalized(rabi, det, gamma2);
    let (pa, pb, den) = n.coeffs.quartics(n.omega * n.omega);
    let den = checked_denominator(den)?;
    Ok(Complex64::new(pa, -pb) * (n.omega_p / den))
}

/// `2Nμ12²/(ε0ħ)`, the factor relating `ρ21/Ωp` to `−χ`.
pub fn susceptibility_prefactor(vapor: &AtomicVaporConfig) -> f64 {
    2.0 * vapor.chi_density() * vapor.dipole_mu12.powi(2) / (VACUUM_PERMITTIVITY * HBAR)
}

/// `χ = −(2Nμ12²/(ε0ħΩp))·ρ21`.
pub fn susceptibility(rabi: RabiSet, det: DetuningSet, vapor: &AtomicVaporConfig) -> Result<ComplexSusceptibility> {
    let n = normalized(rabi, det, vapor.decay_gamma2);
    let (pa, pb, den) = n.coeffs.quartics(n.omega * n.omega);
    let den = checked_denominator(den)?;
    // ρ21/Ωp carries one inverse frequency, hence the single 1/scale.
    Ok(-susceptibility_prefactor(vapor) * Complex64::new(pa, -pb) / (den * n.scale))
}

/// `dχ/dΩ_RF` at `Ω_RF = rabi.omega_rf`, in 1/(rad/s).
pub fn susceptibility_derivative(
    rabi: RabiSet,
    det: DetuningSet,
    vapor: &AtomicVaporConfig,
) -> Result<ComplexSusceptibility> {
    let n = normalized(rabi, det, vapor.decay_gamma2);
    let x = n.omega * n.omega;
    let (pa, pb, den) = n.coeffs.quartics(x);
    let (da, db, dc) = n.coeffs.quartic_slopes(x);
    let den = checked_denominator(den)?;
    let k = 2.0 * susceptibility_prefactor(vapor) * n.omega;
    let re = -k * (da / den - pa * dc / (den * den));
    let im = k * (db / den - pb * dc / (den * den));
    Ok(Complex64::new(re, im) / (n.scale * n.scale))
}

/// Ladder Hamiltonian in the rotating frame (units of ħ).
pub fn build_hamiltonian(rabi: RabiSet, det: DetuningSet) -> Matrix4<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let (wp, wc, wr) = (rabi.omega_p / 2.0, rabi.omega_c / 2.0, rabi.omega_rf / 2.0);
    let d2 = det.delta_p;
    let d3 = d2 + det.delta_c;
    let d4 = d3 + det.delta_l;
    Matrix4::new(
        c(0.0), c(wp), c(0.0), c(0.0),
        c(wp), c(d2), c(wc), c(0.0),
        c(0.0), c(wc), c(d3), c(wr),
        c(0.0), c(0.0), c(wr), c(d4),
    )
}

/// A 4×4 density matrix with physicality diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    pub rho: Matrix4<Complex64>,
}

impl DensityMatrix4 {
    /// `ρ_ij` with 1-based level labels.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i - 1, j - 1)]
    }

    pub fn rho21(&self) -> Complex64 {
        self.element(2, 1)
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// Trace, Hermiticity and positivity within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        (self.trace() - Complex64::new(1.0, 0.0)).norm() <= tol
            && self.hermiticity_error() <= tol
            && self.min_eigenvalue() >= -tol
    }
}

type Super = SMatrix<Complex64, 16, 16>;

/// Row-major vectorization: `vec(AXB) = (A ⊗ Bᵀ)·vec(X)`.
fn kron(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> Super {
    let mut out = Super::zeros();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Liouvillian of `−j[H,ρ] − ½{Γ,ρ} + Λ(ρ)` in row-major vectorization.
fn liouvillian(h: &Matrix4<Complex64>, decays: [f64; 4]) -> Super {
    let id = Matrix4::<Complex64>::identity();
    let g = Matrix4::from_diagonal(&decays.map(|x| Complex64::new(x, 0.0)).into());
    let j = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let mut l = (kron(h, &id) - kron(&id, &h.transpose())) * (-j) - (kron(&g, &id) + kron(&id, &g.transpose())) * half;
    let idx = |a: usize, b: usize| 4 * a + b;
    // Repopulation: ρ11 gains γ2ρ22 + γ4ρ44, ρ22 gains γ3ρ33.
    l[(idx(0, 0), idx(1, 1))] += decays[1];
    l[(idx(0, 0), idx(3, 3))] += decays[3];
    l[(idx(1, 1), idx(2, 2))] += decays[2];
    l
}

/// Time derivative of `ρ` under the ladder master equation.
pub fn lindblad_rhs(
    rho: &Matrix4<Complex64>,
    h: &Matrix4<Complex64>,
    decays: [f64; 4],
) -> Matrix4<Complex64> {
    let j = Complex64::new(0.0, 1.0);
    let g = Matrix4::from_diagonal(&decays.map(|x| Complex64::new(x, 0.0)).into());
    let mut d = (h * rho - rho * h) * (-j) - (g * rho + rho * g) * Complex64::new(0.5, 0.0);
    d[(0, 0)] += decays[1] * rho[(1, 1)] + decays[3] * rho[(3, 3)];
    d[(1, 1)] += decays[2] * rho[(2, 2)];
    d
}

/// Decay rates `{0, γ2, γ3, γ4}`; the minor decays are zeroed unless asked for.
pub fn decay_vector(vapor: &AtomicVaporConfig, include_minor_decays: bool) -> [f64; 4] {
    if include_minor_decays {
        [0.0, vapor.decay_gamma2, vapor.decay_gamma3, vapor.decay_gamma4]
    } else {
        [0.0, vapor.decay_gamma2, 0.0, 0.0]
    }
}

/// Steady state of the master equation by a direct 16×16 solve with the
/// trace condition in place of the first row.
pub fn lindblad_steady_state(
    rabi: RabiSet,
    det: DetuningSet,
    vapor: &AtomicVaporConfig,
    include_minor_decays: bool,
) -> Result<DensityMatrix4> {
    steady_state_with_decays(rabi, det, decay_vector(vapor, include_minor_decays))
}

pub fn steady_state_with_decays(rabi: RabiSet, det: DetuningSet, decays: [f64; 4]) -> Result<DensityMatrix4> {
    let scale = frequency_scale(&rabi, &det, decays.iter().fold(0.0f64, |m, x| m.max(*x)));
    let h = build_hamiltonian(rabi.scaled(1.0 / scale), det.scaled(1.0 / scale));
    let mut l = liouvillian(&h, decays.map(|x| x / scale));
    for c in 0..16 {
        l[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..4 {
        l[(0, 5 * k)] = Complex64::new(1.0, 0.0);
    }
    let sv = l.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &x| (a.max(x), b.min(x)));
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio >= SINGULAR_RATIO) {
        return Err(Error::SingularSuperoperator(ratio));
    }
    let mut b = SVector::<Complex64, 16>::zeros();
    b[0] = Complex64::new(1.0, 0.0);
    let x = l.lu().solve(&b).ok_or(Error::SingularSuperoperator(ratio))?;
    Ok(DensityMatrix4 { rho: Matrix4::from_fn(|i, j| x[4 * i + j]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{table1_preset, FrequencyConvention};
    use approx::assert_relative_eq;

    fn table1_rabi() -> (RabiSet, DetuningSet, AtomicVaporConfig) {
        let cfg = table1_preset();
        let op = crate::chain::OperatingPoint::new(&cfg, crate::config::Scheme::Diod).unwrap();
        (op.rabi, op.detuning, cfg.vapor)
    }

    #[test]
    fn zero_detuning_coefficients() {
        let (wp, wc, g2) = (1.3, 0.7, 2.1);
        let c = density_coefficients(DetuningSet::default(), wp, wc, g2);
        assert_eq!((c.a1, c.a2, c.a3, c.b2, c.b3, c.c3), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(c.b1, g2);
        assert_relative_eq!(c.c1, 2.0 * wp * wp + g2 * g2);
        assert_relative_eq!(c.c2, 2.0 * wc * wc * wp * wp + 2.0 * wp.powi(4));
    }

    #[test]
    fn unit_point_coefficients() {
        // Δp = 1, everything else at unity: each polynomial collapses to the
        // sum of its pure-Δp and mixed Δp/Ω/γ terms.
        let c = density_coefficients(DetuningSet::new(1.0, 0.0, 0.0), 1.0, 1.0, 1.0);
        assert_eq!(c.a1, -2.0);
        assert_eq!(c.a2, 16.0 - 2.0);
        assert_eq!(c.a3, -32.0 + 8.0);
        assert_eq!(c.b1, 1.0);
        assert_eq!(c.b2, -8.0);
        assert_eq!(c.b3, 16.0);
        assert_eq!(c.c1, 4.0 + 2.0 + 1.0);
        assert_eq!(c.c2, -32.0 + 8.0 - 16.0 - 8.0 + 2.0 + 2.0);
        assert_eq!(c.c3, 64.0 - 32.0 + 32.0 + 16.0 + 4.0 + 8.0 + 8.0);
    }

    #[test]
    fn zero_detuning_rho21_is_imaginary() {
        let (wp, wc, wr, g2) = (2.0e6, 3.0e6, 5.0e6, 3.3e7);
        let r = rho21(RabiSet::new(wp, wc, wr), DetuningSet::default(), g2).unwrap();
        assert_eq!(r.re, 0.0);
        let want = -g2 * wp * wr * wr / ((2.0 * wp * wp + g2 * g2) * wr * wr + 2.0 * wp * wp * (wc * wc + wp * wp));
        assert_relative_eq!(r.im, want, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_point_is_reported() {
        let e = rho21(RabiSet::new(1.0, 1.0, 0.0), DetuningSet::default(), 1.0).unwrap_err();
        assert!(matches!(e, Error::DegenerateDenominator(_)));
    }

    #[test]
    fn vanishing_probe() {
        let r = rho21(RabiSet::new(1e-9, 1.0, 1.0), DetuningSet::new(0.3, -0.2, 0.1), 1.0).unwrap();
        assert!(r.norm() < 1e-8);
    }

    #[test]
    fn hamiltonian_shape() {
        assert_eq!(build_hamiltonian(RabiSet::default(), DetuningSet::default()), Matrix4::zeros());
        let h = build_hamiltonian(RabiSet::default(), DetuningSet::new(1.0, 2.0, 3.0));
        let diag: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 3.0, 6.0]);
        let h = build_hamiltonian(RabiSet::new(1.0, 2.0, 4.0), DetuningSet::new(0.5, -1.0, 2.0));
        assert_eq!(h, h.adjoint());
        assert_eq!(h[(2, 3)].re, 2.0);
    }

    #[test]
    fn closed_form_matches_steady_state_at_table1() {
        let (rabi, det, vapor) = table1_rabi();
        let closed = rho21(rabi, det, vapor.decay_gamma2).unwrap();
        let ss = lindblad_steady_state(rabi, det, &vapor, false).unwrap();
        assert!(ss.is_physical(1e-10));
        assert!((closed - ss.rho21()).norm() / ss.rho21().norm() <= 1e-8);
    }

    #[test]
    fn minor_decay_shift_is_first_order() {
        let (rabi, det, vapor) = table1_rabi();
        let closed = rho21(rabi, det, vapor.decay_gamma2).unwrap();
        let shift = |k: f64| {
            let decays = [0.0, vapor.decay_gamma2, k * vapor.decay_gamma3, k * vapor.decay_gamma4];
            let ss = steady_state_with_decays(rabi, det, decays).unwrap();
            assert!(ss.is_physical(1e-10));
            (closed - ss.rho21()).norm() / closed.norm()
        };
        let (full, tenth, hundredth) = (shift(1.0), shift(0.1), shift(0.01));
        assert!(full > 0.0 && full < 0.2, "{full}");
        assert!((hundredth / tenth - 0.1).abs() < 0.02, "{tenth} {hundredth}");
    }

    #[test]
    fn absorption_at_table1() {
        let (rabi, det, vapor) = table1_rabi();
        assert!(susceptibility(rabi, det, &vapor).unwrap().im > 0.0);
        let chi0 = susceptibility(rabi, DetuningSet::default(), &vapor).unwrap();
        assert_eq!(chi0.re, 0.0);
        assert!(chi0.im > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (rabi, det, vapor) = table1_rabi();
        let h = rabi.omega_rf * 1e-6;
        let plus = susceptibility(rabi.with_rf(rabi.omega_rf + h), det, &vapor).unwrap();
        let minus = susceptibility(rabi.with_rf(rabi.omega_rf - h), det, &vapor).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        let an = susceptibility_derivative(rabi, det, &vapor).unwrap();
        assert!((fd - an).norm() / an.norm() < 1e-6);
        let d0 = susceptibility_derivative(rabi, DetuningSet::default(), &vapor).unwrap();
        assert_eq!(d0.re, 0.0);
    }

    #[test]
    fn derivative_scales_inversely() {
        let (rabi, det, mut vapor) = table1_rabi();
        let a = susceptibility_derivative(rabi, det, &vapor).unwrap();
        let s = 3.7;
        vapor.decay_gamma2 *= s;
        let b = susceptibility_derivative(rabi.scaled(s), det.scaled(s), &vapor).unwrap();
        assert!((a / (s * s) - b).norm() / b.norm() < 1e-12);
    }

    #[test]
    fn susceptibility_matches_definition() {
        let (rabi, det, vapor) = table1_rabi();
        let chi = susceptibility(rabi, det, &vapor).unwrap();
        let direct = -susceptibility_prefactor(&vapor) * rho21(rabi, det, vapor.decay_gamma2).unwrap() / rabi.omega_p;
        assert!((chi - direct).norm() / direct.norm() < 1e-12);
        let ss = lindblad_steady_state(rabi, det, &vapor, false).unwrap();
        let oracle = -susceptibility_prefactor(&vapor) * ss.rho21() / rabi.omega_p;
        assert!((chi - oracle).norm() / oracle.norm() < 1e-8);
        assert!(chi.norm() < 1e-3);
    }

    #[test]
    fn undriven_upper_levels_are_singular() {
        let e = steady_state_with_decays(RabiSet::new(1.0, 0.0, 0.0), DetuningSet::default(), [0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(e, Err(Error::SingularSuperoperator(_))));
    }

    /// Classical RK4 on the master equation.
    fn integrate(rabi: RabiSet, det: DetuningSet, decays: [f64; 4], t_end: f64, dt: f64) -> Matrix4<Complex64> {
        let h = build_hamiltonian(rabi, det);
        let mut rho = Matrix4::<Complex64>::zeros();
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        let f = |r: &Matrix4<Complex64>| lindblad_rhs(r, &h, decays);
        let steps = (t_end / dt).ceil() as usize;
        let half = Complex64::new(dt / 2.0, 0.0);
        let full = Complex64::new(dt, 0.0);
        for _ in 0..steps {
            let k1 = f(&rho);
            let k2 = f(&(rho + k1 * half));
            let k3 = f(&(rho + k2 * half));
            let k4 = f(&(rho + k3 * full));
            rho += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
        }
        rho
    }

    #[test]
    fn two_level_limit_matches_time_integration() {
        let conv = FrequencyConvention::Angular;
        let g2 = conv.mhz(5.2);
        let decays = [0.0, g2, conv.mhz(3.9e-3), conv.mhz(1.7e-3)];
        for (wp, dp) in [(0.4 * g2, 0.0), (0.8 * g2, 0.3 * g2), (1.5 * g2, -0.7 * g2)] {
            let rabi = RabiSet::new(wp, 0.0, 0.0);
            let det = DetuningSet::new(dp, 0.0, 0.0);
            let ss = steady_state_with_decays(rabi, det, decays).unwrap();
            assert!(ss.is_physical(1e-10));
            let rho = integrate(rabi, det, decays, 200.0 / g2, 0.01 / g2);
            let err = (rho[(1, 0)] - ss.rho21()).norm() / ss.rho21().norm();
            assert!(err < 1e-6, "wp={wp} dp={dp} err={err}");
            // Textbook two-level coherence with T1 = 1/γ2, T2 = 2/γ2.
            let want = Complex64::new(-dp, -g2 / 2.0) * (wp / 2.0) / (dp * dp + g2 * g2 / 4.0 + wp * wp / 2.0);
            assert!((ss.rho21() - want).norm() / want.norm() < 1e-9, "{} vs {want}", ss.rho21());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = (RabiSet, DetuningSet)> {
            let (rabi, _, _) = table1_rabi();
            let mhz = FrequencyConvention::Angular.mhz(1.0);
            (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(
                move |(a, b, c, dp, dc, dl)| {
                    (
                        RabiSet::new(rabi.omega_p * a, rabi.omega_c * b, rabi.omega_rf * c),
                        DetuningSet::new(dp * mhz, dc * mhz, dl * mhz),
                    )
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn closed_form_matches_master_equation((rabi, det) in point()) {
                let (_, _, vapor) = table1_rabi();
                let dm = lindblad_steady_state(rabi, det, &vapor, false).unwrap();
                prop_assert!(dm.is_physical(1e-9));
                let closed = rho21(rabi, det, vapor.decay_gamma2).unwrap();
                prop_assert!((closed - dm.rho21()).norm() <= 1e-8 * dm.rho21().norm());
            }

            #[test]
            fn coherence_is_scale_invariant((rabi, det) in point(), e in -3.0..3.0f64) {
                let (_, _, vapor) = table1_rabi();
                let s = 10f64.powf(e);
                let a = rho21(rabi, det, vapor.decay_gamma2).unwrap();
                let b = rho21(rabi.scaled(s), det.scaled(s), vapor.decay_gamma2 * s).unwrap();
                prop_assert!((a - b).norm() <= 1e-10 * a.norm());
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(50))]

            #[test]
            fn derivative_matches_central_difference((rabi, det) in point()) {
                let (_, _, vapor) = table1_rabi();
                let h = 1e-4 * rabi.omega_rf;
                let up = susceptibility(rabi.with_rf(rabi.omega_rf + h), det, &vapor).unwrap();
                let down = susceptibility(rabi.with_rf(rabi.omega_rf - h), det, &vapor).unwrap();
                let fd = (up - down) / (2.0 * h);
                let exact = susceptibility_derivative(rabi, det, &vapor).unwrap();
                prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm());
            }
        }
    }
}
