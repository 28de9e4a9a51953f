//! Sampled equivalent baseband models for communication and sensing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::performance::NoiseBreakdown;
use crate::photodetection::LinearizedResponse;

/// Generator for sample `m` of stream `seed`; every sample has its own
/// ChaCha stream so results do not depend on evaluation order.
pub fn sample_rng(seed: u64, m: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(m);
    rng
}

/// Draw from `CN(0, variance)`.
pub fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// AWGN sample `w(m) ~ CN(0, σw²)`.
pub fn noise_sample(noise: &NoiseBreakdown, seed: u64, m: u64) -> Complex64 {
    complex_gaussian(&mut sample_rng(seed, m), noise.sigma_w_sq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    pub index_l: usize,
    pub coefficient: Complex64,
    pub variance: f64,
}

impl ChannelTap {
    pub fn fixed(index_l: usize, coefficient: Complex64) -> Self {
        Self { index_l, coefficient, variance: coefficient.norm_sqr() }
    }

    /// Rayleigh tap `h_ℓ ~ CN(0, variance)`, drawn from its own stream.
    pub fn rayleigh(index_l: usize, variance: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX - index_l as u64);
        Self { index_l, coefficient: complex_gaussian(&mut rng, variance), variance }
    }
}

/// `√ϱ·Φ`, the receiver's complex baseband gain.
pub fn receiver_gain(resp: &LinearizedResponse) -> Complex64 {
    resp.gain_rho.sqrt() * resp.phase_phi
}

/// `Ṽb(m) = √ϱ·Φ·h·s_b(m) + w(m)`.
pub fn comm_narrowband(m: u64, s_b: Complex64, h: &ChannelTap, resp: &LinearizedResponse, noise: &NoiseBreakdown, seed: u64) -> Complex64 {
    receiver_gain(resp) * h.coefficient * s_b + noise_sample(noise, seed, m)
}

/// `Ṽb(m) = √ϱ·Φ·Σ_ℓ h_ℓ·s_b(m−ℓ) + w(m)`; `history[k]` holds `s_b(m−k)`
/// and missing history counts as zero.
pub fn comm_wideband(
    m: u64,
    history: &[Complex64],
    taps: &[ChannelTap],
    resp: &LinearizedResponse,
    noise: &NoiseBreakdown,
    seed: u64,
) -> Complex64 {
    let conv: Complex64 = taps
        .iter()
        .map(|t| history.get(t.index_l).map_or(Complex64::new(0.0, 0.0), |s| t.coefficient * s))
        .sum();
    receiver_gain(resp) * conv + noise_sample(noise, seed, m)
}

/// Wideband outputs for a whole input block, `s[m]` at sample `m`.
pub fn comm_wideband_block(
    s: &[Complex64],
    taps: &[ChannelTap],
    resp: &LinearizedResponse,
    noise: &NoiseBreakdown,
    seed: u64,
) -> Vec<Complex64> {
    let g = receiver_gain(resp);
    (0..s.len())
        .into_par_iter()
        .map(|m| {
            let conv: Complex64 = taps
                .iter()
                .filter(|t| t.index_l <= m)
                .map(|t| t.coefficient * s[m - t.index_l])
                .sum();
            g * conv + noise_sample(noise, seed, m as u64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingTarget {
    pub nominal_range_r0: f64,
    pub velocity_v: f64,
    pub pulse_index_p: u64,
    pub pri_t: f64,
    pub path_gain_a: f64,
}

impl SensingTarget {
    pub fn new(nominal_range_r0: f64, velocity_v: f64, pulse_index_p: u64, pri_t: f64, path_gain_a: f64) -> Result<Self> {
        let t = Self { nominal_range_r0, velocity_v, pulse_index_p, pri_t, path_gain_a };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nominal_range_r0 > 0.0) {
            return Err(Error::InvalidTarget(format!("range must be positive, got {}", self.nominal_range_r0)));
        }
        if !(self.range() > 0.0) {
            return Err(Error::InvalidTarget(format!(
                "target crosses the receiver: |v|·p·T = {} ≥ R0 = {}",
                (self.velocity_v * self.pulse_index_p as f64 * self.pri_t).abs(),
                self.nominal_range_r0
            )));
        }
        Ok(())
    }

    pub fn with_pulse(self, p: u64) -> Result<Self> {
        Self { pulse_index_p: p, ..self }.validate().map(|_| Self { pulse_index_p: p, ..self })
    }

    /// `R0 − v·p·T`.
    pub fn range(&self) -> f64 {
        self.nominal_range_r0 - self.velocity_v * self.pulse_index_p as f64 * self.pri_t
    }

    /// `ā = a·exp(−j4πfc(R0 − v·p·T)/c)`.
    pub fn channel(&self, fc: f64) -> Complex64 {
        Complex64::from_polar(self.path_gain_a, -4.0 * PI * fc * self.range() / SPEED_OF_LIGHT)
    }
}

/// `Ṽb(m) = √ϱ·Φ·ā_sen·s_b(m) + w(m)`.
pub fn sensing_model(
    m: u64,
    s_b: Complex64,
    target: &SensingTarget,
    resp: &LinearizedResponse,
    noise: &NoiseBreakdown,
    fc: f64,
    seed: u64,
) -> Result<Complex64> {
    target.validate()?;
    Ok(receiver_gain(resp) * target.channel(fc) * s_b + noise_sample(noise, seed, m))
}

/// Narrowband output written in the aperture form `√(ϱ/Ae)·Φ·x_b` with
/// `x_b = √Ae·h·s_b`. The aperture cancels.
pub fn aperture_form(m: u64, s_b: Complex64, h: &ChannelTap, ae: f64, resp: &LinearizedResponse, noise: &NoiseBreakdown, seed: u64) -> Complex64 {
    let x_b = ae.sqrt() * h.coefficient * s_b;
    (resp.gain_rho / ae).sqrt() * resp.phase_phi * x_b + noise_sample(noise, seed, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scheme;

    fn resp(rho: f64, theta_y: f64) -> LinearizedResponse {
        LinearizedResponse {
            kappa: 1.0,
            varphi: 0.0,
            psi_p: 0.0,
            gain_rho: rho,
            phase_phi: Complex64::from_polar(1.0, -theta_y),
            scheme: Scheme::Diod,
        }
    }

    fn quiet() -> NoiseBreakdown {
        NoiseBreakdown::new(0.0, 0.0, 0.0, Scheme::Diod)
    }

    #[test]
    fn noiseless_narrowband() {
        let s = Complex64::new(0.3, -0.7);
        let h = ChannelTap::fixed(0, Complex64::new(1.0, 0.0));
        let y = comm_narrowband(5, s, &h, &resp(4.0, 0.4), &quiet(), 1);
        assert!((y - 2.0 * Complex64::from_polar(1.0, -0.4) * s).norm() < 1e-15);
    }

    #[test]
    fn two_tap_convolution() {
        let r = resp(1.0, 0.0);
        let taps = [ChannelTap::fixed(0, Complex64::new(0.5, 0.1)), ChannelTap::fixed(1, Complex64::new(-0.2, 0.3))];
        let hist = [Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)];
        let y = comm_wideband(1, &hist, &taps, &r, &quiet(), 0);
        let want = Complex64::new(0.5, 0.1) * hist[0] + Complex64::new(-0.2, 0.3) * hist[1];
        assert!((y - want).norm() < 1e-15);
        let zero = [ChannelTap::fixed(0, Complex64::new(0.0, 0.0))];
        let noisy = NoiseBreakdown::new(1.0, 0.0, 0.0, Scheme::Diod);
        assert_eq!(comm_wideband(3, &hist, &zero, &r, &noisy, 9), noise_sample(&noisy, 9, 3));
    }

    #[test]
    fn single_tap_wideband_is_narrowband() {
        let r = resp(2.5, 1.1);
        let n = NoiseBreakdown::new(0.3, 0.2, 0.1, Scheme::Diod);
        let h = ChannelTap::rayleigh(0, 1.0, 7);
        let s = Complex64::new(0.2, 0.9);
        assert_eq!(comm_wideband(11, &[s], &[h], &r, &n, 3), comm_narrowband(11, s, &h, &r, &n, 3));
        let block = comm_wideband_block(&[s, s, s], &[h], &r, &n, 3);
        assert_eq!(block[2], comm_narrowband(2, s, &h, &r, &n, 3));
    }

    #[test]
    fn noise_variance_and_determinism() {
        let n = NoiseBreakdown::new(1.0, 0.5, 0.5, Scheme::Diod);
        let count = 100_000;
        let var = (0..count).map(|seed| noise_sample(&n, seed, 0).norm_sqr()).sum::<f64>() / count as f64;
        assert!((var - n.sigma_w_sq).abs() / n.sigma_w_sq < 0.02, "{var}");
        assert_eq!(noise_sample(&n, 42, 17), noise_sample(&n, 42, 17));
        assert_ne!(noise_sample(&n, 42, 17), noise_sample(&n, 42, 18));
        assert_eq!(ChannelTap::rayleigh(2, 1.0, 5), ChannelTap::rayleigh(2, 1.0, 5));
    }

    #[test]
    fn circular_symmetry() {
        let r = resp(3.0, 0.2);
        let h = ChannelTap::fixed(0, Complex64::new(0.4, -0.9));
        let s = Complex64::new(0.6, 0.8);
        let rot = Complex64::from_polar(1.0, 0.77);
        let a = comm_narrowband(0, s, &h, &r, &quiet(), 0);
        let b = comm_narrowband(0, s * rot, &h, &r, &quiet(), 0);
        assert!((b - a * rot).norm() < 1e-15);
    }

    #[test]
    fn aperture_cancels() {
        let r = resp(3.0, 0.2);
        let n = NoiseBreakdown::new(0.1, 0.1, 0.1, Scheme::Diod);
        let h = ChannelTap::fixed(0, Complex64::new(0.4, -0.9));
        let s = Complex64::new(0.6, 0.8);
        let direct = comm_narrowband(3, s, &h, &r, &n, 8);
        for ae in [1e-6, 1.48e-4, 2.0] {
            assert!((aperture_form(3, s, &h, ae, &r, &n, 8) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn sensing_phase() {
        let r = resp(1.0, 0.0);
        let fc = 6.9458e9;
        let still = SensingTarget::new(150.0, 0.0, 0, 1e-3, 1.0).unwrap();
        let a = sensing_model(0, Complex64::new(1.0, 0.0), &still, &r, &quiet(), fc, 0).unwrap();
        let b = sensing_model(0, Complex64::new(1.0, 0.0), &still.with_pulse(9).unwrap(), &r, &quiet(), fc, 0).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!((a - Complex64::from_polar(1.0, -4.0 * PI * fc * 150.0 / SPEED_OF_LIGHT)).norm() < 1e-12);

        let moving = SensingTarget::new(150.0, 15.0, 3, 1e-3, 1.0).unwrap();
        let step = moving.with_pulse(4).unwrap().channel(fc) / moving.channel(fc);
        let want = 4.0 * PI * fc * 15.0 * 1e-3 / SPEED_OF_LIGHT;
        let got = step.arg();
        let wrapped = (want + PI).rem_euclid(2.0 * PI) - PI;
        assert!((got - wrapped).abs() < 1e-9, "{got} {wrapped}");
    }

    #[test]
    fn invalid_targets() {
        assert!(matches!(SensingTarget::new(0.0, 1.0, 0, 1e-3, 1.0), Err(Error::InvalidTarget(_))));
        assert!(matches!(SensingTarget::new(1.0, 100.0, 20, 1e-3, 1.0), Err(Error::InvalidTarget(_))));
        assert!(SensingTarget::new(1.0, -100.0, 5, 1e-3, 1.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn aperture_always_cancels(
                log_ae in -6.0..1.0f64, rho in 0.01..100.0f64, theta in 0.0..6.28f64,
                s_re in -1.0..1.0f64, s_im in -1.0..1.0f64, m in 0u64..1000, seed in any::<u64>(),
            ) {
                let r = resp(rho, theta);
                let n = NoiseBreakdown::new(0.4, 0.3, 0.3, Scheme::Diod);
                let h = ChannelTap::rayleigh(0, 1.0, seed);
                let s = Complex64::new(s_re, s_im);
                let direct = comm_narrowband(m, s, &h, &r, &n, seed);
                let via = aperture_form(m, s, &h, 10f64.powf(log_ae), &r, &n, seed);
                prop_assert!((via - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
            }

            #[test]
            fn seeded_paths_repeat(seed in any::<u64>(), len in 1usize..64) {
                let r = resp(1.5, 0.2);
                let n = NoiseBreakdown::new(0.4, 0.3, 0.3, Scheme::Diod);
                let taps = [ChannelTap::rayleigh(0, 0.7, seed), ChannelTap::rayleigh(1, 0.3, seed)];
                let s: Vec<Complex64> = (0..len).map(|k| Complex64::from_polar(1.0, k as f64)).collect();
                let a = comm_wideband_block(&s, &taps, &r, &n, seed);
                let b = comm_wideband_block(&s, &taps, &r, &n, seed);
                prop_assert_eq!(a, b);
                prop_assert_eq!(taps[1], ChannelTap::rayleigh(1, 0.3, seed));
            }
        }
    }
}
