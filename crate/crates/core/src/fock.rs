//! Truncated-Fock-space primitives.
//!
//! States live in the number basis with an explicit cutoff `D`; a
//! [`FockVector`] holds the `D + 1` complex amplitudes `c_0..c_D`. Coherent
//! amplitudes are always assembled in log space so that the Poisson weights
//! stay accurate out to the far tails.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::special::{ln_factorial, ln_poisson_strip_sum, CompensatedSum};

/// Tolerance on `|Σ|c_n|² - 1|` below which a vector counts as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Complex amplitudes over number states `|0⟩..|D⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    /// Wraps an amplitude list; `amps` must hold at least the vacuum entry.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Domain("amplitude list is empty".into()));
        }
        Ok(Self { amps })
    }

    /// The zero vector with the given cutoff.
    pub fn zero(cutoff: usize) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); cutoff + 1],
        }
    }

    /// Number state `|n⟩` represented at the given cutoff.
    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::Domain(format!(
                "number state {n} exceeds cutoff {cutoff}"
            )));
        }
        let mut v = Self::zero(cutoff);
        v.amps[n] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude `c_n`, zero beyond the cutoff.
    pub fn amp(&self, n: usize) -> Complex64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    /// Squared norm `Σ |c_n|²`.
    pub fn norm2(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for a in &self.amps {
            acc.add(a.norm_sqr());
        }
        acc.value()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm2() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Returns the unit-norm rescaling, or [`Error::ZeroNorm`].
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm2();
        if n2 < f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / n2.sqrt();
        Ok(Self {
            amps: self.amps.iter().map(|a| a * scale).collect(),
        })
    }
}

/// Amplitude and phase of a coherent state `|ᾱ e^{iφ}⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    abar: f64,
    phi: f64,
}

impl CoherentParams {
    /// `abar ≥ 0`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(abar: f64, phi: f64) -> Result<Self> {
        if !abar.is_finite() || abar < 0.0 {
            return Err(Error::Domain(format!("amplitude {abar} must be ≥ 0")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain("phase must be finite".into()));
        }
        Ok(Self {
            abar,
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn from_complex(alpha: Complex64) -> Result<Self> {
        Self::new(alpha.norm(), if alpha.norm() == 0.0 { 0.0 } else { alpha.arg() })
    }

    pub fn abar(&self) -> f64 {
        self.abar
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.abar, self.phi)
    }
}

/// A Poisson pmf lookup `Pr[n | mean]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonQuery {
    pub mean: f64,
    pub n: usize,
}

/// Truncated coherent-state expansion plus the weight lost to truncation.
#[derive(Debug, Clone)]
pub struct CoherentFock {
    pub state: FockVector,
    pub truncation_weight: f64,
}

/// Default cutoff rule `D = ⌈λ + 12√λ + 25⌉` for the largest Poisson mean
/// `λ` in play; keeps every tail in the supported parameter ranges below
/// 1e-12.
pub fn default_cutoff(lambda: f64) -> usize {
    (lambda + 12.0 * lambda.sqrt() + 25.0).ceil() as usize
}

/// Number-basis expansion `c_n = e^{-ᾱ²/2} ᾱⁿ e^{inφ} / √(n!)`.
///
/// Each magnitude is `exp(-ᾱ²/2 + n ln ᾱ - ½ ln n!)`; the truncation weight
/// `1 - Σ|c_n|²` is computed as the upper Poisson tail so it stays accurate
/// when tiny.
pub fn coherent_fock(p: &CoherentParams, cutoff: usize) -> CoherentFock {
    let abar = p.abar();
    let mut amps = Vec::with_capacity(cutoff + 1);
    if abar == 0.0 {
        amps.push(Complex64::new(1.0, 0.0));
        amps.resize(cutoff + 1, Complex64::new(0.0, 0.0));
        return CoherentFock {
            state: FockVector { amps },
            truncation_weight: 0.0,
        };
    }
    let lambda = abar * abar;
    let ln_abar = abar.ln();
    for n in 0..=cutoff {
        let ln_mag = -lambda / 2.0 + n as f64 * ln_abar - 0.5 * ln_factorial(n);
        amps.push(Complex64::from_polar(ln_mag.exp(), n as f64 * p.phi()));
    }
    let ln_tail = -lambda + ln_poisson_strip_sum(lambda, cutoff + 1, 1);
    CoherentFock {
        state: FockVector { amps },
        truncation_weight: ln_tail.exp(),
    }
}

/// `ln Pr[n | λ] = -λ + n ln λ - ln n!`.
///
/// `λ = 0` returns `0` for `n = 0` and `-inf` for `n > 0`.
pub fn log_poisson_pmf(q: &PoissonQuery) -> f64 {
    debug_assert!(q.mean >= 0.0);
    if q.mean == 0.0 {
        return if q.n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -q.mean + q.n as f64 * q.mean.ln() - ln_factorial(q.n)
}

/// Truncated exponential `e_N(x) = Σ_{n=0}^{N} xⁿ/n!` by forward recurrence.
pub fn truncated_exp(x: f64, n_terms: usize) -> f64 {
    debug_assert!(x >= 0.0);
    let mut term = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for n in 1..=n_terms {
        term *= x / n as f64;
        acc.add(term);
    }
    acc.value()
}

/// `ln e_N(x)`, stable for arguments where `e_N` itself would overflow.
pub fn ln_truncated_exp(x: f64, n_terms: usize) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    // Peak term is at n ≈ min(N, x).
    let logs: Vec<f64> = (0..=n_terms)
        .map(|n| n as f64 * ln_x - ln_factorial(n))
        .collect();
    crate::special::log_sum_exp(&logs)
}

/// Inner product `⟨u|v⟩ = Σ conj(u_n) v_n`; the shorter vector is
/// zero-padded.
pub fn overlap(u: &FockVector, v: &FockVector) -> Complex64 {
    let len = u.amps.len().min(v.amps.len());
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for n in 0..len {
        let t = u.amps[n].conj() * v.amps[n];
        re.add(t.re);
        im.add(t.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Low-order moments of the normalized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMoments {
    pub mean_a: Complex64,
    pub mean_a2: Complex64,
    pub mean_n: f64,
    pub mean_n2: f64,
    /// Squared norm of the state as supplied, before normalization.
    pub norm2: f64,
}

/// `⟨a⟩`, `⟨a²⟩`, `⟨n⟩`, `⟨n²⟩` on the normalized state.
pub fn state_moments(v: &FockVector) -> Result<StateMoments> {
    let norm2 = v.norm2();
    if norm2 < f64::MIN_POSITIVE {
        return Err(Error::ZeroNorm);
    }
    let amps = &v.amps;
    let mut mean_a = Complex64::new(0.0, 0.0);
    let mut mean_a2 = Complex64::new(0.0, 0.0);
    let mut mean_n = CompensatedSum::new();
    let mut mean_n2 = CompensatedSum::new();
    for n in 0..amps.len() {
        let w = amps[n].norm_sqr();
        mean_n.add(n as f64 * w);
        mean_n2.add((n as f64) * (n as f64) * w);
        if n + 1 < amps.len() {
            mean_a += amps[n].conj() * ((n + 1) as f64).sqrt() * amps[n + 1];
        }
        if n + 2 < amps.len() {
            let w2 = (((n + 1) * (n + 2)) as f64).sqrt();
            mean_a2 += amps[n].conj() * w2 * amps[n + 2];
        }
    }
    Ok(StateMoments {
        mean_a: mean_a / norm2,
        mean_a2: mean_a2 / norm2,
        mean_n: mean_n.value() / norm2,
        mean_n2: mean_n2.value() / norm2,
        norm2,
    })
}

/// Default quadrature resolution for [`circle_projection_check`].
pub fn default_circle_points(cutoff: usize, n: i64) -> usize {
    8 * (cutoff + n.unsigned_abs() as usize + 1)
}

/// Discretized projection `∫ dφ/2π e^{-inφ} |ᾱe^{iφ}⟩` on `K` uniform
/// nodes.
///
/// The uniform trapezoid rule is exact for the band-limited integrand as
/// long as no aliased harmonic `n + jK` lands inside the cutoff, so the
/// result is `e^{-ᾱ²/2} (ᾱⁿ/√n!) |n⟩` for `n ≥ 0` and the zero vector for
/// `n < 0`, up to roundoff.
pub fn circle_projection_check(
    abar: f64,
    n: i64,
    k_points: usize,
    cutoff: usize,
) -> Result<FockVector> {
    let required = 4 * (cutoff + n.unsigned_abs() as usize);
    if k_points < required.max(1) {
        return Err(Error::Aliasing {
            points: k_points,
            required: required.max(1),
            cutoff,
            harmonic: n,
        });
    }
    let params = |phi: f64| CoherentParams::new(abar, phi).expect("abar validated");
    let mut re = vec![CompensatedSum::new(); cutoff + 1];
    let mut im = vec![CompensatedSum::new(); cutoff + 1];
    for k in 0..k_points {
        let phi = TAU * k as f64 / k_points as f64;
        let node = coherent_fock(&params(phi), cutoff);
        let weight = Complex64::from_polar(1.0 / k_points as f64, -(n as f64) * phi);
        for (m, amp) in node.state.amps.iter().enumerate() {
            let t = weight * amp;
            re[m].add(t.re);
            im[m].add(t.im);
        }
    }
    let amps = re
        .iter()
        .zip(&im)
        .map(|(r, i)| Complex64::new(r.value(), i.value()))
        .collect();
    Ok(FockVector { amps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coherent(abar: f64, phi: f64, cutoff: usize) -> CoherentFock {
        coherent_fock(&CoherentParams::new(abar, phi).unwrap(), cutoff)
    }

    #[test]
    fn phase_wraps_into_period() {
        let p = CoherentParams::new(1.0, -1.0).unwrap();
        assert!((p.phi() - (TAU - 1.0)).abs() < 1e-15);
        let p = CoherentParams::new(1.0, 3.0 * TAU + 0.25).unwrap();
        assert!((p.phi() - 0.25).abs() < 1e-12);
        assert!(CoherentParams::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn vacuum_expansion() {
        let c = coherent(0.0, 0.0, 4);
        assert_eq!(c.state.amp(0), Complex64::new(1.0, 0.0));
        for n in 1..=4 {
            assert_eq!(c.state.amp(n), Complex64::new(0.0, 0.0));
        }
        assert_eq!(c.truncation_weight, 0.0);
    }

    #[test]
    fn unit_amplitude_vacuum_component() {
        let c = coherent(1.0, 0.0, 0);
        assert!((c.state.amp(0).re - (-0.5f64).exp()).abs() < 1e-15);
        // weight of everything beyond |0>: 1 - e^{-1}
        assert!((c.truncation_weight - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn coherent_norm_matches_poisson_cdf() {
        // abar = 2, cutoff 40: the tail beyond 40 at λ = 4 is ~1e-26, so the
        // squared norm must be 1 within 1e-12.
        let c = coherent(2.0, std::f64::consts::FRAC_PI_2, 40);
        assert!((c.state.norm2() - 1.0).abs() < 1e-12);
        assert!(c.state.is_normalized());
        // And norm2 + tail = 1 at much tighter accuracy.
        assert!((c.state.norm2() + c.truncation_weight - 1.0).abs() < 1e-13);
    }

    #[test]
    fn log_pmf_examples() {
        assert_eq!(log_poisson_pmf(&PoissonQuery { mean: 1.0, n: 0 }), -1.0);
        assert_eq!(log_poisson_pmf(&PoissonQuery { mean: 0.0, n: 0 }), 0.0);
        assert_eq!(
            log_poisson_pmf(&PoissonQuery { mean: 0.0, n: 3 }),
            f64::NEG_INFINITY
        );
        // Oracle: ln(e^-9 9^9/9!) with 9^9 = 387420489 and 9! = 362880.
        let oracle = (387_420_489.0f64 / 362_880.0).ln() - 9.0;
        let got = log_poisson_pmf(&PoissonQuery { mean: 9.0, n: 9 });
        assert!((got - oracle).abs() < 1e-13, "{got} vs {oracle}");
        assert!((got - (-2.026_806_284_055_5)).abs() < 1e-12);
    }

    #[test]
    fn pmf_exponentiates_to_relative_accuracy() {
        // Direct-product oracle: p = e^-λ Π λ/k, an independent route.
        for &(mean, n) in &[(0.5f64, 3usize), (9.0, 9), (16.0, 40), (100.0, 120)] {
            let mut oracle = (-mean).exp();
            for k in 1..=n {
                oracle *= mean / k as f64;
            }
            let got = log_poisson_pmf(&PoissonQuery { mean, n }).exp();
            assert!(
                ((got - oracle) / oracle).abs() < 1e-12,
                "mean={mean} n={n}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn truncated_exp_examples() {
        assert_eq!(truncated_exp(7.3, 0), 1.0);
        assert!((truncated_exp(1.0, 2) - 2.5).abs() < 1e-15);
        // Oracle: e_9(9) = 4759.81830357143 (exact rational 9-term sum).
        let e99 = truncated_exp(9.0, 9);
        assert!(((e99 - 4_759.818_303_571_43) / e99).abs() < 1e-13);
        // Poisson CDF form: e^-9 e_9(9) = Pr[n ≤ 9 | 9] ≈ 0.5874.
        assert!(((-9.0f64).exp() * e99 - 0.587_408_244_331_941).abs() < 1e-13);
        // Log-space variant agrees where both are representable.
        for &(x, n) in &[(0.3, 4usize), (9.0, 9), (120.0, 80), (700.0, 900)] {
            let a = ln_truncated_exp(x, n);
            let b = truncated_exp(x, n).ln();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "x={x} n={n}");
        }
    }

    #[test]
    fn overlap_examples() {
        let v = coherent(1.3, 0.7, 60).state;
        let one = overlap(&v, &v);
        assert!((one.re - 1.0).abs() < 1e-12 && one.im.abs() < 1e-14);

        // |<β|α>|² = e^{-|α-β|²}; α = 1, β = -1 gives e^{-4}.
        let a = coherent(1.0, 0.0, 60).state;
        let b = coherent(1.0, std::f64::consts::PI, 60).state;
        let ov = overlap(&b, &a);
        assert!((ov.norm_sqr() - (-4.0f64).exp()).abs() < 1e-14);

        let n2 = FockVector::number_state(2, 5).unwrap();
        let n3 = FockVector::number_state(3, 5).unwrap();
        assert_eq!(overlap(&n2, &n3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn overlap_zero_pads_shorter_vector() {
        let long = coherent(1.0, 0.0, 60).state;
        let short = FockVector::new(long.amps()[..10].to_vec()).unwrap();
        let direct: Complex64 = long.amps()[..10]
            .iter()
            .map(|a| a.conj() * a)
            .sum();
        assert!((overlap(&short, &long) - direct).norm() < 1e-14);
    }

    #[test]
    fn moments_examples() {
        let vac = coherent(0.0, 0.0, 5).state;
        let m = state_moments(&vac).unwrap();
        assert_eq!(m.mean_n, 0.0);
        assert_eq!(m.mean_a, Complex64::new(0.0, 0.0));

        // Coherent ᾱ = 1: <a> = 1, <n> = 1, <n²> = λ² + λ = 2.
        let c = coherent(1.0, 0.0, 60).state;
        let m = state_moments(&c).unwrap();
        assert!((m.mean_a.re - 1.0).abs() < 1e-12);
        assert!(m.mean_a.im.abs() < 1e-14);
        assert!((m.mean_n - 1.0).abs() < 1e-12);
        assert!((m.mean_n2 - 2.0).abs() < 1e-12);
        assert!((m.mean_a2.re - 1.0).abs() < 1e-12);

        let n3 = FockVector::number_state(3, 8).unwrap();
        let m = state_moments(&n3).unwrap();
        assert_eq!(m.mean_a, Complex64::new(0.0, 0.0));
        assert_eq!(m.mean_n, 3.0);
        assert_eq!(m.mean_n2, 9.0);
    }

    #[test]
    fn moments_zero_norm_is_error() {
        let z = FockVector::zero(4);
        assert_eq!(state_moments(&z), Err(Error::ZeroNorm));
    }

    #[test]
    fn circle_projection_positive_harmonic() {
        // n ≥ 0 recovers e^{-ᾱ²/2} ᾱⁿ/√n! |n⟩.
        let v = circle_projection_check(1.0, 0, 256, 30).unwrap();
        assert!((v.amp(0).re - (-0.5f64).exp()).abs() < 1e-12);
        for m in 1..=30 {
            assert!(v.amp(m).norm() < 1e-12, "component {m} leaked");
        }
        let v = circle_projection_check(1.0, 3, 256, 30).unwrap();
        let expected = (-0.5f64 + 0.0 * 3.0).exp() / 6.0f64.sqrt();
        assert!((v.amp(3).re - expected).abs() < 1e-12);
    }

    #[test]
    fn circle_projection_negative_harmonic_vanishes() {
        let v = circle_projection_check(1.0, -2, 256, 30).unwrap();
        assert!(v.norm2().sqrt() < 1e-10);
        let v = circle_projection_check(0.0, 1, 64, 8).unwrap();
        assert!(v.norm2().sqrt() < 1e-15);
    }

    #[test]
    fn circle_projection_aliasing_guard() {
        let err = circle_projection_check(1.0, 4, 16, 30);
        assert!(matches!(err, Err(Error::Aliasing { .. })));
        assert_eq!(default_circle_points(30, -4), 8 * 35);
    }

    #[test]
    fn default_cutoff_keeps_tails_small() {
        for &abar in &[0.3, 1.0, 2.0, 4.0] {
            let d = default_cutoff(abar * abar);
            let c = coherent(abar, 0.2, d);
            assert!(
                c.truncation_weight <= 1e-12,
                "abar={abar}: weight {}",
                c.truncation_weight
            );
            // Poisson pmf over 0..=D sums to 1 within 1e-12.
            let total: f64 = (0..=d)
                .map(|n| {
                    log_poisson_pmf(&PoissonQuery {
                        mean: abar * abar,
                        n,
                    })
                    .exp()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
