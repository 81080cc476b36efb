//! The optimal phase-insensitive approximate amplifier as a
//! single-diagonal-strip Kraus operator.
//!
//! Phase insensitivity forces every Kraus operator onto one diagonal strip
//! `|n⟩⟨n+k|`; the optimal family is parameterized by the gain `g`, the
//! high-fidelity photon cap `N` (outputs live in the disk of radius `√N`),
//! and the strip offset `k`. The restricted operator is cut off at the cap;
//! the extended operator continues as the bare shift above it, which is the
//! largest tail the trace-decreasing condition allows.
//!
//! Operators are stored as scalar profiles `f_k(n)` over the strip, never as
//! dense matrices; the matrix element `⟨n|Υ_k|n+k⟩` is
//! `f_k(n) √((n+k)!/n!)` and stays in `[0, 1]`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{default_cutoff, ln_truncated_exp, FockVector};
use crate::special::{ln_factorial, log_sum_exp, CompensatedSum};

/// `(g, N, k)` parameters of the strip amplifier family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierSpec {
    gain: f64,
    n_cap: usize,
    offset: usize,
}

impl AmplifierSpec {
    /// Requires `g > 1`.
    pub fn new(gain: f64, n_cap: usize, offset: usize) -> Result<Self> {
        if !gain.is_finite() || gain <= 1.0 {
            return Err(Error::Domain(format!("gain {gain} must exceed 1")));
        }
        Ok(Self {
            gain,
            n_cap,
            offset,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Photon cap `N` of the high-fidelity output disk.
    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    /// Strip offset `k`.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn with_offset(&self, offset: usize) -> Self {
        Self { offset, ..*self }
    }

    /// Input-side cutoff rule for [`apply`]: covers both the input and the
    /// amplified Poisson tails, plus the strip offset.
    pub fn default_apply_cutoff(&self, abar: f64) -> usize {
        let lambda = (self.gain * self.gain * abar * abar).max(abar * abar);
        default_cutoff(lambda) + self.offset
    }
}

/// A single-diagonal-strip operator `Σ_n f(n) √((n+k)!/n!) |n⟩⟨n+k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripKraus {
    offset: usize,
    profile: Vec<f64>,
}

impl StripKraus {
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Largest output index `n` the profile covers.
    pub fn cutoff(&self) -> usize {
        self.profile.len() - 1
    }

    /// Scalar profile `f(n)`, `n = 0..=cutoff`.
    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    /// Matrix element `⟨n|Υ|n+k⟩ = f(n) √((n+k)!/n!)`; lies in `[0, 1]`.
    pub fn element(&self, n: usize) -> f64 {
        let f = self.profile[n];
        if f == 0.0 {
            return 0.0;
        }
        f * (0.5 * (ln_factorial(n + self.offset) - ln_factorial(n))).exp()
    }

    /// Diagonal entry of `Υ†Υ` at input index `m`; trace-decreasing means
    /// every entry is at most one.
    pub fn gram_diagonal(&self, m: usize) -> f64 {
        if m < self.offset || m - self.offset > self.cutoff() {
            return 0.0;
        }
        let e = self.element(m - self.offset);
        e * e
    }
}

fn restricted_profile_at(spec: &AmplifierSpec, n: usize) -> f64 {
    let (cap, k) = (spec.n_cap, spec.offset);
    (0.5 * (ln_factorial(cap) - ln_factorial(cap + k))
        + (n as f64 - cap as f64) * spec.gain.ln())
    .exp()
}

fn extension_profile_at(spec: &AmplifierSpec, n: usize) -> f64 {
    (0.5 * (ln_factorial(n) - ln_factorial(n + spec.offset))).exp()
}

/// Restricted operator `P_N K_k`: profile
/// `f(n) = √(N!/(N+k)!) g^{n-N}` for `n ≤ N`, zero above the cap.
pub fn restricted_kraus(spec: &AmplifierSpec, cutoff: usize) -> Result<StripKraus> {
    check_cutoff(spec, cutoff)?;
    let profile = (0..=cutoff)
        .map(|n| {
            if n <= spec.n_cap {
                restricted_profile_at(spec, n)
            } else {
                0.0
            }
        })
        .collect();
    Ok(StripKraus {
        offset: spec.offset,
        profile,
    })
}

/// Extended operator `Υ_k = P_N K_k + Σ_{n>N} |n⟩⟨n+k|`: the tail profile
/// is `√(n!/(n+k)!)`, the unit shift in the orthocomplement for `k = 0`.
pub fn extended_kraus(spec: &AmplifierSpec, cutoff: usize) -> Result<StripKraus> {
    check_cutoff(spec, cutoff)?;
    let profile = (0..=cutoff)
        .map(|n| {
            if n <= spec.n_cap {
                restricted_profile_at(spec, n)
            } else {
                extension_profile_at(spec, n)
            }
        })
        .collect();
    Ok(StripKraus {
        offset: spec.offset,
        profile,
    })
}

fn check_cutoff(spec: &AmplifierSpec, cutoff: usize) -> Result<()> {
    if cutoff < spec.n_cap + spec.offset {
        return Err(Error::Domain(format!(
            "cutoff {cutoff} below N + k = {}",
            spec.n_cap + spec.offset
        )));
    }
    Ok(())
}

/// Result of pushing a state through one strip operator.
#[derive(Debug, Clone)]
pub struct KrausOutcome {
    /// Branch probability, the squared norm of the unnormalized output.
    pub prob: f64,
    /// Normalized output state; `None` flags the zero-probability branch.
    pub out: Option<FockVector>,
}

/// Applies the strip to `input`: `out_n = ⟨n|Υ|n+k⟩ input_{n+k}`.
pub fn apply(kr: &StripKraus, input: &FockVector) -> Result<KrausOutcome> {
    if input.cutoff() > kr.cutoff() + kr.offset() {
        return Err(Error::Mismatch(format!(
            "input cutoff {} exceeds operator reach {}",
            input.cutoff(),
            kr.cutoff() + kr.offset()
        )));
    }
    if input.cutoff() < kr.offset() {
        return Ok(KrausOutcome {
            prob: 0.0,
            out: None,
        });
    }
    let out_cutoff = input.cutoff() - kr.offset();
    let mut amps = Vec::with_capacity(out_cutoff + 1);
    let mut prob = CompensatedSum::new();
    for n in 0..=out_cutoff {
        let a = kr.element(n) * input.amp(n + kr.offset());
        prob.add(a.norm_sqr());
        amps.push(a);
    }
    let prob = prob.value();
    if prob < f64::MIN_POSITIVE {
        return Ok(KrausOutcome {
            prob: 0.0,
            out: None,
        });
    }
    let scale = 1.0 / prob.sqrt();
    let amps = amps.into_iter().map(|a| a * scale).collect();
    Ok(KrausOutcome {
        prob,
        out: Some(FockVector::new(amps)?),
    })
}

/// `ln` of the bracketed factor of the extended success probability:
/// `N!/((N+k)! g^{2N}) e_N(g²ᾱ²) + Σ_{n>N} ᾱ^{2n}/(n+k)!`.
fn ln_extended_bracket(spec: &AmplifierSpec, abar: f64) -> f64 {
    let (cap, k, g) = (spec.n_cap, spec.offset, spec.gain);
    let lambda_out = g * g * abar * abar;
    let head = ln_factorial(cap) - ln_factorial(cap + k) - 2.0 * cap as f64 * g.ln()
        + ln_truncated_exp(lambda_out, cap);
    let mut logs = vec![head];
    if abar > 0.0 {
        let ln_in = 2.0 * abar.ln();
        let lambda_in = abar * abar;
        let mut max = f64::NEG_INFINITY;
        let mut n = cap + 1;
        loop {
            let lt = n as f64 * ln_in - ln_factorial(n + k);
            logs.push(lt);
            max = max.max(lt);
            if (n + k) as f64 > lambda_in && lt < max - 45.0 {
                break;
            }
            n += 1;
        }
    }
    log_sum_exp(&logs)
}

/// `ln` of the overlap series
/// `√(N!/(N+k)!) g^{-N} e_N(g²ᾱ²) + Σ_{n>N} gⁿ ᾱ^{2n}/√(n!(n+k)!)`.
fn ln_overlap_series(spec: &AmplifierSpec, abar: f64) -> f64 {
    let (cap, k, g) = (spec.n_cap, spec.offset, spec.gain);
    let lambda_out = g * g * abar * abar;
    let head = 0.5 * (ln_factorial(cap) - ln_factorial(cap + k)) - cap as f64 * g.ln()
        + ln_truncated_exp(lambda_out, cap);
    let mut logs = vec![head];
    if abar > 0.0 {
        let ln_term = g.ln() + 2.0 * abar.ln();
        let mut max = f64::NEG_INFINITY;
        let mut n = cap + 1;
        loop {
            let lt = n as f64 * ln_term - 0.5 * (ln_factorial(n) + ln_factorial(n + k));
            logs.push(lt);
            max = max.max(lt);
            // Term peak sits near g ᾱ² for k = 0 and below it otherwise.
            if n as f64 > g * abar * abar && lt < max - 45.0 {
                break;
            }
            n += 1;
        }
    }
    log_sum_exp(&logs)
}

/// Success probability of the restricted operator:
/// `N!/(N+k)! · e^{-ᾱ²} ᾱ^{2k}/g^{2N} · e_N(g²ᾱ²)`.
pub fn success_prob_restricted(spec: &AmplifierSpec, abar: f64) -> f64 {
    debug_assert!(abar >= 0.0);
    let (cap, k, g) = (spec.n_cap, spec.offset, spec.gain);
    if abar == 0.0 {
        return if k == 0 {
            (-2.0 * cap as f64 * g.ln()).exp()
        } else {
            0.0
        };
    }
    let lambda_out = g * g * abar * abar;
    (ln_factorial(cap) - ln_factorial(cap + k) - abar * abar + 2.0 * k as f64 * abar.ln()
        - 2.0 * cap as f64 * g.ln()
        + ln_truncated_exp(lambda_out, cap))
    .exp()
}

/// Fidelity of the restricted output with `|gα⟩`: the Poisson head
/// `Pr[n ≤ N | g²ᾱ²] = e^{-g²ᾱ²} e_N(g²ᾱ²)`, independent of `k`.
pub fn fidelity_restricted(spec: &AmplifierSpec, abar: f64) -> f64 {
    debug_assert!(abar >= 0.0);
    let lambda = spec.gain * spec.gain * abar * abar;
    (-lambda + ln_truncated_exp(lambda, spec.n_cap)).exp()
}

/// Which side of the fidelity the Poisson-tail Chernoff bound controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityBound {
    /// `g²ᾱ² ≤ N`: `F ≥ 1 - e^{-g²ᾱ²}(e g²ᾱ²/(N+1))^{N+1}`.
    Lower(f64),
    /// `g²ᾱ² > N`: `F ≤ (e g²ᾱ² e^{-g²ᾱ²/N}/N)^N`.
    Upper(f64),
}

impl FidelityBound {
    pub fn value(&self) -> f64 {
        match *self {
            FidelityBound::Lower(v) | FidelityBound::Upper(v) => v,
        }
    }
}

/// Chernoff bound on [`fidelity_restricted`] in the high- and low-fidelity
/// extremes.
pub fn fidelity_chernoff_bound(spec: &AmplifierSpec, abar: f64) -> FidelityBound {
    debug_assert!(abar >= 0.0);
    let cap = spec.n_cap as f64;
    let lambda = spec.gain * spec.gain * abar * abar;
    if lambda <= cap {
        if lambda == 0.0 {
            return FidelityBound::Lower(1.0);
        }
        let tail = (-lambda + (cap + 1.0) * (1.0 + lambda.ln() - (cap + 1.0).ln())).exp();
        FidelityBound::Lower(1.0 - tail)
    } else if spec.n_cap == 0 {
        FidelityBound::Upper((-lambda).exp())
    } else {
        FidelityBound::Upper((cap + cap * (lambda / cap).ln() - lambda).exp())
    }
}

/// Success probability of the extended operator:
/// `e^{-ᾱ²} ᾱ^{2k} [N!/((N+k)! g^{2N}) e_N(g²ᾱ²) + Σ_{n>N} ᾱ^{2n}/(n+k)!]`.
pub fn success_prob_extended(spec: &AmplifierSpec, abar: f64) -> f64 {
    debug_assert!(abar >= 0.0);
    let (cap, k, g) = (spec.n_cap, spec.offset, spec.gain);
    if abar == 0.0 {
        return if k == 0 {
            (-2.0 * cap as f64 * g.ln()).exp()
        } else {
            0.0
        };
    }
    (-abar * abar + 2.0 * k as f64 * abar.ln() + ln_extended_bracket(spec, abar)).exp()
}

/// Fidelity of the extended output with `|gα⟩`.
///
/// The `ᾱ^{2k}` prefactors of `|⟨gα|Υ_k|α⟩|²` and `p_k` cancel
/// analytically, so the `ᾱ = 0`, `k ≥ 1` branch takes its finite limit
/// instead of hitting `0/0`.
pub fn fidelity_extended(spec: &AmplifierSpec, abar: f64) -> f64 {
    debug_assert!(abar >= 0.0);
    if abar == 0.0 {
        return 1.0;
    }
    let lambda_out = spec.gain * spec.gain * abar * abar;
    (-lambda_out + 2.0 * ln_overlap_series(spec, abar) - ln_extended_bracket(spec, abar)).exp()
}

/// Probability-fidelity product of the `k = 0` amplifier next to the
/// do-nothing standard `|⟨α|gα⟩|² = e^{-(g-1)²ᾱ²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfpComparison {
    pub pfp: f64,
    pub do_nothing: f64,
}

/// `p_0 F_0 = |⟨gα|Υ_0|α⟩|²`, never above the do-nothing product.
pub fn pfp_and_do_nothing(spec: &AmplifierSpec, abar: f64) -> Result<PfpComparison> {
    if spec.offset != 0 {
        return Err(Error::Domain(
            "probability-fidelity comparison is defined for k = 0".into(),
        ));
    }
    debug_assert!(abar >= 0.0);
    let g = spec.gain;
    let pfp = (-(g * g + 1.0) * abar * abar + 2.0 * ln_overlap_series(spec, abar)).exp();
    let do_nothing = (-(g - 1.0) * (g - 1.0) * abar * abar).exp();
    debug_assert!(pfp <= do_nothing * (1.0 + 1e-12));
    Ok(PfpComparison { pfp, do_nothing })
}

/// Relative slack used when comparing success probabilities and fidelities
/// across neighboring offsets; differences below this are roundoff, not
/// ordering violations.
const MONOTONE_REL_TOL: f64 = 1e-12;

/// One failed check from [`verify_monotonicity`].
#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityViolation {
    /// `p_{k+1}` exceeded `p_k` beyond roundoff at this amplitude.
    Probability { k: usize, abar: f64, gap: f64 },
    /// `F_{k+1}` exceeded `F_k` beyond roundoff at this amplitude.
    Fidelity { k: usize, abar: f64, gap: f64 },
    /// A diagonal entry of `Υ_k†Υ_k - Υ_{k+1}†Υ_{k+1}` fell below -1e-14.
    GramDiagonal { k: usize, index: usize, value: f64 },
    /// The symmetrized pair term `G(m,n) + G(n,m)` exceeded 1e-14.
    PairSign {
        k: usize,
        abar: f64,
        m: usize,
        n: usize,
        value: f64,
    },
}

/// Outcome of the offset-monotonicity verification.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub grid_points: usize,
    pub checks: usize,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `h_k(n) = f_{k+1}(n)/f_k(n)`, in closed form so the equal-branch case
/// cancels exactly.
fn h_squared(spec: &AmplifierSpec, n: usize) -> f64 {
    if n <= spec.n_cap {
        1.0 / (spec.n_cap + spec.offset + 1) as f64
    } else {
        1.0 / (n + spec.offset + 1) as f64
    }
}

/// Checks `p_k ≥ p_{k+1}` and `F_k ≥ F_{k+1}` on the amplitude grid for
/// `k = 0..k_max`, plus the two certificates behind those inequalities:
/// the diagonal operator `Q_k = Υ_k†Υ_k - Υ_{k+1}†Υ_{k+1}` stays
/// nonnegative, and the symmetrized pair quantity `G(m,n) + G(n,m)` stays
/// nonpositive for `n > m`. Pairs cover everything up to `N + 15``
/// exhaustively plus 200 seeded random larger pairs.
pub fn verify_monotonicity(
    base: &AmplifierSpec,
    k_max: usize,
    abar_grid: &[f64],
) -> Result<MonotonicityReport> {
    if k_max < 1 {
        return Err(Error::Domain(
            "monotonicity needs at least offsets 0 and 1".into(),
        ));
    }
    let max_abar = abar_grid.iter().copied().fold(0.0f64, f64::max);
    let lambda_max = (base.gain() * base.gain() * max_abar * max_abar).max(max_abar * max_abar);
    let gram_cutoff = default_cutoff(lambda_max) + k_max + 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x9d2c_5681);
    let exhaustive_cap = base.n_cap() + 15;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for m in 0..exhaustive_cap {
        for n in (m + 1)..=exhaustive_cap {
            pairs.push((m, n));
        }
    }
    if gram_cutoff > exhaustive_cap + 2 {
        for _ in 0..200 {
            let m = rng.gen_range(exhaustive_cap + 1..gram_cutoff);
            let n = rng.gen_range(m + 1..=gram_cutoff);
            pairs.push((m, n));
        }
    }

    let mut checks = 0usize;
    let mut violations = Vec::new();
    for k in 0..k_max {
        let lo = base.with_offset(k);
        let hi = base.with_offset(k + 1);

        for &abar in abar_grid {
            let (p_lo, p_hi) = (
                success_prob_extended(&lo, abar),
                success_prob_extended(&hi, abar),
            );
            checks += 1;
            if p_hi > p_lo + MONOTONE_REL_TOL * p_lo.max(p_hi) {
                violations.push(MonotonicityViolation::Probability {
                    k,
                    abar,
                    gap: p_hi - p_lo,
                });
            }
            let (f_lo, f_hi) = (fidelity_extended(&lo, abar), fidelity_extended(&hi, abar));
            checks += 1;
            if f_hi > f_lo + MONOTONE_REL_TOL * f_lo.max(f_hi) {
                violations.push(MonotonicityViolation::Fidelity {
                    k,
                    abar,
                    gap: f_hi - f_lo,
                });
            }
        }

        let ups_lo = extended_kraus(&lo, gram_cutoff)?;
        let ups_hi = extended_kraus(&hi, gram_cutoff)?;
        for m in 0..=(gram_cutoff + k) {
            let value = ups_lo.gram_diagonal(m) - ups_hi.gram_diagonal(m);
            checks += 1;
            if value < -1e-14 {
                violations.push(MonotonicityViolation::GramDiagonal { k, index: m, value });
            }
        }

        // Pair certificate. The two halves are evaluated in product form,
        // G(m,n) + G(n,m) = X (a - b)(h²(m) - h²(n)); summing separately
        // rounded halves loses the sign once the unnormalized overlap
        // factors grow to ~e^{(g-1)ᾱ²·n} scales.
        let profile_at = |n: usize| -> f64 {
            if n <= lo.n_cap() {
                restricted_profile_at(&lo, n)
            } else {
                extension_profile_at(&lo, n)
            }
        };
        for &abar in abar_grid {
            if abar == 0.0 {
                continue;
            }
            let lambda = abar * abar;
            let ln_p = |n: usize| -lambda + n as f64 * lambda.ln() - ln_factorial(n);
            for &(m, n) in &pairs {
                let f_m = profile_at(m);
                let f_n = profile_at(n);
                let x = (ln_p(n) + ln_p(m)).exp() * f_n * f_m;
                let a = base.gain().powi(m as i32) * f_n;
                let b = base.gain().powi(n as i32) * f_m;
                let value = x * (a - b) * (h_squared(&lo, m) - h_squared(&lo, n));
                checks += 1;
                if value > 1e-14 {
                    violations.push(MonotonicityViolation::PairSign {
                        k,
                        abar,
                        m,
                        n,
                        value,
                    });
                }
            }
        }
    }

    Ok(MonotonicityReport {
        grid_points: abar_grid.len(),
        checks,
        violations,
    })
}

/// Maximum commutation defect seen by [`verify_rotation_covariance`].
#[derive(Debug, Clone, Copy)]
pub struct CovarianceReport {
    pub trials: usize,
    pub max_deviation: f64,
}

/// Checks the strip structure's rotation covariance on random states:
/// `Υ R(θ) = e^{ikθ} R(θ) Υ` with `R(θ) = e^{iθ a†a}`, so the channel
/// `Υ ⊙ Υ†` commutes with phase-plane rotations exactly.
pub fn verify_rotation_covariance(kr: &StripKraus, trials: usize) -> Result<CovarianceReport> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f3a_9cd4);
    let in_cutoff = kr.cutoff() + kr.offset();
    let mut max_deviation = 0.0f64;
    for _ in 0..trials {
        let amps: Vec<Complex64> = (0..=in_cutoff)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let psi = FockVector::new(amps)?.normalized()?;
        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;

        let lhs = unnormalized_apply(kr, &rotate(&psi, theta));
        let mut rhs = rotate_amps(&unnormalized_apply(kr, &psi), theta);
        let phase = Complex64::from_polar(1.0, kr.offset() as f64 * theta);
        for a in rhs.iter_mut() {
            *a *= phase;
        }
        let deviation: f64 = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| (l - r).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_deviation = max_deviation.max(deviation);
    }
    Ok(CovarianceReport {
        trials,
        max_deviation,
    })
}

fn rotate(v: &FockVector, theta: f64) -> FockVector {
    let amps = v
        .amps()
        .iter()
        .enumerate()
        .map(|(n, a)| a * Complex64::from_polar(1.0, n as f64 * theta))
        .collect();
    FockVector::new(amps).expect("non-empty")
}

fn unnormalized_apply(kr: &StripKraus, input: &FockVector) -> Vec<Complex64> {
    let out_cutoff = input.cutoff().saturating_sub(kr.offset());
    (0..=out_cutoff)
        .map(|n| kr.element(n) * input.amp(n + kr.offset()))
        .collect()
}

fn rotate_amps(amps: &[Complex64], theta: f64) -> Vec<Complex64> {
    amps.iter()
        .enumerate()
        .map(|(n, a)| a * Complex64::from_polar(1.0, n as f64 * theta))
        .collect()
}
