//! Unambiguous state discrimination (USD) for coherent states equally
//! spaced on a circle, and the amplifier bounds it induces.
//!
//! The ensemble `|α_j⟩ = |ᾱ e^{2πij/M}⟩` has discrete-Fourier eigenweights
//! `q_r = M e^{-ᾱ²} Σ_k ᾱ^{2(kM+r)}/(kM+r)!`; the optimal USD success
//! probability is `min_r q_r`. Dense (`M ≫ ᾱ²`) and sparse (`M ≪ ᾱ`)
//! regimes admit closed-form approximations, and the ratio of success
//! probabilities on the input and output circles bounds any exact
//! probabilistic amplifier. The reciprocal (dual) basis turns the same
//! machinery into an explicit amplifier map.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::fock::{coherent_fock, default_cutoff, overlap, CoherentParams, FockVector};
use crate::special::{ln_poisson_strip_sum, nearest_int, CompensatedSum};

/// `M` coherent states of amplitude `ᾱ` equally spaced on a circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEnsemble {
    abar: f64,
    m: usize,
}

impl SymmetricEnsemble {
    pub fn new(abar: f64, m: usize) -> Result<Self> {
        if !abar.is_finite() || abar < 0.0 {
            return Err(Error::Domain(format!("amplitude {abar} must be ≥ 0")));
        }
        if m < 1 {
            return Err(Error::Domain("ensemble needs at least one state".into()));
        }
        Ok(Self { abar, m })
    }

    pub fn abar(&self) -> f64 {
        self.abar
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Phase `φ_j = 2πj/M` of the `j`-th state.
    pub fn phase(&self, j: usize) -> f64 {
        TAU * j as f64 / self.m as f64
    }

    pub fn state_params(&self, j: usize) -> CoherentParams {
        CoherentParams::new(self.abar, self.phase(j)).expect("validated on construction")
    }

    /// Ensemble on the amplified circle `gᾱ`.
    pub fn amplified(&self, gain: f64) -> Result<Self> {
        Self::new(self.abar * gain, self.m)
    }
}

/// The full eigenweight spectrum with its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct UsdSpectrum {
    pub q: Vec<f64>,
    pub argmin_r: usize,
    pub success: f64,
}

/// `ln q_r`, summed in log space until the term has passed the Poisson peak
/// and dropped below `1e-18` of the partial sum.
pub fn ln_q_r_exact(e: &SymmetricEnsemble, r: usize) -> f64 {
    debug_assert!(r < e.m);
    let lambda = e.abar * e.abar;
    (e.m as f64).ln() - lambda + ln_poisson_strip_sum(lambda, r, e.m)
}

/// Eigenweight `q_r = M e^{-ᾱ²} Σ_{k≥0} ᾱ^{2(kM+r)}/(kM+r)!`.
pub fn q_r_exact(e: &SymmetricEnsemble, r: usize) -> f64 {
    ln_q_r_exact(e, r).exp()
}

/// `ln min_r q_r`; useful where the success probability underflows.
pub fn ln_usd_success(e: &SymmetricEnsemble) -> f64 {
    (0..e.m)
        .map(|r| ln_q_r_exact(e, r))
        .fold(f64::INFINITY, f64::min)
}

/// Optimal USD success probability `min_r q_r`, ties broken toward the
/// smallest `r`.
pub fn usd_success(e: &SymmetricEnsemble) -> UsdSpectrum {
    let q: Vec<f64> = (0..e.m).map(|r| q_r_exact(e, r)).collect();
    let mut argmin_r = 0;
    for (r, &value) in q.iter().enumerate() {
        if value < q[argmin_r] {
            argmin_r = r;
        }
    }
    UsdSpectrum {
        success: q[argmin_r],
        argmin_r,
        q,
    }
}

/// Dense-states (many states on the circle, `M ≫ ᾱ²`) approximation
/// `M e^{-ᾱ²} ᾱ^{2(M-1)}/(M-1)!`.
pub fn usd_success_dense(e: &SymmetricEnsemble) -> Result<f64> {
    if e.m < 2 {
        return Err(Error::Domain("dense form needs M ≥ 2".into()));
    }
    Ok(ln_usd_success_dense(e).exp())
}

pub fn ln_usd_success_dense(e: &SymmetricEnsemble) -> f64 {
    let lambda = e.abar * e.abar;
    if lambda == 0.0 {
        return f64::NEG_INFINITY;
    }
    (e.m as f64).ln() - lambda + (e.m - 1) as f64 * lambda.ln()
        - crate::special::ln_factorial(e.m - 1)
}

/// Chernoff bound `(eᾱ²/(2M-1))^{2M-1}` on the `k ≥ 1` remainder of the
/// `q_{M-1}` series; valid for `2M - 1 > ᾱ²`.
pub fn chernoff_remainder(e: &SymmetricEnsemble) -> Result<f64> {
    let lambda = e.abar * e.abar;
    let x = (2 * e.m - 1) as f64;
    if x <= lambda {
        return Err(Error::Regime(format!(
            "Chernoff form needs 2M - 1 > ᾱ² (got {x} vs {lambda})"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let bound = (x * (1.0 + lambda.ln() - x.ln())).exp();
    debug_assert!(bound >= strip_remainder_exact(e));
    Ok(bound)
}

/// Exact `k ≥ 1` remainder `Σ_{k≥1} ᾱ^{2(kM+M-1)}/(kM+M-1)!` that the
/// Chernoff value bounds.
pub fn strip_remainder_exact(e: &SymmetricEnsemble) -> f64 {
    let lambda = e.abar * e.abar;
    ln_poisson_strip_sum(lambda, 2 * e.m - 1, e.m).exp()
}

/// Jacobi `θ₃(z, q) = 1 + 2 Σ_{j≥1} q^{j²} cos(2jz)`, truncated once the
/// `q^{j²}` weight drops below 1e-18.
pub fn jacobi_theta3(z: f64, nome: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&nome) {
        return Err(Error::Domain(format!("nome {nome} outside [0, 1)")));
    }
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    let mut weight = 1.0;
    let mut j = 1u32;
    loop {
        // q^{j²} = q^{(j-1)²} · q^{2j-1}
        weight *= nome.powi(2 * j as i32 - 1);
        if weight < 1e-18 {
            break;
        }
        acc.add(2.0 * weight * (2.0 * j as f64 * z).cos());
        j += 1;
    }
    Ok(acc.value())
}

/// Which closed form of the sparse-states success probability to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseMode {
    /// Leading correction only: `1 - 2 e^{-2π²ᾱ²/M²}`.
    Leading,
    /// Full theta form `θ₃(π(r/M - ℵ); e^{-2π²ᾱ²/M²})` at the minimizing
    /// integer `r = [M(ℵ + ½)]`, where `ℵ` is the rounding offset of
    /// `ᾱ²/M`.
    Theta,
}

/// Sparse-states (large amplitude, `M ≲ 4ᾱ`) approximation to the USD
/// success probability.
pub fn usd_success_sparse(e: &SymmetricEnsemble, mode: SparseMode) -> Result<f64> {
    if e.abar <= 0.0 {
        return Err(Error::Regime("sparse form needs ᾱ > 0".into()));
    }
    let m = e.m as f64;
    let nome = (-2.0 * PI * PI * e.abar * e.abar / (m * m)).exp();
    match mode {
        SparseMode::Leading => Ok(1.0 - 2.0 * nome),
        SparseMode::Theta => {
            let ratio = e.abar * e.abar / m;
            let aleph = ratio - nearest_int(ratio);
            let r = nearest_int(m * (aleph + 0.5));
            jacobi_theta3(PI * (r / m - aleph), nome)
        }
    }
}

/// How to evaluate the deviation-to-ratio map `a(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AEpsilonMode {
    /// Closed form `-ln(ε/2)/2π²`.
    Analytic,
    /// Bisect on `ᾱ` at fixed `M` until the exact success probability
    /// equals `1 - ε`, then report `ᾱ²/M²`.
    Numeric { m: usize },
}

/// The ratio `a = ᾱ²/M²` at which the USD success probability deviates from
/// unity by `ε`.
pub fn a_of_epsilon(eps: f64, mode: AEpsilonMode) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1)")));
    }
    match mode {
        AEpsilonMode::Analytic => Ok(-(eps / 2.0).ln() / (2.0 * PI * PI)),
        AEpsilonMode::Numeric { m } => {
            if m < 2 {
                return Err(Error::Domain("numeric a(ε) needs M ≥ 2".into()));
            }
            let target = 1.0 - eps;
            let a_analytic = -(eps / 2.0).ln() / (2.0 * PI * PI);
            let success = |abar: f64| {
                ln_usd_success(&SymmetricEnsemble { abar, m }).exp()
            };
            let mut lo = 0.0f64;
            let mut hi = 2.0 * m as f64 * a_analytic.sqrt();
            let mut guard = 0;
            while success(hi) < target {
                hi *= 1.5;
                guard += 1;
                if guard > 60 {
                    return Err(Error::NonConverged(format!(
                        "no bracket for ε = {eps}, M = {m}"
                    )));
                }
            }
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if success(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if (success(root) - target).abs() >= 1e-6 {
                return Err(Error::NonConverged(format!(
                    "|P - (1-ε)| ≥ 1e-6 at ε = {eps}, M = {m}"
                )));
            }
            Ok(root * root / (m as f64 * m as f64))
        }
    }
}

/// Regression of numeric `a(ε)` samples against `ln ε`.
#[derive(Debug, Clone)]
pub struct EpsilonFit {
    pub slope: f64,
    pub intercept: f64,
    /// All `(ε, a)` samples, one per `(ε, M)` grid point.
    pub samples: Vec<(f64, f64)>,
    /// RMS of the raw samples around the fitted line; the spread across `M`
    /// is a numerical diagnostic, not an error to minimize.
    pub residual_rms: f64,
    /// Grid points whose bisection failed.
    pub non_converged: Vec<(f64, usize)>,
}

/// Runs numeric `a(ε)` over the grid and least-squares fits
/// `a = slope·ln ε + intercept`.
///
/// At each `ε` the samples are aggregated over the `M` grid by their median
/// before the regression: the smallest circles (`M = 2, 4`) obey their own
/// exact laws rather than the sparse-comb scaling and would otherwise drag
/// the fitted slope.
pub fn fit_a_epsilon(eps_grid: &[f64], m_grid: &[usize]) -> Result<EpsilonFit> {
    if eps_grid.is_empty() || m_grid.is_empty() {
        return Err(Error::Domain("empty fit grid".into()));
    }
    for &eps in eps_grid {
        if !(1e-5..=0.5).contains(&eps) {
            return Err(Error::Domain(format!("ε = {eps} outside [1e-5, 0.5]")));
        }
    }
    for &m in m_grid {
        if !(2..=40).contains(&m) {
            return Err(Error::Domain(format!("M = {m} outside [2, 40]")));
        }
    }
    let mut samples = Vec::with_capacity(eps_grid.len() * m_grid.len());
    let mut non_converged = Vec::new();
    let mut points = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let mut values = Vec::with_capacity(m_grid.len());
        for &m in m_grid {
            match a_of_epsilon(eps, AEpsilonMode::Numeric { m }) {
                Ok(a) => {
                    samples.push((eps, a));
                    values.push(a);
                }
                Err(_) => non_converged.push((eps, m)),
            }
        }
        if !values.is_empty() {
            points.push((eps.ln(), median(&mut values)));
        }
    }
    if points.is_empty() {
        return Err(Error::NonConverged("no grid point converged".into()));
    }
    let (slope, intercept) = least_squares(&points);
    let mut rss = CompensatedSum::new();
    for &(eps, a) in &samples {
        let r = a - (slope * eps.ln() + intercept);
        rss.add(r * r);
    }
    Ok(EpsilonFit {
        slope,
        intercept,
        residual_rms: (rss.value() / samples.len() as f64).sqrt(),
        samples,
        non_converged,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least squares for `y = s·x + b`; a single point fits exactly with zero
/// slope.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() == 1 {
        return (0.0, points[0].1);
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

/// Discrimination probabilities before and after amplification, and the
/// induced ceiling on the amplifier's working probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateBound {
    pub p_before: f64,
    pub p_after: f64,
    pub bound: f64,
}

/// Helstrom (minimum-error) discrimination of `|α⟩` vs `|β⟩` and the bound
/// `√[(1-e^{-d²})/(1-e^{-g²d²})]` it puts on exact amplification, `d² =
/// |α-β|²`. The coincident-state limit is `1/g`.
pub fn helstrom_two(alpha: Complex64, beta: Complex64, gain: f64) -> Result<TwoStateBound> {
    let d2 = separation_squared(alpha, beta, gain)?;
    let before = -(-d2).exp_m1();
    let after = -(-gain * gain * d2).exp_m1();
    Ok(TwoStateBound {
        p_before: 0.5 * (1.0 + before.sqrt()),
        p_after: 0.5 * (1.0 + after.sqrt()),
        bound: if d2 == 0.0 {
            1.0 / gain
        } else {
            (before / after).sqrt()
        },
    })
}

/// Unambiguous discrimination of `|α⟩` vs `|β⟩`; the bound is the square of
/// the Helstrom one, with coincident-state limit `1/g²`.
pub fn usd_two(alpha: Complex64, beta: Complex64, gain: f64) -> Result<TwoStateBound> {
    let d2 = separation_squared(alpha, beta, gain)?;
    let before = -(-d2).exp_m1();
    let after = -(-gain * gain * d2).exp_m1();
    Ok(TwoStateBound {
        p_before: before,
        p_after: after,
        bound: if d2 == 0.0 {
            1.0 / (gain * gain)
        } else {
            before / after
        },
    })
}

fn separation_squared(alpha: Complex64, beta: Complex64, gain: f64) -> Result<f64> {
    if !gain.is_finite() || gain < 1.0 {
        return Err(Error::Domain(format!("gain {gain} must be ≥ 1")));
    }
    Ok((alpha - beta).norm_sqr())
}

/// USD ceiling `P(✓|ᾱ,M)/P(✓|gᾱ,M)` on the success probability of an exact
/// amplifier for the symmetric ensemble; evaluated in log space so the
/// deep-dense regime does not underflow. At `ᾱ = 0` the analytic limit
/// `g^{-2(M-1)}` is returned.
pub fn amplifier_usd_bound(e: &SymmetricEnsemble, gain: f64) -> Result<f64> {
    if !gain.is_finite() || gain <= 1.0 {
        return Err(Error::Domain(format!("gain {gain} must exceed 1")));
    }
    if e.m == 1 {
        return Ok(1.0);
    }
    if e.abar == 0.0 {
        return Ok((-2.0 * (e.m - 1) as f64 * gain.ln()).exp());
    }
    let amplified = e.amplified(gain)?;
    Ok((ln_usd_success(e) - ln_usd_success(&amplified)).exp())
}

/// Closed-form regime ceilings accompanying [`amplifier_usd_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsdRegimeBounds {
    /// Dense input circle, sparse output circle: the input discrimination
    /// probability itself, `M e^{-ᾱ²} ᾱ^{2(M-1)}/(M-1)!`.
    pub dense_sparse: f64,
    /// Both circles dense: `e^{(g²-1)ᾱ²}/g^{2(M-1)}`.
    pub dense_dense: f64,
    /// Disk/spoke amplifier: `1/g^{2(M-1)}`.
    pub disk_spoke: f64,
}

pub fn amplifier_regime_bounds(e: &SymmetricEnsemble, gain: f64) -> Result<UsdRegimeBounds> {
    if !gain.is_finite() || gain <= 1.0 {
        return Err(Error::Domain(format!("gain {gain} must exceed 1")));
    }
    let lambda = e.abar * e.abar;
    let m1 = (e.m.max(1) - 1) as f64;
    Ok(UsdRegimeBounds {
        dense_sparse: if e.m >= 2 {
            ln_usd_success_dense(e).exp()
        } else {
            1.0
        },
        dense_dense: ((gain * gain - 1.0) * lambda - 2.0 * m1 * gain.ln()).exp(),
        disk_spoke: (-2.0 * m1 * gain.ln()).exp(),
    })
}

/// Orthonormal eigenvectors `|γ_r⟩`, their weights `c_r`, and the dual
/// vectors `|α_j^⊥⟩` satisfying `⟨α_j^⊥|α_k⟩ = δ_jk`.
#[derive(Debug, Clone)]
pub struct ReciprocalBasis {
    abar: f64,
    m: usize,
    cutoff: usize,
    pub gamma: Vec<FockVector>,
    pub c: Vec<f64>,
    pub dual: Vec<FockVector>,
}

impl ReciprocalBasis {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matches(&self, e: &SymmetricEnsemble) -> bool {
        self.abar == e.abar && self.m == e.m
    }
}

/// Conditioning floor on the eigenweights `c_r²`; below this the dual
/// vectors are meaningless at 64-bit precision.
pub const RECIPROCAL_CONDITION_FLOOR: f64 = 1e-14;

/// Builds the reciprocal basis by discrete Fourier combination of the
/// coherent Fock vectors, with `c_r` taken from the exact eigenweight
/// series.
pub fn build_reciprocal_basis(e: &SymmetricEnsemble, cutoff: usize) -> Result<ReciprocalBasis> {
    let m = e.m;
    let c: Vec<f64> = (0..m)
        .map(|r| {
            let c2 = q_r_exact(e, r) / m as f64;
            if c2 <= RECIPROCAL_CONDITION_FLOOR {
                Err(Error::NearDegenerate {
                    r,
                    value: c2,
                    threshold: RECIPROCAL_CONDITION_FLOOR,
                })
            } else {
                Ok(c2.sqrt())
            }
        })
        .collect::<Result<_>>()?;

    let states: Vec<FockVector> = (0..m)
        .map(|j| coherent_fock(&e.state_params(j), cutoff).state)
        .collect();

    let mut gamma = Vec::with_capacity(m);
    for (r, &c_r) in c.iter().enumerate() {
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        for (j, state) in states.iter().enumerate() {
            let w = Complex64::from_polar(1.0, -TAU * (r * j) as f64 / m as f64)
                / (m as f64 * c_r);
            for (n, amp) in state.amps().iter().enumerate() {
                amps[n] += w * amp;
            }
        }
        gamma.push(FockVector::new(amps)?);
    }

    let mut dual = Vec::with_capacity(m);
    for j in 0..m {
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        for (r, g_r) in gamma.iter().enumerate() {
            let w = Complex64::from_polar(1.0, TAU * (r * j) as f64 / m as f64)
                / (m as f64 * c[r]);
            for (n, amp) in g_r.amps().iter().enumerate() {
                amps[n] += w * amp;
            }
        }
        dual.push(FockVector::new(amps)?);
    }

    Ok(ReciprocalBasis {
        abar: e.abar,
        m,
        cutoff,
        gamma,
        c,
        dual,
    })
}

/// One heralded branch of the USD-based amplifier map.
#[derive(Debug, Clone)]
pub struct UsdBranch {
    pub prob: f64,
    pub out: FockVector,
}

/// Applies the USD-based exact amplifier: branch `j` fires with probability
/// `P(✓|ᾱ,M) |⟨α_j^⊥|input⟩|²` and emits the amplified state `|gα_j⟩`.
pub fn usd_amp_apply(
    basis: &ReciprocalBasis,
    e: &SymmetricEnsemble,
    gain: f64,
    input: &FockVector,
) -> Result<Vec<UsdBranch>> {
    if !basis.matches(e) {
        return Err(Error::Mismatch(format!(
            "basis built for (ᾱ = {}, M = {}), ensemble is (ᾱ = {}, M = {})",
            basis.abar, basis.m, e.abar, e.m
        )));
    }
    if !gain.is_finite() || gain < 1.0 {
        return Err(Error::Domain(format!("gain {gain} must be ≥ 1")));
    }
    let p_success = usd_success(e).success;
    let out_cutoff = default_cutoff(gain * e.abar * gain * e.abar);
    let amplified = e.amplified(gain)?;
    (0..e.m)
        .map(|j| {
            let amp = overlap(&basis.dual[j], input);
            Ok(UsdBranch {
                prob: p_success * amp.norm_sqr(),
                out: coherent_fock(&amplified.state_params(j), out_cutoff).state,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ensemble(abar: f64, m: usize) -> SymmetricEnsemble {
        SymmetricEnsemble::new(abar, m).unwrap()
    }

    #[test]
    fn q_r_degenerate_circle() {
        let e = ensemble(0.0, 3);
        assert!((q_r_exact(&e, 0) - 3.0).abs() < 1e-15);
        assert_eq!(q_r_exact(&e, 1), 0.0);
        assert_eq!(q_r_exact(&e, 2), 0.0);
    }

    #[test]
    fn q_r_single_state_is_unity() {
        for &abar in &[0.3, 1.0, 4.0] {
            let e = ensemble(abar, 1);
            assert!((q_r_exact(&e, 0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn q_r_frozen_oracle_value() {
        // 4 e^{-1} (1/3! + 1/7! + 1/11! + ...) computed with 50-digit
        // arithmetic: 0.245544965457163.
        let e = ensemble(1.0, 4);
        assert!((q_r_exact(&e, 3) - 0.245_544_965_457_163).abs() < 1e-14);
    }

    #[test]
    fn spectrum_sums_to_m() {
        for &(abar, m) in &[(0.5, 3usize), (1.0, 8), (2.5, 5), (6.0, 40)] {
            let spec = usd_success(&ensemble(abar, m));
            let total: f64 = spec.q.iter().sum();
            assert!(
                (total - m as f64).abs() < 1e-10,
                "abar={abar} m={m}: {total}"
            );
        }
    }

    #[test]
    fn success_examples() {
        assert_eq!(usd_success(&ensemble(0.0, 5)).success, 0.0);

        // ᾱ = 1, M = 8: min at r = 7, value 0.000583935623158 (frozen from
        // the 50-digit series oracle).
        let spec = usd_success(&ensemble(1.0, 8));
        assert_eq!(spec.argmin_r, 7);
        assert!((spec.success - 5.839_356_231_58e-4).abs() < 1e-15);

        // Worked landmark at M = 6: P(ᾱ² = 0.15·36) ≈ 0.9 within 0.02.
        let spec = usd_success(&ensemble((0.15f64 * 36.0).sqrt(), 6));
        assert!((spec.success - 0.9).abs() < 0.02, "got {}", spec.success);
        assert!((spec.success - 0.880_728).abs() < 1e-5);
    }

    #[test]
    fn dense_form_examples() {
        assert_eq!(usd_success_dense(&ensemble(0.0, 4)).unwrap(), 0.0);
        // 10 e^{-1} / 9! = 1.0137771196303e-5.
        let v = usd_success_dense(&ensemble(1.0, 10)).unwrap();
        assert!(((v - 1.013_777_119_630_3e-5) / v).abs() < 1e-12);
    }

    #[test]
    fn dense_matches_exact_in_regime() {
        // Spot checks well inside M ≥ 2ᾱ² + 4.
        for &(abar, m) in &[(0.5, 6usize), (1.0, 8), (1.5, 12), (2.0, 14)] {
            let exact = usd_success(&ensemble(abar, m)).success;
            let dense = usd_success_dense(&ensemble(abar, m)).unwrap();
            assert!(
                ((exact - dense) / exact).abs() < 0.05,
                "abar={abar} m={m}"
            );
        }
    }

    #[test]
    fn chernoff_bounds_exact_remainder() {
        let e = ensemble(1.0, 5);
        let bound = chernoff_remainder(&e).unwrap();
        let exact = strip_remainder_exact(&e);
        // (e/9)^9 = 2.0915475969e-5 vs Σ = 2.75574339315e-6.
        assert!((bound - 2.091_547_596_9e-5).abs() < 1e-14);
        assert!((exact - 2.755_743_393_15e-6).abs() < 1e-16);
        assert!(bound >= exact);

        assert_eq!(chernoff_remainder(&ensemble(0.0, 4)).unwrap(), 0.0);
        assert!(chernoff_remainder(&ensemble(4.0, 5)).is_err());

        for &(abar, m) in &[(0.5, 2usize), (1.5, 4), (2.0, 10), (2.5, 12)] {
            let e = ensemble(abar, m);
            assert!(chernoff_remainder(&e).unwrap() >= strip_remainder_exact(&e));
        }
    }

    #[test]
    fn theta3_examples() {
        assert_eq!(jacobi_theta3(0.4, 0.0).unwrap(), 1.0);
        let v = jacobi_theta3(0.0, 0.1).unwrap();
        #[allow(clippy::excessive_precision)]
        let expected = 1.200_200_002_000_000_2;
        assert!((v - expected).abs() < 1e-15);
        // Alternating signs at z = π/2.
        let q: f64 = 0.3;
        let v = jacobi_theta3(PI / 2.0, q).unwrap();
        let direct = 1.0 - 2.0 * q + 2.0 * q.powi(4) - 2.0 * q.powi(9) + 2.0 * q.powi(16);
        assert!((v - direct).abs() < 1e-12);
        assert!(jacobi_theta3(0.0, 1.0).is_err());
        assert!(jacobi_theta3(0.0, -0.2).is_err());
    }

    #[test]
    fn sparse_landmarks() {
        // The worked landmarks hold for the leading sparse form at any M:
        // P ≈ 0.9 at ᾱ² = 0.15 M², P ≈ 0.5 at ᾱ² = 0.0702 M².
        for &m in &[4usize, 8, 16] {
            let m2 = (m * m) as f64;
            let p9 = usd_success_sparse(&ensemble((0.15 * m2).sqrt(), m), SparseMode::Leading)
                .unwrap();
            assert!((p9 - 0.9).abs() < 0.02, "M={m}: {p9}");
            let p5 = usd_success_sparse(&ensemble((0.0702 * m2).sqrt(), m), SparseMode::Leading)
                .unwrap();
            assert!((p5 - 0.5).abs() < 0.02, "M={m}: {p5}");
        }
        assert!(usd_success_sparse(&ensemble(0.0, 4), SparseMode::Theta).is_err());
    }

    #[test]
    fn theta_mode_tracks_exact_deep_in_sparse_regime() {
        for &(abar, m) in &[(3.0, 6usize), (4.0, 8), (5.0, 10), (6.0, 12)] {
            let exact = usd_success(&ensemble(abar, m)).success;
            let theta = usd_success_sparse(&ensemble(abar, m), SparseMode::Theta).unwrap();
            assert!(
                (exact - theta).abs() < 0.02,
                "abar={abar} m={m}: exact {exact} theta {theta}"
            );
        }
    }

    #[test]
    fn a_of_epsilon_examples() {
        assert!(a_of_epsilon(2.0, AEpsilonMode::Analytic).is_err());
        assert!(a_of_epsilon(0.0, AEpsilonMode::Analytic).is_err());

        let a = a_of_epsilon(0.5, AEpsilonMode::Analytic).unwrap();
        assert!((a - 0.070_230_492_77).abs() < 1e-10);
        let a = a_of_epsilon(0.1, AEpsilonMode::Analytic).unwrap();
        assert!((a - 0.151_765_569_9).abs() < 1e-9);

        // Numeric mode at a converged circle size reproduces the landmarks.
        let a = a_of_epsilon(0.5, AEpsilonMode::Numeric { m: 20 }).unwrap();
        assert!((a - 0.0702).abs() < 2e-3, "a(0.5) numeric = {a}");
        let a = a_of_epsilon(0.1, AEpsilonMode::Numeric { m: 20 }).unwrap();
        assert!((a - 0.1517).abs() < 3e-3, "a(0.1) numeric = {a}");
    }

    #[test]
    fn numeric_a_solves_target_probability() {
        for &(eps, m) in &[(0.5, 6usize), (0.1, 10), (1e-3, 14)] {
            let a = a_of_epsilon(eps, AEpsilonMode::Numeric { m }).unwrap();
            let abar = (a * (m * m) as f64).sqrt();
            let p = usd_success(&ensemble(abar, m)).success;
            assert!((p - (1.0 - eps)).abs() < 1e-6, "eps={eps} m={m}");
        }
    }

    #[test]
    fn single_point_fit_interpolates_exactly() {
        let fit = fit_a_epsilon(&[0.3], &[10]).unwrap();
        let a = a_of_epsilon(0.3, AEpsilonMode::Numeric { m: 10 }).unwrap();
        assert_eq!(fit.intercept, a);
        assert_eq!(fit.slope, 0.0);
        assert!(fit.residual_rms < 1e-15);
        assert!(fit.non_converged.is_empty());
    }

    #[test]
    fn analytic_samples_fit_their_own_line() {
        // a(ε) analytic is affine in ln ε with slope -1/2π² = -0.05066 and
        // intercept ln2/2π² = 0.0351.
        let e1: f64 = 0.4;
        let e2: f64 = 1e-4;
        let a1 = a_of_epsilon(e1, AEpsilonMode::Analytic).unwrap();
        let a2 = a_of_epsilon(e2, AEpsilonMode::Analytic).unwrap();
        let slope = (a1 - a2) / (e1.ln() - e2.ln());
        let intercept = a1 - slope * e1.ln();
        assert!((slope - (-0.050_660_591_82)).abs() < 1e-10);
        assert!((intercept - 0.035_115_246_39).abs() < 1e-10);
    }

    #[test]
    fn amplifier_bound_analytic_limit() {
        // Deep in the ᾱ → 0 limit the ratio sits within 1e-6 of
        // g^{-2(M-1)}.
        for &g in &[1.5, 2.0, 3.0] {
            for m in 2..=6usize {
                let bound = amplifier_usd_bound(&ensemble(1e-4, m), g).unwrap();
                let target = (-2.0 * (m as f64 - 1.0) * g.ln()).exp();
                assert!(
                    ((bound - target) / target).abs() < 1e-6,
                    "g={g} m={m}: {bound} vs {target}"
                );
            }
        }
    }

    #[test]
    fn helstrom_examples() {
        let a = Complex64::new(0.7, 0.0);
        let b = helstrom_two(a, a, 2.0).unwrap();
        assert_eq!(b.p_before, 0.5);
        assert!((b.bound - 0.5).abs() < 1e-15);

        // d² = ln 2 gives p_before = ½(1 + 1/√2).
        let beta = Complex64::new(0.7 + 2f64.ln().sqrt(), 0.0);
        let b = helstrom_two(a, beta, 1.5).unwrap();
        assert!((b.p_before - 0.853_553_390_593_274).abs() < 1e-14);

        // Closing separation: bound → 1/g.
        let beta = Complex64::new(0.7 + 1e-9, 0.0);
        let b = helstrom_two(a, beta, 3.0).unwrap();
        assert!((b.bound - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn usd_two_examples() {
        let a = Complex64::new(-0.2, 0.4);
        let b = usd_two(a, a, 2.0).unwrap();
        assert_eq!(b.p_before, 0.0);
        assert!((b.bound - 0.25).abs() < 1e-15);

        let beta = a + Complex64::new(2f64.ln().sqrt(), 0.0);
        let b = usd_two(a, beta, 2.0).unwrap();
        assert!((b.p_before - 0.5).abs() < 1e-14);

        let beta = a + Complex64::new(1e-9, 0.0);
        let b = usd_two(a, beta, 3.0).unwrap();
        assert!((b.bound - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn usd_bound_is_squared_helstrom_bound() {
        for &d in &[0.1, 0.9, 2.3] {
            let a = Complex64::new(0.0, 0.0);
            let b = Complex64::new(d, 0.0);
            let h = helstrom_two(a, b, 2.5).unwrap().bound;
            let u = usd_two(a, b, 2.5).unwrap().bound;
            assert!((u - h * h).abs() < 1e-12);
        }
    }

    #[test]
    fn amplifier_bound_examples() {
        // Disk/spoke limit at vanishing amplitude.
        let b = amplifier_usd_bound(&ensemble(1e-3, 2), 2.0).unwrap();
        assert!(((b - 0.25) / 0.25).abs() < 1e-4);

        // Near-orthogonal ensembles on both circles: bound close to one.
        let b = amplifier_usd_bound(&ensemble(5.0, 3), 2.0).unwrap();
        assert!((b - 1.0).abs() < 1e-3);

        // Dense-dense closed form dominates the exact ratio.
        let e = ensemble(1.0, 20);
        let exact = amplifier_usd_bound(&e, 1.5).unwrap();
        let regimes = amplifier_regime_bounds(&e, 1.5).unwrap();
        assert!(exact <= regimes.dense_dense * (1.0 + 1e-12));

        // Exact zero amplitude returns the analytic limit.
        let b = amplifier_usd_bound(&ensemble(0.0, 4), 3.0).unwrap();
        assert!((b - 3f64.powi(-6)).abs() < 1e-18);
    }

    #[test]
    fn reciprocal_basis_duality() {
        let e = ensemble(1.5, 4);
        let cutoff = default_cutoff(e.abar() * e.abar());
        let basis = build_reciprocal_basis(&e, cutoff).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let g = overlap(
                    &basis.dual[j],
                    &coherent_fock(&e.state_params(k), cutoff).state,
                );
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (g.re - expected).abs() < 1e-8 && g.im.abs() < 1e-8,
                    "⟨α_{j}^⊥|α_{k}⟩ = {g}"
                );
            }
        }
        // Gammas orthonormal.
        for r in 0..4 {
            for s in 0..4 {
                let g = overlap(&basis.gamma[r], &basis.gamma[s]);
                let expected = if r == s { 1.0 } else { 0.0 };
                assert!((g.re - expected).abs() < 1e-8 && g.im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reciprocal_basis_rejects_degenerate_ensemble() {
        // ᾱ = 0.05, M = 12: the top eigenweights underflow the floor.
        let e = ensemble(0.05, 12);
        assert!(matches!(
            build_reciprocal_basis(&e, 40),
            Err(Error::NearDegenerate { .. })
        ));
    }

    #[test]
    fn usd_amp_apply_on_ensemble_member() {
        let e = ensemble(1.5, 4);
        let cutoff = default_cutoff(e.abar() * e.abar());
        let basis = build_reciprocal_basis(&e, cutoff).unwrap();
        let input = coherent_fock(&e.state_params(0), cutoff).state;
        let branches = usd_amp_apply(&basis, &e, 2.0, &input).unwrap();

        let p_expected = usd_success(&e).success;
        let total: f64 = branches.iter().map(|b| b.prob).sum();
        assert!((total - p_expected).abs() < 1e-10);
        assert!(branches[0].prob > 0.99 * total);

        // The heralded output is the amplified coherent state.
        let target = coherent_fock(
            &CoherentParams::new(3.0, 0.0).unwrap(),
            branches[0].out.cutoff(),
        )
        .state;
        let f = overlap(&target, &branches[0].out).norm_sqr();
        assert!(f >= 1.0 - 1e-8);
    }

    #[test]
    fn usd_amp_apply_vacuum_input() {
        let e = ensemble(1.5, 4);
        let cutoff = default_cutoff(e.abar() * e.abar());
        let basis = build_reciprocal_basis(&e, cutoff).unwrap();
        let vac = coherent_fock(&CoherentParams::new(0.0, 0.0).unwrap(), cutoff).state;
        let branches = usd_amp_apply(&basis, &e, 2.0, &vac).unwrap();
        let p = usd_success(&e).success;
        let expected: f64 = (0..4)
            .map(|j| p * overlap(&basis.dual[j], &vac).norm_sqr())
            .sum();
        let total: f64 = branches.iter().map(|b| b.prob).sum();
        assert!((total - expected).abs() < 1e-14);
    }

    #[test]
    fn usd_amp_apply_single_state() {
        let e = ensemble(0.8, 1);
        let cutoff = default_cutoff(e.abar() * e.abar());
        let basis = build_reciprocal_basis(&e, cutoff).unwrap();
        let input = coherent_fock(&e.state_params(0), cutoff).state;
        let branches = usd_amp_apply(&basis, &e, 2.0, &input).unwrap();
        assert_eq!(branches.len(), 1);
        assert!((branches[0].prob - 1.0).abs() < 1e-10);
    }

    #[test]
    fn usd_amp_apply_mismatched_basis() {
        let e = ensemble(1.5, 4);
        let cutoff = default_cutoff(e.abar() * e.abar());
        let basis = build_reciprocal_basis(&e, cutoff).unwrap();
        let other = ensemble(1.4, 4);
        let input = coherent_fock(&other.state_params(0), cutoff).state;
        assert!(matches!(
            usd_amp_apply(&basis, &other, 2.0, &input),
            Err(Error::Mismatch(_))
        ));
    }
}
