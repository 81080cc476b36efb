//! Closed-form analytics for the deterministic thermal-ancilla amplifier
//! family, parameterized by the amplitude gain `g > 1` and the ancilla
//! parameter `μ²`: ideal (`μ² = 1`), perfect (`μ² = ½`), and immaculate
//! (`μ² = 0`) amplifiers, plus the optimal Gaussian cloning fidelity.
//!
//! The two-mode squeeze map itself is never simulated; every observable in
//! scope follows from the Gaussian output statistics.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `(g, μ²)` parameters of the deterministic amplifier family.
///
/// Specs with `μ² < 1` are deliberately representable: they model the
/// unphysical maps (not completely positive) that probabilistic devices
/// approximate. [`GaussianAmpSpec::is_physical`] tells the two cases apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAmpSpec {
    gain: f64,
    mu2: f64,
}

impl GaussianAmpSpec {
    /// Requires `g > 1` and `μ² ≥ 0`.
    pub fn new(gain: f64, mu2: f64) -> Result<Self> {
        if !gain.is_finite() || gain <= 1.0 {
            return Err(Error::Domain(format!("gain {gain} must exceed 1")));
        }
        if !mu2.is_finite() || mu2 < 0.0 {
            return Err(Error::Domain(format!("mu² {mu2} must be ≥ 0")));
        }
        Ok(Self { gain, mu2 })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// The map is completely positive iff `μ² ≥ 1`.
    pub fn is_physical(&self) -> bool {
        self.mu2 >= 1.0
    }
}

/// Mean and ordering-resolved variances of the Gaussian output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOutputStats {
    pub mean: Complex64,
    /// Normally ordered variance `μ²(g² - 1)`.
    pub var_p: f64,
    /// Symmetric ordering: `var_p + ½`.
    pub var_w: f64,
    /// Antinormal ordering: `var_p + 1`.
    pub var_q: f64,
}

/// Output mean `gα` and the variance ladder for a coherent input.
pub fn output_stats(spec: &GaussianAmpSpec, alpha: Complex64) -> GaussianOutputStats {
    let var_p = spec.mu2 * (spec.gain * spec.gain - 1.0);
    GaussianOutputStats {
        mean: alpha * spec.gain,
        var_p,
        var_w: var_p + 0.5,
        var_q: var_p + 1.0,
    }
}

/// Fidelity of the Gaussian output with the target `|gα⟩`:
/// `F(μ²) = 1/(μ²(g² - 1) + 1)`, independent of `α`.
pub fn fidelity_mu(spec: &GaussianAmpSpec) -> f64 {
    1.0 / (spec.mu2 * (spec.gain * spec.gain - 1.0) + 1.0)
}

/// Uncertainty-principle ceiling on the working probability:
/// `p ≤ μ² + (1 - μ²)/g²`.
pub fn success_bound_mu(spec: &GaussianAmpSpec) -> f64 {
    spec.mu2 + (1.0 - spec.mu2) / (spec.gain * spec.gain)
}

/// Probability-fidelity product bound; algebraically `1/g²` for every `μ²`.
pub fn pfp_bound(spec: &GaussianAmpSpec) -> f64 {
    let product = success_bound_mu(spec) * fidelity_mu(spec);
    debug_assert!(
        (product - 1.0 / (spec.gain * spec.gain)).abs() <= 1e-12,
        "probability-fidelity product drifted from 1/g²"
    );
    product
}

/// Ceiling `√2 ᾱ` on the root-probability–SNR product of any amplifier
/// output; amplification must not increase the resolvability of the input.
pub fn snr_resolvability_bound(abar: f64) -> f64 {
    debug_assert!(abar >= 0.0);
    std::f64::consts::SQRT_2 * abar
}

/// Optimal fidelity `M/(2M - 1)` for symmetric 1→M Gaussian cloning of
/// coherent states.
pub fn cloning_fidelity(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("cloning needs at least one clone".into()));
    }
    Ok(m as f64 / (2 * m - 1) as f64)
}
