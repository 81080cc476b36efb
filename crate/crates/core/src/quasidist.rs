//! Phase-plane and signal-to-noise diagnostics of amplifier outputs.
//!
//! The Husimi `Q(β) = |⟨β|ψ⟩|²/π` is sampled on a square lattice, and the
//! quadrature SNRs use antinormally ordered uncertainties (the ordering
//! that describes simultaneous measurement of both quadratures), which sit
//! half a quantum above the symmetric ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherent_fock, overlap, state_moments, CoherentParams, FockVector};
use crate::kraus::{apply, extended_kraus, AmplifierSpec};
use crate::special::CompensatedSum;

/// Square sampling lattice for a `Q` distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QGridSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub points: usize,
}

impl QGridSpec {
    pub fn new(center: Complex64, half_width: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Domain("grid needs at least 2 points per axis".into()));
        }
        let valid_width = half_width.is_finite() && half_width > 0.0;
        if !valid_width {
            return Err(Error::Domain("grid half-width must be positive".into()));
        }
        Ok(Self {
            center,
            half_width,
            points,
        })
    }
}

/// Default lattice: 201×201 points, centered on `⟨a⟩`, half-width
/// `max(3, |⟨a⟩| + 4)` so both the coherent peak and any arc flattening
/// stay inside.
pub fn default_grid_spec(state: &FockVector) -> Result<QGridSpec> {
    let m = state_moments(state)?;
    QGridSpec::new(m.mean_a, (m.mean_a.norm() + 4.0).max(3.0), 201)
}

/// Sampled `Q` values on the lattice, row-major over the real axis.
#[derive(Debug, Clone)]
pub struct QGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    values: Vec<f64>,
}

impl QGrid {
    pub fn value(&self, re_index: usize, im_index: usize) -> f64 {
        self.values[re_index * self.im_axis.len() + im_index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Riemann mass `Σ Q · ΔreΔim`; short of one by the weight outside the
    /// grid.
    pub fn mass(&self) -> f64 {
        let dre = (self.re_axis[self.re_axis.len() - 1] - self.re_axis[0])
            / (self.re_axis.len() - 1) as f64;
        let dim =
            (self.im_axis[self.im_axis.len() - 1] - self.im_axis[0]) / (self.im_axis.len() - 1) as f64;
        let mut acc = CompensatedSum::new();
        for &v in &self.values {
            acc.add(v);
        }
        acc.value() * dre * dim
    }

    /// Highest sample and its phase-plane location.
    pub fn peak(&self) -> (f64, Complex64) {
        let mut best = (0usize, 0usize);
        let mut best_v = f64::NEG_INFINITY;
        for i in 0..self.re_axis.len() {
            for j in 0..self.im_axis.len() {
                let v = self.value(i, j);
                if v > best_v {
                    best_v = v;
                    best = (i, j);
                }
            }
        }
        (
            best_v,
            Complex64::new(self.re_axis[best.0], self.im_axis[best.1]),
        )
    }
}

/// `Q(β) = |⟨β|ψ⟩|²/π` on the lattice; the state is normalized first.
pub fn q_distribution(state: &FockVector, grid: &QGridSpec) -> Result<QGrid> {
    let psi = state.normalized()?;
    let axis = |c: f64| -> Vec<f64> {
        (0..grid.points)
            .map(|i| c - grid.half_width + 2.0 * grid.half_width * i as f64 / (grid.points - 1) as f64)
            .collect()
    };
    let re_axis = axis(grid.center.re);
    let im_axis = axis(grid.center.im);
    let mut values = Vec::with_capacity(grid.points * grid.points);
    for &re in &re_axis {
        for &im in &im_axis {
            let beta = Complex64::new(re, im);
            let probe = coherent_fock(&CoherentParams::from_complex(beta)?, psi.cutoff()).state;
            values.push(overlap(&probe, &psi).norm_sqr() / std::f64::consts::PI);
        }
    }
    Ok(QGrid {
        re_axis,
        im_axis,
        values,
    })
}

/// Antinormally ordered quadrature SNRs in the frame aligned with `⟨a⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSnr {
    /// Amplitude (radial) quadrature: `√2|⟨a⟩|/δx₁`.
    pub snr1: f64,
    /// Phase quadrature: `√2|⟨a⟩|/δx₂`.
    pub snr2: f64,
}

/// Quadrature SNRs with uncertainties from the `Q` distribution
/// (antinormal variance = symmetric variance + ½).
pub fn quadrature_snr(state: &FockVector) -> Result<QuadratureSnr> {
    let m = state_moments(state)?;
    let mag = m.mean_a.norm();
    if mag == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let theta = m.mean_a.arg();
    let a2_rot = (m.mean_a2 * Complex64::from_polar(1.0, -2.0 * theta)).re;
    let signal = std::f64::consts::SQRT_2 * mag;
    let var1_sym = a2_rot + m.mean_n + 0.5 - signal * signal;
    let var2_sym = -a2_rot + m.mean_n + 0.5;
    Ok(QuadratureSnr {
        snr1: signal / (var1_sym + 0.5).sqrt(),
        snr2: signal / (var2_sym + 0.5).sqrt(),
    })
}

/// Number-based SNR `⟨n⟩/Δn`; number eigenstates return the infinite
/// sentinel.
pub fn number_snr(state: &FockVector) -> Result<f64> {
    let m = state_moments(state)?;
    let var = m.mean_n2 - m.mean_n * m.mean_n;
    if var <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(m.mean_n / var.sqrt())
}

/// SNR diagnostics of the optimal (`k = 0`) amplifier output at one input
/// amplitude.
#[derive(Debug, Clone, Copy)]
pub struct SnrReport {
    pub snr1: f64,
    pub snr2: f64,
    pub snr_n: f64,
    /// Working probability of the branch.
    pub p: f64,
    pub root_p_snr1: f64,
    pub root_p_snr2: f64,
    pub root_p_snr_n: f64,
}

/// Pushes `|ᾱ⟩` through the extended `k = 0` operator and assembles all
/// SNRs with their root-probability products.
pub fn snr_report(spec: &AmplifierSpec, abar: f64) -> Result<SnrReport> {
    snr_report_with_cutoff(spec, abar, spec.default_apply_cutoff(abar))
}

/// [`snr_report`] at an explicit Fock cutoff.
pub fn snr_report_with_cutoff(spec: &AmplifierSpec, abar: f64, cutoff: usize) -> Result<SnrReport> {
    if spec.offset() != 0 {
        return Err(Error::Domain("SNR report is defined for k = 0".into()));
    }
    let kr = extended_kraus(spec, cutoff)?;
    let input = coherent_fock(&CoherentParams::new(abar, 0.0)?, cutoff).state;
    let outcome = apply(&kr, &input)?;
    let out = outcome.out.ok_or(Error::ZeroNorm)?;
    let quad = quadrature_snr(&out)?;
    let snr_n = number_snr(&out)?;
    let root_p = outcome.prob.sqrt();
    Ok(SnrReport {
        snr1: quad.snr1,
        snr2: quad.snr2,
        snr_n,
        p: outcome.prob,
        root_p_snr1: root_p * quad.snr1,
        root_p_snr2: root_p * quad.snr2,
        root_p_snr_n: root_p * snr_n,
    })
}
