//! Log-space numeric primitives shared by the physics modules.
//!
//! Every factorial or power ratio in the crate goes through [`ln_factorial`];
//! direct arithmetic underflows already for the ratios that appear at photon
//! numbers around forty. Series are accumulated either with compensated
//! summation ([`CompensatedSum`]) or, when individual terms over- or
//! underflow, through [`log_sum_exp`].

use std::sync::OnceLock;

/// Largest index kept in the precomputed `ln n!` table. Indices beyond it
/// fall back to a Stirling series whose truncation error at that scale is
/// far below one ulp.
const LN_FACT_TABLE_LEN: usize = 8192;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACT_TABLE_LEN);
        table.push(0.0);
        // Double-double accumulation keeps the table entries at ~0.5 ulp.
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        for n in 1..LN_FACT_TABLE_LEN {
            let term = (n as f64).ln();
            let s = hi + term;
            let err = if hi.abs() >= term.abs() {
                (hi - s) + term
            } else {
                (term - s) + hi
            };
            lo += err;
            hi = s;
            let fold = hi + lo;
            lo += hi - fold;
            hi = fold;
            table.push(hi + lo);
        }
        table
    })
}

/// Natural log of `n!`.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        table[n]
    } else {
        ln_gamma_stirling(n as f64 + 1.0)
    }
}

/// Stirling series for `ln Γ(x)`, adequate for `x ≳ 20`.
fn ln_gamma_stirling(x: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 * (1.0 - inv2 / 30.0 * (1.0 - inv2 * 2.0 / 7.0));
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `ln Σ exp(l_i)` computed against the running maximum.
///
/// Returns `-inf` for an empty slice.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut acc = CompensatedSum::new();
    for &l in logs {
        acc.add((l - max).exp());
    }
    max + acc.value().ln()
}

/// Log-space sum of the Poisson-numerator strip
/// `Σ_{k≥0} λ^{start + k·step} / (start + k·step)!`.
///
/// Terms are generated until the index has passed the Poisson peak `λ` and
/// the latest term has dropped 45 nats below the running maximum, which is
/// stricter than the `1e-18 × partial sum` contract.
///
/// Returns `-inf` when `λ = 0` and `start > 0`; returns `0.0` (= ln 1) when
/// `λ = 0` and `start = 0`.
pub fn ln_poisson_strip_sum(lambda: f64, start: usize, step: usize) -> f64 {
    debug_assert!(lambda >= 0.0);
    debug_assert!(step >= 1);
    if lambda == 0.0 {
        return if start == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let ln_lambda = lambda.ln();
    let mut logs = Vec::new();
    let mut max = f64::NEG_INFINITY;
    let mut idx = start;
    loop {
        let lt = idx as f64 * ln_lambda - ln_factorial(idx);
        logs.push(lt);
        if lt > max {
            max = lt;
        }
        if idx as f64 > lambda && lt < max - 45.0 {
            break;
        }
        idx += step;
    }
    log_sum_exp(&logs)
}

/// Nearest integer with half-integers rounded up.
pub fn nearest_int(z: f64) -> f64 {
    (z + 0.5).floor()
}
