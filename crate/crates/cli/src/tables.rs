//! Bound and landmark tables.

use std::path::Path;

use num_complex::Complex64;

use immaculate::gaussian::{fidelity_mu, pfp_bound, success_bound_mu, GaussianAmpSpec};
use immaculate::usd::{
    amplifier_regime_bounds, amplifier_usd_bound, helstrom_two, usd_success, usd_success_sparse,
    usd_two, ln_usd_success_dense, SparseMode, SymmetricEnsemble,
};

use crate::dataset::{Cell, Dataset, Format};
use crate::{CliError, CliResult};

/// Discrimination landmark table: exact vs asymptotic success
/// probabilities at the ratios `a = ᾱ²/M²`.
pub fn usd_table(out_dir: &Path, format: Format, m_list: &[usize], a_list: &[f64]) -> CliResult<()> {
    if m_list.is_empty() || a_list.is_empty() {
        return Err(CliError::Usage("empty table grid".into()));
    }
    let mut data = Dataset::new(
        "usd_table",
        vec![
            "m",
            "a",
            "alpha2",
            "exact",
            "sparse_leading",
            "sparse_theta",
            "dense",
        ],
    );
    data.meta("m_list", join(m_list.iter()));
    data.meta("a_list", join(a_list.iter()));
    for &m in m_list {
        if m < 2 {
            return Err(CliError::Usage("usd-table needs M ≥ 2".into()));
        }
        for &a in a_list {
            let valid = a.is_finite() && a > 0.0;
            if !valid {
                return Err(CliError::Usage(format!("ratio a = {a} must be positive")));
            }
            let alpha2 = a * (m * m) as f64;
            let e = SymmetricEnsemble::new(alpha2.sqrt(), m).map_err(usage)?;
            data.push(vec![
                Cell::Int(m as i64),
                Cell::Float(a),
                Cell::Float(alpha2),
                Cell::Float(usd_success(&e).success),
                Cell::Float(usd_success_sparse(&e, SparseMode::Leading).map_err(usage)?),
                Cell::Float(usd_success_sparse(&e, SparseMode::Theta).map_err(usage)?),
                Cell::Float(ln_usd_success_dense(&e).exp()),
            ]);
        }
    }
    data.write(out_dir, format)?;
    Ok(())
}

/// Three bound tables: the thermal-ancilla family, two-state
/// discrimination, and the circle-USD amplifier ceiling.
pub fn bounds(
    out_dir: &Path,
    format: Format,
    g_list: &[f64],
    m_range: (usize, usize),
    abar_list: &[f64],
) -> CliResult<()> {
    if g_list.is_empty() || abar_list.is_empty() {
        return Err(CliError::Usage("empty bounds grid".into()));
    }

    let mut family = Dataset::new(
        "bounds_gaussian",
        vec!["g", "mu2", "success_bound", "fidelity", "pfp"],
    );
    family.meta("g_list", join(g_list.iter()));
    for &g in g_list {
        for &mu2 in &[0.0, 0.5, 1.0] {
            let spec = GaussianAmpSpec::new(g, mu2).map_err(usage)?;
            family.push(vec![
                Cell::Float(g),
                Cell::Float(mu2),
                Cell::Float(success_bound_mu(&spec)),
                Cell::Float(fidelity_mu(&spec)),
                Cell::Float(pfp_bound(&spec)),
            ]);
        }
    }
    family.write(out_dir, format)?;

    let mut two = Dataset::new(
        "bounds_twostate",
        vec![
            "g",
            "d2",
            "helstrom_before",
            "helstrom_bound",
            "usd_before",
            "usd_bound",
        ],
    );
    two.meta("g_list", join(g_list.iter()));
    let d2_grid: Vec<f64> = (0..=40).map(|i| 4.0 * i as f64 / 40.0).collect();
    for &g in g_list {
        for &d2 in &d2_grid {
            let alpha = Complex64::new(0.0, 0.0);
            let beta = Complex64::new(d2.sqrt(), 0.0);
            let h = helstrom_two(alpha, beta, g).map_err(usage)?;
            let u = usd_two(alpha, beta, g).map_err(usage)?;
            two.push(vec![
                Cell::Float(g),
                Cell::Float(d2),
                Cell::Float(h.p_before),
                Cell::Float(h.bound),
                Cell::Float(u.p_before),
                Cell::Float(u.bound),
            ]);
        }
    }
    two.write(out_dir, format)?;

    let mut amp = Dataset::new(
        "bounds_usd_amp",
        vec![
            "g",
            "m",
            "abar",
            "exact_ratio",
            "dense_sparse",
            "dense_dense",
            "disk_spoke",
        ],
    );
    amp.meta("g_list", join(g_list.iter()));
    amp.meta("m_range", format!("{}..{}", m_range.0, m_range.1));
    amp.meta("abar_list", join(abar_list.iter()));
    for &g in g_list {
        for m in m_range.0..=m_range.1 {
            if m < 2 {
                return Err(CliError::Usage("bounds needs M ≥ 2".into()));
            }
            for &abar in abar_list {
                let e = SymmetricEnsemble::new(abar, m).map_err(usage)?;
                let regimes = amplifier_regime_bounds(&e, g).map_err(usage)?;
                amp.push(vec![
                    Cell::Float(g),
                    Cell::Int(m as i64),
                    Cell::Float(abar),
                    Cell::Float(amplifier_usd_bound(&e, g).map_err(usage)?),
                    Cell::Float(regimes.dense_sparse),
                    Cell::Float(regimes.dense_dense),
                    Cell::Float(regimes.disk_spoke),
                ]);
            }
        }
    }
    amp.write(out_dir, format)?;
    Ok(())
}

fn usage(e: immaculate::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn join<T: ToString>(values: impl Iterator<Item = T>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
