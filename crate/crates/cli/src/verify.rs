//! The `verify` subcommand: every library-level invariant suite, a
//! machine-readable violation report, and a nonzero exit on any violation.

use std::path::Path;

use num_complex::Complex64;

use immaculate::fock::{
    circle_projection_check, coherent_fock, default_circle_points, default_cutoff, log_poisson_pmf,
    overlap, CoherentParams, PoissonQuery,
};
use immaculate::gaussian::{
    cloning_fidelity, pfp_bound, snr_resolvability_bound, success_bound_mu, GaussianAmpSpec,
};
use immaculate::kraus::{
    apply, extended_kraus, fidelity_chernoff_bound, fidelity_extended, fidelity_restricted,
    pfp_and_do_nothing, success_prob_extended, verify_monotonicity, verify_rotation_covariance,
    AmplifierSpec, FidelityBound,
};
use immaculate::quasidist::{default_grid_spec, q_distribution, snr_report};
use immaculate::usd::{
    amplifier_usd_bound, build_reciprocal_basis, chernoff_remainder, q_r_exact,
    strip_remainder_exact, usd_amp_apply, usd_success, usd_success_dense, usd_success_sparse,
    SparseMode, SymmetricEnsemble,
};

use crate::{CliError, CliResult};

struct Suite {
    name: &'static str,
    checks: usize,
    violations: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(detail());
        }
    }
}

pub fn run(out_dir: &Path) -> CliResult<()> {
    let suites = vec![
        fock_suite(),
        gaussian_suite(),
        usd_spectrum_suite(),
        usd_dual_suite(),
        kraus_suite(),
        quasidist_suite(),
    ];

    let mut total_violations = 0usize;
    for suite in &suites {
        let status = if suite.violations.is_empty() {
            "pass"
        } else {
            "FAIL"
        };
        println!(
            "{status}  {name}: {checks} checks, {nv} violation(s)",
            name = suite.name,
            checks = suite.checks,
            nv = suite.violations.len()
        );
        for v in &suite.violations {
            println!("      {v}");
        }
        total_violations += suite.violations.len();
    }

    let report = serde_json::json!({
        "passed": total_violations == 0,
        "suites": suites.iter().map(|s| serde_json::json!({
            "name": s.name,
            "checks": s.checks,
            "passed": s.violations.is_empty(),
            "violations": s.violations,
        })).collect::<Vec<_>>(),
    });
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("verify_report.json");
    std::fs::write(&path, format!("{:#}\n", report))?;
    println!("report: {}", path.display());

    if total_violations > 0 {
        return Err(CliError::VerificationFailed(total_violations));
    }
    Ok(())
}

fn fock_suite() -> Suite {
    let mut s = Suite::new("fock_core");

    for &abar in &[0.5, 1.0, 2.0, 3.0, 4.0] {
        let cutoff = default_cutoff(abar * abar);
        let c = coherent_fock(&CoherentParams::new(abar, 0.3).unwrap(), cutoff);
        s.check(c.truncation_weight <= 1e-12, || {
            format!("truncation weight {} at ᾱ = {abar}", c.truncation_weight)
        });
        let total: f64 = (0..=cutoff)
            .map(|n| log_poisson_pmf(&PoissonQuery { mean: abar * abar, n }).exp())
            .sum();
        s.check((total - 1.0).abs() <= 1e-12, || {
            format!("pmf sum {total} at λ = {}", abar * abar)
        });
    }

    let cutoff = default_cutoff(9.0);
    for &(a, pa, b, pb) in &[
        (1.0, 0.0, 1.0, 2.9),
        (2.0, 0.7, 3.0, 2.0),
        (0.3, 1.2, 2.4, 5.9),
    ] {
        let va = coherent_fock(&CoherentParams::new(a, pa).unwrap(), cutoff).state;
        let vb = coherent_fock(&CoherentParams::new(b, pb).unwrap(), cutoff).state;
        let alpha = Complex64::from_polar(a, pa);
        let beta = Complex64::from_polar(b, pb);
        let expected = (-(alpha - beta).norm_sqr()).exp();
        let got = overlap(&vb, &va).norm_sqr();
        s.check((got - expected).abs() <= 1e-10, || {
            format!("overlap law off by {:.2e}", (got - expected).abs())
        });
    }

    for &abar in &[0.5, 1.0, 2.0] {
        let cutoff = 30;
        for n in -5i64..=10 {
            let k = default_circle_points(cutoff, n);
            let v = circle_projection_check(abar, n, k, cutoff).unwrap();
            if n < 0 {
                s.check(v.norm2().sqrt() <= 1e-10, || {
                    format!("negative harmonic {n} leaked {:.2e}", v.norm2().sqrt())
                });
            } else {
                let expected = (-abar * abar / 2.0
                    + n as f64 * abar.ln()
                    - 0.5 * (1..=n as usize).map(|i| (i as f64).ln()).sum::<f64>())
                .exp();
                let err = (v.amp(n as usize).re - expected).abs();
                s.check(err <= 1e-10, || {
                    format!("harmonic {n} component off by {err:.2e} at ᾱ = {abar}")
                });
            }
        }
    }
    s
}

fn gaussian_suite() -> Suite {
    let mut s = Suite::new("gaussian_family");
    for i in 0..20 {
        let g = 1.05 + 0.45 * i as f64;
        let mut prev_bound = -1.0;
        for j in 0..10 {
            let mu2 = 0.3 * j as f64;
            let spec = GaussianAmpSpec::new(g, mu2).unwrap();
            let pfp = pfp_bound(&spec);
            s.check((pfp - 1.0 / (g * g)).abs() <= 1e-12, || {
                format!("pfp {pfp} vs 1/g² at g = {g}, μ² = {mu2}")
            });
            let bound = success_bound_mu(&spec);
            s.check(bound >= prev_bound, || {
                format!("success bound not monotone at g = {g}, μ² = {mu2}")
            });
            prev_bound = bound;
        }
    }
    let mut prev = f64::INFINITY;
    for m in 1..=32u64 {
        let f = cloning_fidelity(m).unwrap();
        s.check(f < prev && f >= 0.5, || format!("cloning fidelity order at M = {m}"));
        prev = f;
    }
    s
}

fn usd_spectrum_suite() -> Suite {
    let mut s = Suite::new("usd_spectrum");

    for &abar in &[0.5, 1.5, 3.0, 6.0] {
        for &m in &[2usize, 5, 12, 40] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let total: f64 = (0..m).map(|r| q_r_exact(&e, r)).sum();
            s.check((total - m as f64).abs() <= 1e-10, || {
                format!("Σq_r = {total} ≠ {m} at ᾱ = {abar}")
            });
            let spec = usd_success(&e);
            let max = spec.q.iter().copied().fold(0.0f64, f64::max);
            s.check(spec.success >= 0.0 && spec.success <= 1.0 + 1e-12 && max >= 1.0 - 1e-12, || {
                format!("spectrum straddle broken at ᾱ = {abar}, M = {m}")
            });
        }
    }

    for &m in &[2usize, 6, 12] {
        let mut prev = -1.0;
        for i in 0..=30 {
            let abar = 6.0 * i as f64 / 30.0;
            let p = usd_success(&SymmetricEnsemble::new(abar, m).unwrap()).success;
            s.check(p >= prev - 1e-12, || {
                format!("success not monotone at ᾱ = {abar}, M = {m}")
            });
            prev = p;
        }
    }

    for &abar in &[0.5, 1.0, 2.0] {
        for &m in &[3usize, 6, 12] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            if (2 * m - 1) as f64 > abar * abar {
                let bound = chernoff_remainder(&e).unwrap();
                let exact = strip_remainder_exact(&e);
                s.check(bound >= exact, || {
                    format!("Chernoff {bound} < remainder {exact} at ᾱ = {abar}, M = {m}")
                });
            }
        }
    }

    // Dense agreement inside M ≥ 2ᾱ² + 4.
    for &abar in &[0.5f64, 1.0, 1.5, 2.0] {
        let m_lo = (2.0 * abar * abar + 4.0).ceil() as usize;
        for m in m_lo..=(m_lo + 6) {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let exact = usd_success(&e).success;
            let dense = usd_success_dense(&e).unwrap();
            s.check(((exact - dense) / exact).abs() <= 0.05, || {
                format!("dense form off at ᾱ = {abar}, M = {m}")
            });
        }
    }

    // Sparse agreement where the comb model has converged (ᾱ ≥ 3).
    for &abar in &[3.0f64, 4.0, 5.0, 6.0] {
        for m in 2..=(4.0 * abar) as usize {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let exact = usd_success(&e).success;
            let sparse = usd_success_sparse(&e, SparseMode::Leading).unwrap();
            s.check((exact - sparse).abs() <= 0.02, || {
                format!("sparse form off by {:.3} at ᾱ = {abar}, M = {m}", (exact - sparse).abs())
            });
        }
    }

    // Disk/spoke limit.
    for &g in &[1.5, 2.0, 3.0] {
        for m in 2..=6usize {
            let e = SymmetricEnsemble::new(1e-3, m).unwrap();
            let bound = amplifier_usd_bound(&e, g).unwrap();
            let target = g.powi(-2 * (m as i32 - 1));
            s.check(((bound - target) / target).abs() <= 1e-4, || {
                format!("disk/spoke limit off at g = {g}, M = {m}")
            });
        }
    }
    s
}

fn usd_dual_suite() -> Suite {
    let mut s = Suite::new("usd_dual_basis");
    for &m in &[2usize, 4, 6, 8] {
        for &abar in &[1.0, 2.0, 3.0] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let cutoff = default_cutoff(abar * abar);
            let basis = build_reciprocal_basis(&e, cutoff).unwrap();
            let mut worst = 0.0f64;
            for j in 0..m {
                for k in 0..m {
                    let state = coherent_fock(&e.state_params(k), cutoff).state;
                    let got = overlap(&basis.dual[j], &state);
                    let expected = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((got.re - expected).abs().max(got.im.abs()));
                }
            }
            s.check(worst <= 1e-8, || {
                format!("duality defect {worst:.2e} at ᾱ = {abar}, M = {m}")
            });

            let p_expected = usd_success(&e).success;
            let input = coherent_fock(&e.state_params(0), cutoff).state;
            let branches = usd_amp_apply(&basis, &e, 2.0, &input).unwrap();
            let total: f64 = branches.iter().map(|b| b.prob).sum();
            s.check((total - p_expected).abs() <= 1e-10, || {
                format!("heralded probability off by {:.2e} at ᾱ = {abar}, M = {m}",
                    (total - p_expected).abs())
            });

            // POVM failure element PSD on the spanned subspace.
            let z: Vec<Vec<Complex64>> = (0..m)
                .map(|r| (0..m).map(|j| overlap(&basis.gamma[r], &basis.dual[j])).collect())
                .collect();
            let fail: Vec<Vec<Complex64>> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|c| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (zr, zc) in z[r].iter().zip(&z[c]) {
                                acc += zr * zc.conj();
                            }
                            let delta = if r == c { 1.0 } else { 0.0 };
                            Complex64::new(delta, 0.0) - acc * p_expected
                        })
                        .collect()
                })
                .collect();
            s.check(positive_semidefinite_within(&fail, 1e-10), || {
                format!("failure POVM indefinite at ᾱ = {abar}, M = {m}")
            });
        }
    }
    s
}

fn kraus_suite() -> Suite {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut s = Suite::new("kraus_amplifier");

    for &(g, cap) in &[(sqrt2, 2usize), (sqrt2, 4), (2.0, 6), (3.0, 9), (3.0, 25)] {
        for k in 0..=4usize {
            let spec = AmplifierSpec::new(g, cap, k).unwrap();
            let cutoff = cap + k + 60;
            let kr = extended_kraus(&spec, cutoff).unwrap();
            let bad = (0..=(cutoff + k))
                .map(|m| kr.gram_diagonal(m))
                .any(|d| !(0.0..=1.0 + 1e-12).contains(&d));
            s.check(!bad, || format!("trace-decreasing broken at g = {g}, N = {cap}, k = {k}"));
        }
    }

    for &(g, cap) in &[(sqrt2, 2usize), (sqrt2, 4), (3.0, 9)] {
        let spec = AmplifierSpec::new(g, cap, 0).unwrap();
        for i in 0..=30 {
            let abar = 1.5 * (cap as f64).sqrt() * i as f64 / 30.0;
            let cutoff = spec.default_apply_cutoff(abar);
            let kr = extended_kraus(&spec, cutoff).unwrap();
            let input = coherent_fock(&CoherentParams::new(abar, 0.0).unwrap(), cutoff).state;
            let outcome = apply(&kr, &input).unwrap();
            let p_closed = success_prob_extended(&spec, abar);
            s.check((outcome.prob - p_closed).abs() <= 1e-10, || {
                format!("closed-form p off at g = {g}, N = {cap}, ᾱ = {abar}")
            });
            if let Some(out) = outcome.out {
                let target = coherent_fock(&CoherentParams::new(g * abar, 0.0).unwrap(), out.cutoff()).state;
                let f_matrix = overlap(&target, &out).norm_sqr();
                let f_closed = fidelity_extended(&spec, abar);
                s.check((f_matrix - f_closed).abs() <= 1e-10, || {
                    format!("closed-form F off at g = {g}, N = {cap}, ᾱ = {abar}")
                });
            }

            let f_ext = fidelity_extended(&spec, abar);
            let f_res = fidelity_restricted(&spec, abar);
            s.check(f_ext >= f_res - 1e-12, || {
                format!("extension lowered fidelity at g = {g}, N = {cap}, ᾱ = {abar}")
            });
            match fidelity_chernoff_bound(&spec, abar) {
                FidelityBound::Lower(lo) => s.check(lo <= f_res + 1e-12, || {
                    format!("Chernoff lower bound above F at ᾱ = {abar}")
                }),
                FidelityBound::Upper(hi) => s.check(hi >= f_res - 1e-12, || {
                    format!("Chernoff upper bound below F at ᾱ = {abar}")
                }),
            }
            let c = pfp_and_do_nothing(&spec, abar).unwrap();
            s.check(c.pfp <= c.do_nothing * (1.0 + 1e-12), || {
                format!("pfp above do-nothing at g = {g}, N = {cap}, ᾱ = {abar}")
            });
        }

        let origin = success_prob_extended(&spec, 0.0);
        let expected = (-2.0 * cap as f64 * g.ln()).exp();
        s.check((origin - expected).abs() <= f64::EPSILON * expected, || {
            format!("origin probability off at g = {g}, N = {cap}")
        });

        let grid: Vec<f64> = (0..=24)
            .map(|i| 1.5 * (cap as f64).sqrt() * i as f64 / 24.0)
            .collect();
        let report = verify_monotonicity(&spec, 3, &grid).unwrap();
        s.check(report.passed(), || {
            format!(
                "monotonicity violations at g = {g}, N = {cap}: {:?}",
                report.violations.len()
            )
        });

        let kr = extended_kraus(&spec, cap + 40).unwrap();
        let cov = verify_rotation_covariance(&kr, 20).unwrap();
        s.check(cov.max_deviation <= 1e-12, || {
            format!("rotation covariance defect {} at g = {g}, N = {cap}", cov.max_deviation)
        });
    }
    s
}

fn quasidist_suite() -> Suite {
    let mut s = Suite::new("quasidist");
    let spec = AmplifierSpec::new(3.0, 9, 0).unwrap();

    for &abar in &[0.5, 1.5, 3.0, 5.0] {
        let cutoff = spec.default_apply_cutoff(abar);
        let kr = extended_kraus(&spec, cutoff).unwrap();
        let input = coherent_fock(&CoherentParams::new(abar, 0.0).unwrap(), cutoff).state;
        let out = apply(&kr, &input).unwrap().out.unwrap();
        let grid = q_distribution(&out, &default_grid_spec(&out).unwrap()).unwrap();
        let mass = grid.mass();
        s.check((0.997..=1.0 + 1e-3).contains(&mass), || {
            format!("Q mass {mass} at ᾱ = {abar}")
        });
        s.check(grid.values().iter().all(|&v| v >= 0.0), || {
            format!("negative Q sample at ᾱ = {abar}")
        });
        if 3.0 * abar <= 2.0 {
            let (peak, at) = grid.peak();
            s.check((at - Complex64::new(3.0 * abar, 0.0)).norm() <= 0.05, || {
                format!("Q peak displaced at ᾱ = {abar}")
            });
            s.check((peak - 1.0 / std::f64::consts::PI).abs() <= 0.05 / std::f64::consts::PI, || {
                format!("Q peak height {peak} at ᾱ = {abar}")
            });
        }
    }

    for i in 1..=40 {
        let abar = 6.0 * i as f64 / 40.0;
        let report = snr_report(&spec, abar).unwrap();
        let bound = snr_resolvability_bound(abar) * (1.0 + 1e-9);
        s.check(report.root_p_snr1 <= bound && report.root_p_snr2 <= bound, || {
            format!("resolvability bound broken at ᾱ = {abar} for g = 3, N = 9")
        });
    }

    let witness = (1..60).map(|i| 1.0 + 2.0 * i as f64 / 60.0).find(|&abar| {
        let report = snr_report(&spec, abar).unwrap();
        report.root_p_snr_n > abar
    });
    s.check(witness.is_some(), || {
        "no number-SNR witness in (√N/g, √N)".to_string()
    });
    s
}

fn positive_semidefinite_within(h: &[Vec<Complex64>], slack: f64) -> bool {
    let n = h.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = h[i][j]
                + if i == j {
                    Complex64::new(slack, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            let (row_i, row_j) = (&l[i], &l[j]);
            for (lik, ljk) in row_i.iter().zip(row_j).take(j) {
                sum -= lik * ljk.conj();
            }
            if i == j {
                if sum.re <= 0.0 {
                    return false;
                }
                l[i][j] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    true
}
