//! Dual-basis exactness and POVM positivity for the USD amplifier map.

use num_complex::Complex64;

use immaculate::fock::{coherent_fock, default_cutoff, overlap};
use immaculate::usd::{build_reciprocal_basis, usd_amp_apply, usd_success, SymmetricEnsemble};

/// Cholesky-based check that the Hermitian matrix `h + slack·I` is positive
/// definite; small and pivot-free, adequate for the `M ≤ 8` POVM blocks.
fn positive_semidefinite_within(h: &[Vec<Complex64>], slack: f64) -> bool {
    let n = h.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = h[i][j] + if i == j { Complex64::new(slack, 0.0) } else { Complex64::new(0.0, 0.0) };
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

#[test]
fn duality_holds_across_grid() {
    for m in 2..=8usize {
        for &abar in &[1.0, 1.5, 2.0, 2.5, 3.0] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let cutoff = default_cutoff(abar * abar);
            let basis = build_reciprocal_basis(&e, cutoff).unwrap();
            for j in 0..m {
                for k in 0..m {
                    let state = coherent_fock(&e.state_params(k), cutoff).state;
                    let g = overlap(&basis.dual[j], &state);
                    let expected = if j == k { 1.0 } else { 0.0 };
                    assert!(
                        (g.re - expected).abs() < 1e-8 && g.im.abs() < 1e-8,
                        "abar={abar} M={m}: <dual_{j}|alpha_{k}> = {g}"
                    );
                }
            }
        }
    }
}

#[test]
fn heralded_success_and_fidelity_on_grid() {
    for m in 2..=8usize {
        for &abar in &[1.0, 2.0, 3.0] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let cutoff = default_cutoff(abar * abar);
            let basis = build_reciprocal_basis(&e, cutoff).unwrap();
            let gain = 2.0;
            let expected = usd_success(&e).success;
            for j in 0..m {
                let input = coherent_fock(&e.state_params(j), cutoff).state;
                let branches = usd_amp_apply(&basis, &e, gain, &input).unwrap();
                let total: f64 = branches.iter().map(|b| b.prob).sum();
                assert!(
                    (total - expected).abs() < 1e-10,
                    "abar={abar} M={m} j={j}: {total} vs {expected}"
                );
                let out = &branches[j].out;
                let target = coherent_fock(
                    &e.amplified(gain).unwrap().state_params(j),
                    out.cutoff(),
                )
                .state;
                let fidelity = overlap(&target, out).norm_sqr() / out.norm2();
                assert!(fidelity >= 1.0 - 1e-8, "fidelity {fidelity}");
            }
        }
    }
}

#[test]
fn povm_failure_element_is_positive_on_span() {
    // E = P(✓) Σ_j |α_j^⊥⟩⟨α_j^⊥| restricted to span{γ_r} must have
    // spectrum ≤ 1, i.e. I - E ⪰ -1e-10 on the span.
    for m in 2..=8usize {
        for &abar in &[1.0, 1.5, 2.2, 3.0] {
            let e = SymmetricEnsemble::new(abar, m).unwrap();
            let cutoff = default_cutoff(abar * abar);
            let basis = build_reciprocal_basis(&e, cutoff).unwrap();
            let p = usd_success(&e).success;
            // z[r][j] = <γ_r | α_j^⊥>
            let z: Vec<Vec<Complex64>> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|j| overlap(&basis.gamma[r], &basis.dual[j]))
                        .collect()
                })
                .collect();
            // fail[r][s] = δ_rs - p Σ_j z[r][j] conj(z[s][j])
            let fail: Vec<Vec<Complex64>> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|s| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (zr, zs) in z[r].iter().zip(&z[s]) {
                                acc += zr * zs.conj();
                            }
                            let delta = if r == s { 1.0 } else { 0.0 };
                            Complex64::new(delta, 0.0) - acc * p
                        })
                        .collect()
                })
                .collect();
            assert!(
                positive_semidefinite_within(&fail, 1e-10),
                "failure element indefinite at abar={abar}, M={m}"
            );
        }
    }
}
