//! Figure-reproduction subcommands. Each writes one dataset per panel,
//! with rows sorted by the sweep keys.

use std::path::Path;

use rayon::prelude::*;

use immaculate::fock::{coherent_fock, CoherentParams};
use immaculate::gaussian::snr_resolvability_bound;
use immaculate::kraus::{
    apply, extended_kraus, fidelity_extended, fidelity_restricted, pfp_and_do_nothing,
    success_prob_extended, success_prob_restricted, AmplifierSpec,
};
use immaculate::quasidist::{default_grid_spec, q_distribution, snr_report_with_cutoff, QGridSpec};
use immaculate::usd::{
    a_of_epsilon, fit_a_epsilon, ln_usd_success_dense, usd_success, usd_success_sparse,
    AEpsilonMode, SparseMode, SymmetricEnsemble,
};

use crate::dataset::{Cell, Dataset, Format};
use crate::{AmpSweep, CliError, CliResult};

fn expand_range((lo, hi): (usize, usize), step: usize) -> CliResult<Vec<usize>> {
    if step == 0 {
        return Err(CliError::Usage("step must be positive".into()));
    }
    Ok((lo..=hi).step_by(step).collect())
}

pub fn fig3(
    out_dir: &Path,
    format: Format,
    eps_start: f64,
    eps_stop: f64,
    eps_points: usize,
    m_range: (usize, usize),
    m_step: usize,
) -> CliResult<()> {
    if eps_points < 2 {
        return Err(CliError::Usage("--eps-points must be at least 2".into()));
    }
    if !(eps_stop > 0.0 && eps_start > eps_stop && eps_start < 1.0) {
        return Err(CliError::Usage(
            "need 0 < eps-stop < eps-start < 1 for the log-spaced grid".into(),
        ));
    }
    let eps_grid: Vec<f64> = (0..eps_points)
        .map(|i| {
            if i == 0 {
                eps_start
            } else if i == eps_points - 1 {
                eps_stop
            } else {
                let t = i as f64 / (eps_points - 1) as f64;
                (eps_start.ln() + t * (eps_stop.ln() - eps_start.ln())).exp()
            }
        })
        .collect();
    let m_grid = expand_range(m_range, m_step)?;

    let fit = fit_a_epsilon(&eps_grid, &m_grid)?;

    let mut data = Dataset::new("fig3", vec!["eps", "m", "a_numeric", "a_analytic"]);
    data.meta("eps_start", eps_start);
    data.meta("eps_stop", eps_stop);
    data.meta("eps_points", eps_points);
    data.meta("m_range", format!("{}..{}", m_range.0, m_range.1));
    data.meta("m_step", m_step);
    let mut samples = fit.samples.iter();
    for &eps in &eps_grid {
        let analytic = a_of_epsilon(eps, AEpsilonMode::Analytic).map_err(usage)?;
        for &m in &m_grid {
            if fit.non_converged.contains(&(eps, m)) {
                continue;
            }
            let &(s_eps, a) = samples.next().expect("sample per converged grid point");
            debug_assert_eq!(s_eps, eps);
            data.push(vec![
                Cell::Float(eps),
                Cell::Int(m as i64),
                Cell::Float(a),
                Cell::Float(analytic),
            ]);
        }
    }
    data.write(out_dir, format)?;

    let mut summary = Dataset::new(
        "fig3_fit",
        vec!["slope", "intercept", "residual_rms", "samples", "non_converged"],
    );
    summary.meta("eps_start", eps_start);
    summary.meta("eps_stop", eps_stop);
    summary.meta("eps_points", eps_points);
    summary.meta("m_range", format!("{}..{}", m_range.0, m_range.1));
    summary.meta("m_step", m_step);
    summary.push(vec![
        Cell::Float(fit.slope),
        Cell::Float(fit.intercept),
        Cell::Float(fit.residual_rms),
        Cell::Int(fit.samples.len() as i64),
        Cell::Int(fit.non_converged.len() as i64),
    ]);
    summary.write(out_dir, format)?;
    Ok(())
}

pub fn fig4(
    out_dir: &Path,
    format: Format,
    m_range: (usize, usize),
    alpha2: &[f64],
) -> CliResult<()> {
    if alpha2.is_empty() {
        return Err(CliError::Usage("--alpha2 list is empty".into()));
    }
    for &a2 in alpha2 {
        let valid = a2.is_finite() && a2 > 0.0;
        if !valid {
            return Err(CliError::Usage(format!("alpha² = {a2} must be positive")));
        }
    }
    let m_grid = expand_range(m_range, 1)?;
    if m_grid.iter().any(|&m| m < 2) {
        return Err(CliError::Usage("fig4 needs M ≥ 2".into()));
    }

    let mut keys: Vec<(usize, u64)> = Vec::new();
    for &m in &m_grid {
        for (i, _) in alpha2.iter().enumerate() {
            keys.push((m, i as u64));
        }
    }
    let rows: Vec<Vec<Cell>> = keys
        .par_iter()
        .map(|&(m, i)| {
            let a2 = alpha2[i as usize];
            let e = SymmetricEnsemble::new(a2.sqrt(), m).expect("validated");
            let exact = usd_success(&e).success;
            let dense = ln_usd_success_dense(&e).exp();
            let sparse = usd_success_sparse(&e, SparseMode::Leading).expect("ᾱ > 0");
            vec![
                Cell::Int(m as i64),
                Cell::Float(a2),
                Cell::Float(exact),
                Cell::Float(dense),
                Cell::Float(sparse),
            ]
        })
        .collect();

    let mut data = Dataset::new(
        "fig4",
        vec!["m", "alpha2", "exact", "dense_approx", "sparse_approx"],
    );
    data.meta("m_range", format!("{}..{}", m_range.0, m_range.1));
    data.meta("alpha2", join_f64(alpha2));
    for row in rows {
        data.push(row);
    }
    data.write(out_dir, format)?;
    Ok(())
}

pub fn fig5(out_dir: &Path, format: Format, sweep: &AmpSweep, k_list: &[usize]) -> CliResult<()> {
    if k_list.is_empty() {
        return Err(CliError::Usage("--k-list is empty".into()));
    }
    let alphas = sweep.alphas()?;
    validate_cutoff(sweep, &alphas)?;

    let mut data = Dataset::new("fig5", vec!["k", "alpha", "p_extended", "f_extended"]);
    annotate(&mut data, sweep);
    data.meta("k_list", join_usize(k_list));
    for &k in k_list {
        let spec = AmplifierSpec::new(sweep.g(), sweep.n_cap(), k).map_err(usage)?;
        let rows: Vec<Vec<Cell>> = alphas
            .par_iter()
            .map(|&abar| {
                vec![
                    Cell::Int(k as i64),
                    Cell::Float(abar),
                    Cell::Float(success_prob_extended(&spec, abar)),
                    Cell::Float(fidelity_extended(&spec, abar)),
                ]
            })
            .collect();
        for row in rows {
            data.push(row);
        }
    }
    data.write(out_dir, format)?;
    Ok(())
}

pub fn fig6(out_dir: &Path, format: Format, sweep: &AmpSweep) -> CliResult<()> {
    let alphas = sweep.alphas()?;
    validate_cutoff(sweep, &alphas)?;
    let spec = AmplifierSpec::new(sweep.g(), sweep.n_cap(), 0).map_err(usage)?;

    let rows: Vec<Vec<Cell>> = alphas
        .par_iter()
        .map(|&abar| {
            let c = pfp_and_do_nothing(&spec, abar).expect("k = 0");
            vec![
                Cell::Float(abar),
                Cell::Float(fidelity_extended(&spec, abar)),
                Cell::Float(success_prob_extended(&spec, abar)),
                Cell::Float(fidelity_restricted(&spec, abar)),
                Cell::Float(success_prob_restricted(&spec, abar)),
                Cell::Float(c.pfp),
                Cell::Float(c.do_nothing),
            ]
        })
        .collect();

    let mut data = Dataset::new(
        "fig6",
        vec![
            "alpha",
            "f0_ext",
            "p0_ext",
            "f_restricted",
            "p_restricted",
            "pfp",
            "do_nothing",
        ],
    );
    annotate(&mut data, sweep);
    for row in rows {
        data.push(row);
    }
    data.write(out_dir, format)?;
    Ok(())
}

pub fn fig7(
    out_dir: &Path,
    format: Format,
    g: f64,
    n_cap: usize,
    alphas: &[f64],
    grid_points: usize,
    cutoff: Option<usize>,
) -> CliResult<()> {
    if alphas.is_empty() {
        return Err(CliError::Usage("--alpha list is empty".into()));
    }
    let spec = AmplifierSpec::new(g, n_cap, 0).map_err(usage)?;
    let auto = alphas
        .iter()
        .map(|&a| spec.default_apply_cutoff(a))
        .max()
        .expect("non-empty");
    if let Some(c) = cutoff {
        if c < auto {
            return Err(CliError::Usage(format!(
                "--cutoff {c} undercuts the automatic rule {auto}"
            )));
        }
    }

    let panels: Vec<Dataset> = alphas
        .par_iter()
        .map(|&abar| -> CliResult<Dataset> {
            let panel_cutoff = cutoff.unwrap_or_else(|| spec.default_apply_cutoff(abar));
            let kr = extended_kraus(&spec, panel_cutoff).map_err(usage)?;
            let input = coherent_fock(&CoherentParams::new(abar, 0.0)?, panel_cutoff).state;
            let outcome = apply(&kr, &input).map_err(usage)?;
            let out = outcome.out.ok_or_else(|| {
                CliError::Usage(format!("zero-probability branch at ᾱ = {abar}"))
            })?;
            let base = default_grid_spec(&out)?;
            let grid_spec = QGridSpec::new(base.center, base.half_width, grid_points)?;
            let grid = q_distribution(&out, &grid_spec)?;

            let mut data = Dataset::new(format!("fig7_a{abar}"), vec!["re", "im", "q"]);
            data.meta("g", g);
            data.meta("n_cap", n_cap);
            data.meta("alpha", abar);
            data.meta("grid_points", grid_points);
            data.meta("cutoff", panel_cutoff);
            data.meta("branch_probability", format!("{:.12e}", outcome.prob));
            data.meta("mass", format!("{:.6}", grid.mass()));
            let (peak, at) = grid.peak();
            data.meta("peak_q", format!("{peak:.6}"));
            data.meta("peak_re", format!("{:.6}", at.re));
            data.meta("peak_im", format!("{:.6}", at.im));
            for (i, &re) in grid.re_axis.iter().enumerate() {
                for (j, &im) in grid.im_axis.iter().enumerate() {
                    data.push(vec![
                        Cell::Float(re),
                        Cell::Float(im),
                        Cell::Float(grid.value(i, j)),
                    ]);
                }
            }
            Ok(data)
        })
        .collect::<CliResult<_>>()?;

    for panel in panels {
        panel.write(out_dir, format)?;
    }
    Ok(())
}

pub fn fig8(out_dir: &Path, format: Format, sweep: &AmpSweep) -> CliResult<()> {
    snr_figure(out_dir, format, sweep, "fig8", false)
}

pub fn fig9(out_dir: &Path, format: Format, sweep: &AmpSweep) -> CliResult<()> {
    snr_figure(out_dir, format, sweep, "fig9", true)
}

fn snr_figure(
    out_dir: &Path,
    format: Format,
    sweep: &AmpSweep,
    name: &str,
    number_based: bool,
) -> CliResult<()> {
    let alphas = sweep.alphas()?;
    validate_cutoff(sweep, &alphas)?;
    let spec = AmplifierSpec::new(sweep.g(), sweep.n_cap(), 0).map_err(usage)?;
    let g = sweep.g();

    // The phase reference is undefined at ᾱ = 0, so that grid point is
    // dropped from the sweep.
    let rows: Vec<Vec<Cell>> = alphas
        .par_iter()
        .filter(|&&a| a > 0.0)
        .map(|&abar| -> CliResult<Vec<Cell>> {
            let cutoff = sweep
                .cutoff_override()
                .unwrap_or_else(|| spec.default_apply_cutoff(abar));
            let report = snr_report_with_cutoff(&spec, abar, cutoff).map_err(usage)?;
            Ok(if number_based {
                vec![
                    Cell::Float(abar),
                    Cell::Float(abar),
                    Cell::Float(g * abar),
                    Cell::Float(report.snr_n),
                    Cell::Float(report.root_p_snr_n),
                    Cell::Float(report.p),
                ]
            } else {
                vec![
                    Cell::Float(abar),
                    Cell::Float(snr_resolvability_bound(abar)),
                    Cell::Float(snr_resolvability_bound(g * abar)),
                    Cell::Float(report.snr1),
                    Cell::Float(report.snr2),
                    Cell::Float(report.root_p_snr1),
                    Cell::Float(report.root_p_snr2),
                    Cell::Float(report.p),
                ]
            })
        })
        .collect::<CliResult<_>>()?;

    let columns = if number_based {
        vec![
            "alpha",
            "snr_n_input",
            "snr_n_target",
            "snr_n_out",
            "root_p_snr_n",
            "p",
        ]
    } else {
        vec![
            "alpha",
            "snr_input",
            "snr_target",
            "snr1_out",
            "snr2_out",
            "root_p_snr1",
            "root_p_snr2",
            "p",
        ]
    };
    let mut data = Dataset::new(name, columns);
    annotate(&mut data, sweep);
    for row in rows {
        data.push(row);
    }
    data.write(out_dir, format)?;
    Ok(())
}

fn validate_cutoff(sweep: &AmpSweep, alphas: &[f64]) -> CliResult<()> {
    if let Some(c) = sweep.cutoff_override() {
        let spec = AmplifierSpec::new(sweep.g(), sweep.n_cap(), 0).map_err(usage)?;
        let auto = alphas
            .iter()
            .map(|&a| spec.default_apply_cutoff(a))
            .max()
            .unwrap_or(0);
        if c < auto {
            return Err(CliError::Usage(format!(
                "--cutoff {c} undercuts the automatic rule {auto}"
            )));
        }
    }
    Ok(())
}

fn annotate(data: &mut Dataset, sweep: &AmpSweep) {
    data.meta("g", sweep.g());
    data.meta("n_cap", sweep.n_cap());
    let alphas = sweep.alphas().expect("validated by caller");
    data.meta("alpha_min", alphas[0]);
    data.meta("alpha_max", alphas[alphas.len() - 1]);
    data.meta("alpha_steps", alphas.len());
    if let Some(c) = sweep.cutoff_override() {
        data.meta("cutoff", c);
    }
}

fn usage(e: immaculate::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn join_usize(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
