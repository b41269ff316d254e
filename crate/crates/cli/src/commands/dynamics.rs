use nlslab_core::evolution::{
    decay_experiment, dispersion_check, energy_derivative_check, localized_decay_experiment, norm_growth_experiment,
    scattering_experiment, Cutoff, EnsembleSpec, FlatSolver, HarmonicSolver, BOUNDARY_WARN,
};
use nlslab_core::random::io::{write_header, write_record, EnsembleHeader};
use nlslab_core::spectral::evaluate_expansion;
use nlslab_core::{Geometry, GridState, SpectralState};
use serde_json::json;

use super::{initial_state, tail_warning};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Check, Csv, Outcome};

/// Largest mass drift accepted from a conservative run.
const MASS_TOL: f64 = 1e-10;

fn ensemble_spec(cfg: &RunConfig) -> Result<EnsembleSpec, CliError> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("need at least one sample".into()));
    }
    Ok(EnsembleSpec { modes: cfg.modes, samples: cfg.samples, stream: cfg.stream() })
}

fn on_box(u: &SpectralState, cfg: &RunConfig) -> Result<GridState, CliError> {
    let grid = cfg.box_grid()?;
    Ok(GridState::new(evaluate_expansion(u.coeffs(), &grid.xs()), Geometry::PeriodicBox(grid)))
}

fn states_file(states: &[SpectralState], law_id: u64, seed: u64) -> Result<Vec<u8>, CliError> {
    let modes = states.first().map_or(0, |s| s.len()) as u64;
    let io = |e: std::io::Error| CliError::Numerical(e.to_string());
    let mut bin = Vec::new();
    write_header(&mut bin, &EnsembleHeader { modes, law_id, seed }).map_err(io)?;
    for (k, u) in states.iter().enumerate() {
        write_record(&mut bin, k as u64, u).map_err(io)?;
    }
    Ok(bin)
}

pub(super) fn evolve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let u0 = initial_state(cfg)?;
    let solver_cfg = cfg.solver()?;
    match cfg.geometry.as_str() {
        "harmonic" => {
            let solver = HarmonicSolver::new(cfg.modes, solver_cfg)?;
            let traj = solver.solve(&u0, 0.0, cfg.t)?;
            let energy_residual = if traj.len() >= 3 {
                energy_derivative_check(&traj, cfg.p).ok().map(|r| r.max_residual)
            } else {
                None
            };
            let last = traj.last_state().expect("trajectory has the initial record");
            let drift = traj.mass_drift();
            let mut out = Outcome::new(
                json!({
                    "geometry": "harmonic",
                    "final_time": traj.times.last(),
                    "records": traj.len(),
                    "mass_drift": drift,
                    "energy_derivative_residual": energy_residual,
                    "final_tail_mass_fraction": last.tail_mass_fraction(),
                    "states_file": "evolve.bin",
                }),
                Csv::from_text(traj.to_csv()),
            )
            .check(Check::at_most("mass_drift", drift, MASS_TOL));
            out.warnings.extend(tail_warning(last, "final state"));
            let law_id = cfg.coefficient_law().map(|l| l.id()).unwrap_or(u64::MAX);
            out.extra.push(("evolve.bin".into(), states_file(&traj.states, law_id, cfg.seed)?));
            Ok(out)
        }
        "flat" => {
            let solver = FlatSolver::new(solver_cfg)?;
            let traj = solver.solve(&on_box(&u0, cfg)?, 0.0, cfg.t)?;
            let drift = traj.mass_drift();
            let mut out = Outcome::new(
                json!({
                    "geometry": "flat",
                    "final_time": traj.times.last(),
                    "records": traj.len(),
                    "mass_drift": drift,
                }),
                Csv::from_text(traj.to_csv()),
            )
            .check(Check::at_most("mass_drift", drift, MASS_TOL));
            out.warnings.extend(traj.warnings.iter().cloned());
            Ok(out)
        }
        other => Err(CliError::Usage(format!("unknown geometry '{other}' (expected harmonic or flat)"))),
    }
}

pub(super) fn decay(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s_grid = cfg.s_grid()?;
    let rep = decay_experiment(&cfg.coefficient_law()?, &s_grid, ensemble_spec(cfg)?, &cfg.solver()?)?;
    let mut csv = Csv::new(&["s", "geometric_mean", "min", "max"]);
    for (j, s) in s_grid.iter().enumerate() {
        let col: Vec<f64> = rep.curves.iter().map(|c| c[j]).collect();
        let gm = (col.iter().map(|v| v.ln()).sum::<f64>() / col.len().max(1) as f64).exp();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        csv.row(&[*s, gm, lo, hi]);
    }
    let err = (rep.exponent - rep.target).abs();
    let mut out = Outcome::new(&rep, csv).check(Check::at_most("exponent_error", err, 0.1));
    if !rep.failures.is_empty() {
        out.warnings.push(format!("{} samples failed and were excluded", rep.failures.len()));
    }
    Ok(out)
}

pub(super) fn scatter(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let u0 = initial_state(cfg)?;
    let s_grid = cfg.s_grid()?;
    let rep = scattering_experiment(&u0, &s_grid, &cfg.solver()?, cfg.box_grid()?)?;
    let mut csv = Csv::new(&["s", "profile_norm", "cauchy_residual"]);
    for ((s, v), r) in s_grid.iter().zip(&rep.profile_norms).zip(&rep.cauchy_residuals) {
        csv.row(&[*s, *v, *r]);
    }
    let mut out = Outcome::new(&rep, csv);
    if cfg.coupling == 0.0 {
        out = out.check(Check::at_most("linear_w_plus", rep.w_plus_norm, 1e-10));
    } else if rep.scattering_expected {
        out = out.check(Check::flag("cauchy_residuals_decrease", rep.tail_monotone));
    }
    out.warnings.extend(tail_warning(&rep.w_plus, "scattering profile"));
    Ok(out)
}

pub(super) fn dispersion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let phi = on_box(&initial_state(cfg)?, cfg)?;
    let s_grid = cfg.s_grid()?;
    let rep = dispersion_check(&phi, cfg.p, &s_grid)?;
    let mut csv = Csv::new(&["s", "ratio"]);
    for (s, r) in s_grid.iter().zip(&rep.ratios) {
        csv.row(&[*s, *r]);
    }
    let mut out = Outcome::new(&rep, csv);
    if rep.max_boundary_mass > BOUNDARY_WARN {
        out.warnings.push(format!("boundary mass {:e} reached; the box is too small", rep.max_boundary_mass));
    }
    Ok(out)
}

pub(super) fn localized_decay(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let u0 = initial_state(cfg)?;
    let chi = Cutoff { plateau: cfg.plateau, transition: cfg.transition };
    let s_grid = cfg.s_grid()?;
    let rep = localized_decay_experiment(&u0, cfg.box_grid()?, cfg.sigma, chi, &s_grid)?;
    let mut csv = Csv::new(&["s", "localized_norm", "global_l2"]);
    for ((s, n), g) in s_grid.iter().zip(&rep.norms).zip(&rep.global_l2) {
        csv.row(&[*s, *n, *g]);
    }
    Ok(Outcome::new(&rep, csv))
}

pub(super) fn norm_growth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = norm_growth_experiment(
        &cfg.coefficient_law()?,
        cfg.s_max,
        cfg.s_points,
        cfg.norm_kind()?,
        ensemble_spec(cfg)?,
        &cfg.solver()?,
    )?;
    let mut csv = Csv::new(&["s", "median_norm"]);
    for (s, m) in rep.s_grid.iter().zip(&rep.median_curve) {
        csv.row(&[*s, *m]);
    }
    Ok(Outcome::new(&rep, csv))
}
