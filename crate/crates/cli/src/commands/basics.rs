use std::f64::consts::PI;

use nlslab_core::evolution::{linear_free, linear_harmonic, HarmonicSolver};
use nlslab_core::lens::{flat_time, lens_forward, lens_inverse};
use nlslab_core::random::io::{write_header, write_record, EnsembleHeader};
use nlslab_core::random::{ensemble, sample};
use nlslab_core::spectral::coherent_state;
use nlslab_core::stats::mean_stderr;
use nlslab_core::{BasisTable, Complex64, Geometry, GridState};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{float, Check, Csv, Outcome};

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(super) fn selftest(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let basis = BasisTable::build(cfg.modes, cfg.quad)?;
    let mut gram: f64 = 0.0;
    for n in 0..cfg.modes {
        for m in 0..=n {
            let ip: f64 = basis
                .row(n)
                .iter()
                .zip(basis.row(m))
                .zip(basis.weights())
                .map(|((a, b), w)| a * b * w)
                .sum();
            gram = gram.max((ip - if n == m { 1.0 } else { 0.0 }).abs());
        }
    }

    let u = sample(&cfg.coefficient_law()?, cfg.modes, cfg.stream())?;
    let round_trip = basis.analyze(&basis.synthesize(&u)?)?.distance(&u);
    let parity = max_diff(linear_harmonic(&u, PI).coeffs(), &u.coeffs().iter().map(|c| -c).collect::<Vec<_>>());

    let grid = cfg.box_grid()?;
    let start = GridState::from_fn(grid, |y| Complex64::new((-0.5 * y * y).exp(), 0.0));
    let s = 1.0;
    let free = linear_free(&start, s)?;
    let exact: Vec<Complex64> = grid
        .xs()
        .iter()
        .map(|&y| {
            let d = Complex64::new(1.0, 2.0 * s);
            d.powf(-0.5) * (-(y * y) / (2.0 * d)).exp()
        })
        .collect();
    let free_err = max_diff(free.values(), &exact);

    let smooth = coherent_state(Complex64::new(0.5, 0.0), 0.5, cfg.modes);
    let solver = HarmonicSolver::new(cfg.modes, cfg.solver()?)?;
    let t_end = 0.1f64.min(cfg.t_cap);
    let drift = solver.solve(&smooth, 0.0, t_end)?.mass_drift();

    let t = 0.3f64.min(cfg.t_cap);
    let flat = lens_inverse(&smooth, t, &Geometry::PeriodicBox(grid))?;
    let nodes = BasisTable::build(cfg.modes, 2 * cfg.modes)?;
    let back = lens_forward(&flat, flat_time(t)?, t, &nodes.geometry())?;
    let lens_err = max_diff(back.values(), nodes.synthesize(&smooth)?.values());

    let checks = vec![
        Check::at_most("orthonormality", gram, 1e-10),
        Check::at_most("transform_round_trip", round_trip, 1e-10),
        Check::at_most("half_period_parity", parity, 1e-12),
        Check::at_most("free_gaussian", free_err, 1e-8),
        Check::at_most("mass_drift", drift, 1e-10),
        Check::at_most("lens_round_trip", lens_err, 1e-8),
    ];
    let mut csv = Csv::new(&["check", "value", "threshold", "pass"]);
    for c in &checks {
        csv.cells(&[c.name.clone(), float(c.value), float(c.threshold), c.pass.to_string()]);
    }
    let mut out = Outcome::new(json!({ "modes": cfg.modes, "quad": cfg.quad }), csv);
    out.checks = checks;
    Ok(out)
}

pub(super) fn sample_ensemble(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("need at least one sample".into()));
    }
    let law = cfg.coefficient_law()?;
    let alphas = law.alphas(cfg.modes)?;
    let draws = ensemble(cfg.stream(), cfg.samples, |s| sample(&law, cfg.modes, s))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let mut bin = Vec::new();
    let header = EnsembleHeader { modes: cfg.modes as u64, law_id: law.id(), seed: cfg.seed };
    let io = |e: std::io::Error| CliError::Numerical(e.to_string());
    write_header(&mut bin, &header).map_err(io)?;
    for (k, u) in draws.iter().enumerate() {
        write_record(&mut bin, k as u64, u).map_err(io)?;
    }

    let mut csv = Csv::new(&["mode", "alpha_sq", "mean_sq", "stderr", "z"]);
    let mut max_z: f64 = 0.0;
    for (n, a) in alphas.iter().enumerate() {
        let sq: Vec<f64> = draws.iter().map(|u| u.coeffs()[n].norm_sqr()).collect();
        let (mean, err) = mean_stderr(&sq);
        let z = if err > 0.0 { (mean - a * a) / err } else { 0.0 };
        max_z = max_z.max(z.abs());
        csv.cells(&[n.to_string(), float(a * a), float(mean), float(err), float(z)]);
    }
    let mut out = Outcome::new(json!({ "law": law, "max_abs_z": max_z, "ensemble_file": "sample.bin" }), csv);
    out.extra.push(("sample.bin".into(), bin));
    Ok(out)
}
