use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use nlslab_core::measure::{
    bourgain_budget, liouville_check, log_growth_bound, monotonicity_experiment, poincare_recurrence,
    power_inequality_scan, rn_discrete, DiscreteMeasure, EventPredicate, MonotonicityVerdict, RecurrenceMap,
    RecurrenceSet, WeightedEnsemble,
};
use nlslab_core::random::{equivalence_diagnostic, smoothing_tail_experiment};
use nlslab_core::stats::quantile;
use nlslab_core::{BasisTable, CoefficientLaw};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{float, Check, Csv, Outcome};

/// Quantiles of the run's own sup norms used when no tail radii are given.
const TAIL_QUANTILES: [f64; 6] = [0.3, 0.5, 0.7, 0.9, 0.97, 0.99];

pub(super) fn monotonicity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ens = WeightedEnsemble::new(cfg.p, cfg.modes, cfg.samples, cfg.stream())?.with_beta(cfg.beta)?;
    let template = EventPredicate::LpBall { p: cfg.p + 1.0, radius: 1.0 };
    let radius = match cfg.radius {
        Some(r) => r,
        None => ens.median_radius(&template, cfg.pilot)?,
    };
    let event = template.with_radius(radius)?;
    let rep = monotonicity_experiment(&ens, cfg.t, &event, &cfg.solver()?)?;
    let mut csv = Csv::new(&["quantity", "value", "stderr"]);
    for (name, v, e) in [
        ("lhs", rep.lhs, rep.stderr_lhs),
        ("rhs", rep.rhs, rep.stderr_rhs),
        ("nu_t", rep.event_estimate.value, rep.event_estimate.stderr),
    ] {
        csv.cells(&[name.to_string(), float(v), float(e)]);
    }
    let holds = rep.verdict == Some(MonotonicityVerdict::Holds);
    let mut out = Outcome::new(&rep, csv).check(Check::flag("verdict_holds", holds));
    out.report["radius"] = json!(radius);
    if rep.pullback.flagged {
        out.warnings.push(format!("{} pullback samples failed", rep.pullback.failed));
    }
    Ok(out)
}

pub(super) fn equivalence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = cfg.coefficient_law()?;
    let b = CoefficientLaw::parse(&cfg.law_b)?;
    let rep = equivalence_diagnostic(&a, &b, cfg.terms)?;
    let mut csv = Csv::new(&["n", "ratio_partial_sum", "log_partial_sum"]);
    for (n, (r, l)) in rep.ratio_partial_sums.iter().zip(&rep.log_partial_sums).enumerate() {
        csv.cells(&[n.to_string(), float(*r), float(*l)]);
    }
    let mut out = Outcome::new(&rep, csv);
    out.report["laws"] = json!([a, b]);
    Ok(out)
}

pub(super) fn tails(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let basis = BasisTable::collocation(cfg.modes)?;
    let run = |radii: &[f64]| smoothing_tail_experiment(cfg.sigma, radii, &basis, cfg.samples, cfg.time_points, cfg.stream());
    let rep = if cfg.radii.is_empty() {
        let pilot = run(&[])?;
        let radii: Vec<f64> = TAIL_QUANTILES.iter().map(|&q| quantile(&pilot.sup_norms, q)).collect();
        run(&radii)?
    } else {
        run(&cfg.radii)?
    };
    let mut csv = Csv::new(&["radius", "tail", "stderr", "exceedances"]);
    for p in &rep.points {
        csv.cells(&[float(p.radius), float(p.tail), float(p.stderr), p.exceedances.to_string()]);
    }
    let r_max = rep.points.iter().filter(|p| !p.censored).map(|p| p.radius).fold(0.0, f64::max);
    let slope = rep.slope().unwrap_or(f64::NAN);
    let out = Outcome::new(&rep, csv)
        .check(Check::at_most("slope", slope, 0.0))
        .check(Check::at_least("abs_slope_times_r_max_sq", slope.abs() * r_max * r_max, 3.0));
    Ok(out)
}

fn read_measure(path: Option<&Path>, which: &str) -> Result<DiscreteMeasure, CliError> {
    let path = path.ok_or_else(|| CliError::Usage(format!("--{which} <csv> is required")))?;
    let file = File::open(path).map_err(|e| CliError::Usage(format!("opening {}: {e}", path.display())))?;
    Ok(DiscreteMeasure::from_csv(BufReader::new(file))?)
}

pub(super) fn rn(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mu = read_measure(cfg.mu.as_deref(), "mu")?;
    let nu = read_measure(cfg.nu.as_deref(), "nu")?;
    let rep = rn_discrete(&mu, &nu, &cfg.weak_p)?;
    let mut csv = Csv::new(&["atom", "mu", "nu", "density"]);
    for (i, f) in rep.density.iter().enumerate() {
        csv.cells(&[i.to_string(), float(mu.atoms()[i]), float(nu.atoms()[i]), float(*f)]);
    }
    Ok(Outcome::new(&rep, csv))
}

pub(super) fn power_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mu = read_measure(cfg.mu.as_deref(), "mu")?;
    let nu = read_measure(cfg.nu.as_deref(), "nu")?;
    let rep = power_inequality_scan(&mu, &nu, cfg.alpha)?;
    let mut csv = Csv::new(&["atom", "mu", "nu", "in_witness"]);
    for i in 0..mu.len() {
        let w = rep.witness.contains(&i);
        csv.cells(&[i.to_string(), float(mu.atoms()[i]), float(nu.atoms()[i]), w.to_string()]);
    }
    Ok(Outcome::new(&rep, csv))
}

pub(super) fn bourgain(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.bourgain_radii.is_empty() {
        return Err(CliError::Usage("--R needs at least one radius".into()));
    }
    let budgets = cfg
        .bourgain_radii
        .iter()
        .map(|&r| bourgain_budget(cfg.kappa, cfg.c, cfg.big_c, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["R", "tau", "T", "steps", "union_bound", "target", "ratio", "norm_level"]);
    for b in &budgets {
        csv.row(&[b.radius, b.tau, b.horizon, b.steps, b.union_bound, b.target, b.ratio, b.norm_level]);
    }
    let growth: Vec<(f64, f64)> = [1.0, std::f64::consts::E, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&t| (t, log_growth_bound(cfg.big_c, t)))
        .collect();
    let mut out = Outcome::new(json!({ "budgets": budgets, "growth_curve": growth }), csv);
    for b in budgets.iter().filter(|b| b.degenerate) {
        out.warnings.push(format!("R = {}: one local step covers the horizon", b.radius));
    }
    if budgets.len() > 1 {
        let decreasing = budgets.windows(2).all(|w| w[1].ratio < w[0].ratio);
        out = out.check(Check::flag("ratio_decreasing", decreasing));
    }
    Ok(out)
}

fn parse_numbers(spec: &str, body: &str, sep: char, count: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = body
        .split(sep)
        .map(|x| x.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad numbers in '{spec}'")))?;
    if v.len() != count {
        return Err(CliError::Usage(format!("'{spec}' needs {count} numbers")));
    }
    Ok(v)
}

fn parse_map(spec: &str) -> Result<RecurrenceMap, CliError> {
    match spec {
        "golden" => Ok(RecurrenceMap::GoldenRotation),
        "oscillator" => Ok(RecurrenceMap::OscillatorTimeOne),
        _ => {
            let body = spec
                .strip_prefix("rational:")
                .ok_or_else(|| CliError::Usage(format!("unknown map '{spec}' (rational:<a>/<b>, golden, oscillator)")))?;
            let (a, b) = body
                .split_once('/')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| CliError::Usage(format!("bad rotation '{spec}'")))?;
            Ok(RecurrenceMap::RationalRotation { numerator: a, denominator: b })
        }
    }
}

fn parse_set(spec: &str) -> Result<RecurrenceSet, CliError> {
    if spec == "full" {
        return Ok(RecurrenceSet::FullCircle);
    }
    if let Some(body) = spec.strip_prefix("arc:") {
        let v = parse_numbers(spec, body, ':', 2)?;
        return Ok(RecurrenceSet::Arc { start: v[0], length: v[1] });
    }
    if let Some(body) = spec.strip_prefix("ball:") {
        let v = parse_numbers(spec, body, ':', 3)?;
        return Ok(RecurrenceSet::Ball { x: v[0], v: v[1], radius: v[2] });
    }
    Err(CliError::Usage(format!("unknown set '{spec}' (arc:<start>:<length>, ball:<x>:<v>:<r>, full)")))
}

pub(super) fn classical(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let liouville = liouville_check(cfg.field, cfg.density, cfg.samples, cfg.stream())?;
    let map = parse_map(&cfg.map)?;
    let set = parse_set(&cfg.set)?;
    let recurrence = poincare_recurrence(map, set, cfg.n_max, cfg.samples, cfg.stream().offset(1 << 32))?;
    let mut csv = Csv::new(&["point", "return_time"]);
    for (k, r) in recurrence.return_times.iter().enumerate() {
        let r = r.map_or(String::new(), |n| n.to_string());
        csv.cells(&[k.to_string(), r]);
    }
    Ok(Outcome::new(
        json!({ "field": cfg.field, "density": cfg.density, "liouville": liouville, "map": map, "set": set, "recurrence": recurrence }),
        csv,
    ))
}
