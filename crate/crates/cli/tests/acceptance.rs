//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in `KNOWN_FAILURES`.
//!
//! Run with `cargo test -p nlslab-cli --test acceptance`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nlslab_core::evolution::{
    decay_experiment, energy_derivative_check, linear_free, linear_harmonic, scattering_experiment, EnsembleSpec,
    FlatSolver, HarmonicSolver,
};
use nlslab_core::lens::{harmonic_time, lens_inverse};
use nlslab_core::measure::{
    bourgain_budget, liouville_check, monotonicity_experiment, poincare_recurrence, power_inequality_scan,
    rn_discrete, Density, DiscreteMeasure, EventPredicate, MonotonicityVerdict, RecurrenceMap, RecurrenceSet,
    VectorField, WeightedEnsemble,
};
use nlslab_core::random::{equivalence_diagnostic, sample, smoothing_tail_experiment, Verdict};
use nlslab_core::spectral::box_lp_norm;
use nlslab_core::stats::quantile;
use nlslab_core::{BasisTable, BoxGrid, CoefficientLaw, Complex64, Geometry, GridState, SampleStream, SolverConfig, SpectralState};
use rand::Rng;

/// Criteria that cannot pass as stated; they still run and report FAIL.
const KNOWN_FAILURES: [u32; 1] = [13];

/// Close enough to the lens singularity to reach s = 50.
const LATE_T_CAP: f64 = FRAC_PI_4 - 0.004;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn mu0(modes: usize, seed: u64) -> SpectralState {
    sample(&CoefficientLaw::Mu0, modes, SampleStream::new(seed, 0)).unwrap()
}

fn smooth_data(modes: usize, seed: u64, amplitude: f64, decay: f64) -> SpectralState {
    let alpha: Vec<f64> = (0..modes).map(|n| amplitude * (-(n as f64) / decay).exp()).collect();
    sample(&CoefficientLaw::Custom { alpha }, modes, SampleStream::new(seed, 0)).unwrap()
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..points).map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64)).collect();
    v[points - 1] = hi;
    v
}

fn basis_fidelity() -> Outcome {
    let basis = BasisTable::build(128, 256).unwrap();
    let mut gram: f64 = 0.0;
    for n in 0..128 {
        for m in 0..=n {
            let ip: f64 = basis.row(n).iter().zip(basis.row(m)).zip(basis.weights()).map(|((a, b), w)| a * b * w).sum();
            gram = gram.max((ip - if n == m { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut trip: f64 = 0.0;
    for seed in 0..10 {
        let u = mu0(128, seed);
        trip = trip.max(basis.analyze(&basis.synthesize(&u).unwrap()).unwrap().distance(&u));
    }
    outcome(gram <= 1e-10 && trip <= 1e-10, format!("gram {gram:.2e}, round trip {trip:.2e}"))
}

fn half_period() -> Outcome {
    let mut err: f64 = 0.0;
    for seed in 0..20 {
        let u = mu0(128, seed);
        let minus: Vec<Complex64> = u.coeffs().iter().map(|c| -c).collect();
        err = err.max(max_diff(linear_harmonic(&u, PI).coeffs(), &minus));
    }
    outcome(err <= 1e-12, format!("max |exp(-i pi H) u + u| = {err:.2e}"))
}

fn free_gaussian() -> Outcome {
    let grid = BoxGrid::new(40.0, 4096).unwrap();
    let start = GridState::from_fn(grid, |y| Complex64::new((-0.5 * y * y).exp(), 0.0));
    let mut worst: f64 = 0.0;
    for s in [0.5, 1.0, 2.0] {
        let d = Complex64::new(1.0, 2.0 * s);
        let exact: Vec<Complex64> = grid.xs().iter().map(|&y| d.powf(-0.5) * (-(y * y) / (2.0 * d)).exp()).collect();
        worst = worst.max(max_diff(linear_free(&start, s).unwrap().values(), &exact));
    }
    outcome(worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn terminal(u0: &SpectralState, cfg: &SolverConfig, t1: f64) -> (SpectralState, f64) {
    let rec = HarmonicSolver::new(u0.len(), cfg.clone()).unwrap().solve(u0, 0.0, t1).unwrap();
    (rec.last_state().unwrap().clone(), rec.mass_drift())
}

fn solver_order() -> Outcome {
    let u0 = mu0(64, 11);
    let mut pass = true;
    let mut drift: f64 = 0.0;
    let mut parts = Vec::new();
    for p in [3.0, 5.0] {
        let run = |dt: f64| {
            let cfg = SolverConfig { theta: 0.5, record_every: 50, ..SolverConfig::default().with_p(p).with_dt(dt) };
            terminal(&u0, &cfg, 0.5)
        };
        let (a, da) = run(0.005);
        let (b, db) = run(0.0025);
        let (c, dc) = run(0.00125);
        let ratio = a.distance(&b) / b.distance(&c);
        drift = drift.max(da).max(db).max(dc);
        pass &= (3.5..=4.5).contains(&ratio);
        parts.push(format!("p={p} ratio {ratio:.3}"));
    }
    pass &= drift <= 1e-10;
    outcome(pass, format!("{}, mass drift {drift:.2e}", parts.join(", ")))
}

fn energy_identity() -> Outcome {
    let u0 = smooth_data(64, 8, 1.0, 3.0);
    let residual = |p: f64, dt: f64, u: &SpectralState| {
        let solver = HarmonicSolver::new(64, SolverConfig::default().with_p(p).with_dt(dt)).unwrap();
        let rec = solver.solve(u, 0.0, 0.5).unwrap();
        energy_derivative_check(&rec, p).unwrap().max_residual
    };
    let (a, b) = (residual(3.0, 1e-3, &u0), residual(3.0, 5e-4, &u0));
    let zero = residual(5.0, 1e-3, &smooth_data(64, 2, 0.5, 3.0));
    // Halving dt should cut a second-order residual by about four.
    let pass = a <= 5e-4 && a / b >= 3.0 && zero <= 1e-6;
    outcome(pass, format!("p=3 residual {a:.2e} -> {b:.2e} (ratio {:.2}), p=5 residual {zero:.2e}", a / b))
}

fn dual_route() -> Outcome {
    let u0 = smooth_data(128, 21, 1.0, 2.0);
    let grid = BoxGrid::default();
    let flat0 = lens_inverse(&u0, 0.0, &Geometry::PeriodicBox(grid)).unwrap();
    let mut worst: f64 = 0.0;
    for p in [3.0, 5.0, 7.0] {
        for s in [0.5, 1.0, 2.0] {
            let cfg = SolverConfig { record_every: 100, ..SolverConfig::default().with_p(p).with_dt(1e-3) };
            let flat = FlatSolver::new(cfg.clone()).unwrap().solve(&flat0, 0.0, s).unwrap();
            let t = harmonic_time(s);
            let harm = HarmonicSolver::new(128, cfg).unwrap().solve(&u0, 0.0, t).unwrap();
            let via = lens_inverse(harm.last_state().unwrap(), t, &Geometry::PeriodicBox(grid)).unwrap();
            let d: Vec<Complex64> =
                flat.last_state().unwrap().values().iter().zip(via.values()).map(|(a, b)| a - b).collect();
            worst = worst.max(box_lp_norm(&d, &grid, 2.0));
        }
    }
    outcome(worst <= 1e-4, format!("max L2 gap {worst:.2e}"))
}

fn monotonicity_grid() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let solver = SolverConfig::default();
    for p in [3.0, 5.0, 7.0] {
        let ens = WeightedEnsemble::new(p, 8, 10_000, SampleStream::new(77, 0)).unwrap();
        let template = EventPredicate::LpBall { p: p + 1.0, radius: 1.0 };
        let event = template.with_radius(ens.median_radius(&template, 2000).unwrap()).unwrap();
        let zero = monotonicity_experiment(&ens, 0.0, &event, &solver).unwrap();
        pass &= zero.lhs == zero.rhs;
        let mut holds = 0;
        for t in [0.1, 0.3, FRAC_PI_8] {
            let rep = monotonicity_experiment(&ens, t, &event, &solver).unwrap();
            if rep.verdict == Some(MonotonicityVerdict::Holds) {
                holds += 1;
            } else {
                pass = false;
            }
        }
        parts.push(format!("p={p}: {holds}/3 hold, t=0 gap {:e}", zero.lhs - zero.rhs));
    }
    outcome(pass, parts.join("; "))
}

fn late_config(p: f64) -> SolverConfig {
    SolverConfig { t_cap: LATE_T_CAP, record_every: 10, ..SolverConfig::default().with_p(p) }
}

fn decay() -> Outcome {
    let ens = EnsembleSpec { modes: 64, samples: 8, stream: SampleStream::new(0, 0) };
    let rep = decay_experiment(&CoefficientLaw::Mu0, &geometric(5.0, 50.0, 16), ens, &late_config(5.0)).unwrap();
    let err = (rep.exponent + 1.0 / 3.0).abs();
    let pass = err <= 0.1 && rep.failures.is_empty();
    outcome(pass, format!("exponent {:.4} (target -1/3), {} failures", rep.exponent, rep.failures.len()))
}

fn scattering() -> Outcome {
    let s_grid = geometric(1.0, 50.0, 16);
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let u0 = mu0(32, seed);
        let rep = scattering_experiment(&u0, &s_grid, &late_config(5.0), BoxGrid::default()).unwrap();
        pass &= rep.tail_monotone;
        parts.push(format!("seed {seed} monotone {}", rep.tail_monotone));
    }
    let lin = SolverConfig { coupling: 0.0, ..late_config(5.0) };
    let w = scattering_experiment(&mu0(32, 0), &s_grid, &lin, BoxGrid::default()).unwrap().w_plus_norm;
    pass &= w <= 1e-10;
    outcome(pass, format!("{}; linear W+ {w:.2e}", parts.join(", ")))
}

fn discrete_rn() -> Outcome {
    let mut rng = SampleStream::new(2024, 0).rng();
    let (mut sup_ok, mut weak_ok) = (0, 0);
    let total = 1000;
    for k in 0..total {
        let m = rng.random_range(1..=12);
        let mu: Vec<f64> = (0..m).map(|_| rng.random_range(0..=20) as f64).collect();
        let nu: Vec<f64> = (0..m).map(|_| rng.random_range(1..=20) as f64).collect();
        let (mu, nu) = (DiscreteMeasure::new(mu).unwrap(), DiscreteMeasure::new(nu).unwrap());
        if k % 2 == 0 {
            let sup = rn_discrete(&mu, &nu, &[]).unwrap().sup;
            sup_ok += usize::from(power_inequality_scan(&mu, &nu, 1.0).unwrap().best_c == sup);
        } else {
            let a = rng.random_range(0.05..0.95);
            let p = 1.0 / (1.0 - a);
            let c = power_inequality_scan(&mu, &nu, a).unwrap().best_c;
            let weak = rn_discrete(&mu, &nu, &[p]).unwrap().weak_lp[0].constant;
            let ok = weak <= c.powf(p) * (1.0 + 1e-12) && c <= p / (p - 1.0) * weak.powf(1.0 / p) * (1.0 + 1e-12);
            weak_ok += usize::from(ok);
        }
    }
    let half = total / 2;
    outcome(sup_ok == half && weak_ok == half, format!("alpha=1 exact {sup_ok}/{half}, weak-Lp both ways {weak_ok}/{half}"))
}

fn equivalence_pairs() -> Outcome {
    let cases = [
        (CoefficientLaw::Mu0, CoefficientLaw::Mu0, Verdict::Equivalent),
        (CoefficientLaw::Mu0, CoefficientLaw::parse("scaled:2").unwrap(), Verdict::Singular),
        (CoefficientLaw::Mu0, CoefficientLaw::Shifted, Verdict::Equivalent),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, b, want) in cases {
        let got = equivalence_diagnostic(&a, &b, 4096).unwrap().verdict;
        pass &= got == want;
        parts.push(format!("{got:?}"));
    }
    outcome(pass, parts.join(", "))
}

fn tails() -> Outcome {
    let basis = BasisTable::collocation(64).unwrap();
    let stream = SampleStream::new(0, 0);
    let pilot = smoothing_tail_experiment(0.1, &[], &basis, 10_000, 64, stream).unwrap();
    let radii: Vec<f64> = [0.3, 0.5, 0.7, 0.9, 0.97, 0.99].iter().map(|&q| quantile(&pilot.sup_norms, q)).collect();
    let rep = smoothing_tail_experiment(0.1, &radii, &basis, 10_000, 64, stream).unwrap();
    let slope = rep.slope().unwrap_or(f64::NAN);
    let r_max = rep.points.iter().filter(|p| !p.censored).map(|p| p.radius).fold(0.0, f64::max);
    let score = slope.abs() * r_max * r_max;
    outcome(slope < 0.0 && score > 3.0, format!("slope {slope:.4}, |slope| R_max^2 = {score:.3}"))
}

fn bourgain() -> Outcome {
    let ratios: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&r| bourgain_budget(2.0, 1.0, 1.0, r).unwrap().ratio).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    outcome(decreasing, format!("ratios {:.4e} {:.4e} {:.4e}", ratios[0], ratios[1], ratios[2]))
}

fn classical() -> Outcome {
    let stream = SampleStream::new(5, 0);
    let ham_u = liouville_check(VectorField::HarmonicOscillator, Density::Uniform, 2000, stream).unwrap();
    let ham_g = liouville_check(VectorField::HarmonicOscillator, Density::Gaussian, 2000, stream).unwrap();
    let exp = liouville_check(VectorField::Expanding, Density::Uniform, 2000, stream).unwrap();
    let residual = ham_u.max_divergence_residual.max(ham_g.max_divergence_residual);
    let vol = exp.volume_factor / (2.0f64).exp() - 1.0;
    let map = RecurrenceMap::RationalRotation { numerator: 1, denominator: 7 };
    let rec = poincare_recurrence(map, RecurrenceSet::Arc { start: 0.0, length: 0.1 }, 100, 500, stream).unwrap();
    let all_seven = rec.return_times.iter().all(|r| *r == Some(7));
    let pass = residual <= 1e-6 && vol.abs() <= 0.01 && all_seven;
    outcome(pass, format!("Liouville residual {residual:.2e}, volume factor / e^2 - 1 = {vol:.2e}, returns at 7: {all_seven}"))
}

fn run_cli(dir: &Path, threads: usize, args: &[&str]) -> bool {
    let status = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .args(args)
        .args(["--threads", &threads.to_string(), "--out"])
        .arg(dir)
        .output()
        .expect("spawn nlslab");
    status.status.code().is_some_and(|c| c == 0 || c == 3)
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["monotonicity", "--p", "5", "--modes", "8", "--samples", "2000", "--pilot", "500", "--seed", "3"],
        &["decay", "--modes", "32", "--samples", "4", "--t-cap", "0.781", "--s-points", "6", "--seed", "4"],
        &["tails", "--modes", "32", "--samples", "1000", "--time-points", "16", "--seed", "5"],
        &["sample", "--modes", "16", "--samples", "500", "--seed", "6"],
        &["classical", "--samples", "300", "--seed", "7"],
    ];
    let mut pass = true;
    let mut checked = 0;
    for args in runs {
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in [1, 2, 8] {
            let dir = tempfile::tempdir().unwrap();
            if !run_cli(dir.path(), threads, args) {
                pass = false;
                continue;
            }
            let tree = read_tree(dir.path());
            match &reference {
                None => reference = Some(tree),
                Some(r) => {
                    pass &= *r == tree;
                    checked += tree.len();
                }
            }
        }
    }
    outcome(pass, format!("{} commands, {checked} files compared against the single-thread run", runs.len()))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 15] = [
        (1, "basis fidelity", Duration::from_secs(5), basis_fidelity),
        (2, "half-period parity", Duration::from_secs(1), half_period),
        (3, "free Gaussian oracle", Duration::from_secs(5), free_gaussian),
        (4, "solver order", Duration::from_secs(30), solver_order),
        (5, "energy identity", Duration::from_secs(60), energy_identity),
        (6, "lens dual route", Duration::from_secs(120), dual_route),
        (7, "monotonicity grid", Duration::from_secs(600), monotonicity_grid),
        (8, "decay exponent", Duration::from_secs(600), decay),
        (9, "scattering", Duration::from_secs(600), scattering),
        (10, "discrete density bounds", Duration::from_secs(60), discrete_rn),
        (11, "equivalence pairs", Duration::from_secs(1), equivalence_pairs),
        (12, "smoothing tails", Duration::from_secs(300), tails),
        (13, "budget ratio", Duration::from_secs(1), bourgain),
        (14, "classical lab", Duration::from_secs(10), classical),
        (15, "thread reproducibility", Duration::from_secs(120), reproducibility),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= budget;
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_FAILURES.contains(&id) { " [known]" } else { "" };
        println!(
            "{tag} AC {id:>2} {name}: {} ({:.2} s, budget {} s){known}",
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
