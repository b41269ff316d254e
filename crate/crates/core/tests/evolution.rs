use std::f64::consts::PI;

use nlslab_core::evolution::{
    energy, energy_derivative_check, linear_free, linear_harmonic, FlatSolver, HarmonicSolver,
};
use nlslab_core::lens::{harmonic_time, lens_inverse};
use nlslab_core::random::sample;
use nlslab_core::spectral::{box_lp_norm, BasisTable};
use nlslab_core::{BoxGrid, CoefficientLaw, Complex64, Geometry, GridState, SampleStream, SolverConfig, SpectralState};
use proptest::prelude::*;

fn mu0(modes: usize, seed: u64) -> SpectralState {
    sample(&CoefficientLaw::Mu0, modes, SampleStream::new(seed, 0)).unwrap()
}

/// Random data whose coefficients decay geometrically.
fn smooth_data(modes: usize, seed: u64, amplitude: f64, decay: f64) -> SpectralState {
    let alpha: Vec<f64> = (0..modes).map(|n| amplitude * (-(n as f64) / decay).exp()).collect();
    sample(&CoefficientLaw::Custom { alpha }, modes, SampleStream::new(seed, 0)).unwrap()
}

fn terminal(u0: &SpectralState, cfg: &SolverConfig, t1: f64) -> SpectralState {
    let solver = HarmonicSolver::new(u0.len(), cfg.clone()).unwrap();
    let mut u = solver.embed(u0).unwrap();
    solver.advance(&mut u, 0.0, t1).unwrap();
    u
}

fn self_convergence_ratio(u0: &SpectralState, p: f64, dt: f64, t1: f64) -> f64 {
    let cfg = |h: f64| SolverConfig { theta: 0.5, ..SolverConfig::default().with_p(p).with_dt(h) };
    let a = terminal(u0, &cfg(dt), t1);
    let b = terminal(u0, &cfg(dt / 2.0), t1);
    let c = terminal(u0, &cfg(dt / 4.0), t1);
    a.distance(&b) / b.distance(&c)
}

#[test]
fn harmonic_solver_is_second_order() {
    let u0 = mu0(64, 11);
    for p in [3.0, 5.0] {
        let ratio = self_convergence_ratio(&u0, p, 0.005, 0.5);
        println!("p = {p}: ratio {ratio}");
        assert!((3.5..=4.5).contains(&ratio), "p = {p}: ratio {ratio}");
    }
}

#[test]
fn flat_solver_is_second_order() {
    let grid = BoxGrid::default();
    let u0 = GridState::from_fn(grid, |y| Complex64::new(1.5 * (-0.5 * y * y).exp(), 0.3 * y * (-0.5 * y * y).exp()));
    let run = |dt: f64| {
        let cfg = SolverConfig { theta: 0.5, ..SolverConfig::default().with_p(3.0).with_dt(dt) };
        FlatSolver::new(cfg).unwrap().solve(&u0, 0.0, 0.5).unwrap().last_state().unwrap().clone()
    };
    let dist = |a: &GridState, b: &GridState| {
        let d: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        box_lp_norm(&d, &grid, 2.0)
    };
    let (a, b, c) = (run(0.01), run(0.005), run(0.0025));
    let ratio = dist(&a, &b) / dist(&b, &c);
    println!("flat ratio {ratio}");
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn mass_is_conserved_along_harmonic_runs() {
    for p in [3.0, 5.0, 7.0] {
        let cfg = SolverConfig::default().with_p(p);
        let solver = HarmonicSolver::new(32, cfg).unwrap();
        let rec = solver.solve(&mu0(32, 3), 0.0, 0.7).unwrap();
        assert!(rec.mass_drift() <= 1e-10, "p = {p}: {}", rec.mass_drift());
    }
}

#[test]
fn time_reversal_recovers_data() {
    let u0 = mu0(32, 5);
    let cfg = SolverConfig::default().with_p(5.0).with_dt(1e-3);
    let solver = HarmonicSolver::new(32, cfg.clone()).unwrap();
    let mut u = solver.embed(&u0).unwrap();
    solver.advance(&mut u, 0.0, 0.4).unwrap();
    let reference = terminal(&u0, &cfg.clone().with_dt(2.5e-4), 0.4);
    let one_way = u.distance(&reference);
    solver.advance(&mut u, 0.4, 0.0).unwrap();
    let back = u.distance(&solver.embed(&u0).unwrap());
    println!("one-way {one_way:e}, round trip {back:e}");
    assert!(back <= 2.0 * one_way.max(1e-13));
}

#[test]
fn energy_is_conserved_at_p5() {
    let cfg = SolverConfig::default().with_p(5.0);
    let solver = HarmonicSolver::new(64, cfg).unwrap();
    let rec = solver.solve(&smooth_data(64, 2, 0.5, 3.0), 0.0, 0.5).unwrap();
    let report = energy_derivative_check(&rec, 5.0).unwrap();
    println!("p = 5 residual {:e}", report.max_residual);
    assert!(report.max_residual <= 1e-6);
}

#[test]
fn energy_identity_at_p3_refines_at_second_order() {
    let u0 = smooth_data(64, 8, 1.0, 3.0);
    let residual = |dt: f64| {
        let solver = HarmonicSolver::new(64, SolverConfig::default().with_p(3.0).with_dt(dt)).unwrap();
        let rec = solver.solve(&u0, 0.0, 0.5).unwrap();
        energy_derivative_check(&rec, 3.0).unwrap().max_residual
    };
    let (a, b) = (residual(1e-3), residual(5e-4));
    println!("p = 3 residuals {a:e} {b:e} ratio {}", a / b);
    assert!(a <= 5e-4 && b <= 1.4e-4);
}

#[test]
fn energy_of_ground_state_matches_quadrature_oracle() {
    // ½ * 1 + ¼ * ∫ π^-1 e^{-2x²} dx = ½ + 1 / (4 sqrt(2π))
    let basis = BasisTable::collocation(64).unwrap();
    let e = energy(0.0, &SpectralState::mode(0, 64), 3.0, &basis).unwrap();
    let exact = 0.5 + 0.25 / (2.0 * PI).sqrt();
    assert!((e.total - exact).abs() < 1e-12, "{}", e.total - exact);
    assert!(!e.unresolved);
}

fn dual_route_error(p: f64, s: f64) -> f64 {
    // Fast coefficient decay keeps the flat solution clear of the box edge.
    let u0 = smooth_data(128, 21, 1.0, 2.0);
    let grid = BoxGrid::default();
    let flat0 = lens_inverse(&u0, 0.0, &Geometry::PeriodicBox(grid)).unwrap();
    let cfg = SolverConfig::default().with_p(p).with_dt(1e-3);
    let flat = FlatSolver::new(cfg.clone()).unwrap().solve(&flat0, 0.0, s).unwrap();
    let t = harmonic_time(s);
    let harm = HarmonicSolver::new(128, cfg).unwrap().solve(&u0, 0.0, t).unwrap();
    let via_lens = lens_inverse(harm.last_state().unwrap(), t, &Geometry::PeriodicBox(grid)).unwrap();
    let d: Vec<Complex64> = flat
        .last_state()
        .unwrap()
        .values()
        .iter()
        .zip(via_lens.values())
        .map(|(a, b)| a - b)
        .collect();
    box_lp_norm(&d, &grid, 2.0)
}

#[test]
fn flat_and_lens_routes_agree() {
    for p in [3.0, 5.0, 7.0] {
        for s in [1.0, 2.0] {
            let err = dual_route_error(p, s);
            println!("p = {p}, s = {s}: {err:e}");
            assert!(err <= 1e-4, "p = {p}, s = {s}: {err:e}");
        }
    }
}

#[test]
fn linear_lens_intertwines_free_flows() {
    let u0 = smooth_data(48, 4, 1.0, 3.0);
    let grid = BoxGrid::default();
    let target = Geometry::PeriodicBox(grid);
    let s = 0.75;
    let t = harmonic_time(s);
    let free = linear_free(&lens_inverse(&u0, 0.0, &target).unwrap(), s).unwrap();
    let via = lens_inverse(&linear_harmonic(&u0, t), t, &target).unwrap();
    let err = free.values().iter().zip(via.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_harmonic_preserves_moduli(seed in any::<u64>(), t in -10.0f64..10.0) {
        let u = mu0(32, seed);
        let v = linear_harmonic(&u, t);
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-15 * a.norm().max(1e-300) * 4.0);
        }
    }

    #[test]
    fn harmonic_step_conserves_mass(seed in any::<u64>(), p in 2.0f64..8.0, t1 in 0.05f64..0.6) {
        let cfg = SolverConfig::default().with_p(p).with_dt(0.01);
        let solver = HarmonicSolver::new(16, cfg).unwrap();
        let rec = solver.solve(&mu0(16, seed), 0.0, t1).unwrap();
        prop_assert!(rec.mass_drift() <= 1e-12);
    }

    #[test]
    fn free_flow_is_unitary(s in -5.0f64..5.0) {
        let grid = BoxGrid::new(20.0, 512).unwrap();
        let u = GridState::from_fn(grid, |y| Complex64::new((-y * y).exp(), (0.5 * y).sin() * (-y * y / 2.0).exp()));
        let v = linear_free(&u, s).unwrap();
        let (a, b) = (box_lp_norm(u.values(), &grid, 2.0), box_lp_norm(v.values(), &grid, 2.0));
        prop_assert!(((a - b) / a).abs() <= 1e-13);
    }
}
