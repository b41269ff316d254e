use nlslab_core::evolution::{linear_free, linear_harmonic};
use nlslab_core::lens::{flat_lp_from_harmonic, flat_time, harmonic_time, lens_forward, lens_inverse, time_map, Direction};
use nlslab_core::spectral::{box_lp_norm, coherent_state, evaluate_expansion, spectral_norm};
use nlslab_core::{BasisTable, BoxGrid, Complex64, Geometry, GridState, NormKind};
use proptest::prelude::*;

fn max_diff(a: &GridState, b: &GridState) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn inverse_then_forward_is_the_identity() {
    let basis = BasisTable::build(48, 96).unwrap();
    let u = coherent_state(Complex64::new(0.8, -0.5), 1.0, 48);
    let t = 0.3;
    let s = flat_time(t).unwrap();
    let grid = BoxGrid::default();
    let flat = lens_inverse(&u, t, &Geometry::PeriodicBox(grid)).unwrap();
    let back = lens_forward(&flat, s, t, &basis.geometry()).unwrap();
    let direct = basis.synthesize(&u).unwrap();
    assert!(max_diff(&back, &direct) <= 1e-8, "{}", max_diff(&back, &direct));
}

#[test]
fn lens_preserves_l2_and_rescales_lq() {
    let basis = BasisTable::build(48, 96).unwrap();
    let u = coherent_state(Complex64::new(-0.4, 0.9), 1.3, 48);
    let grid = BoxGrid::default();
    for t in [0.1, 0.35, 0.6] {
        let flat = lens_inverse(&u, t, &Geometry::PeriodicBox(grid)).unwrap();
        let l2_flat = box_lp_norm(flat.values(), &grid, 2.0);
        let l2 = spectral_norm(&u, NormKind::Lp { p: 2.0 }, &basis).unwrap();
        assert!((l2_flat - l2).abs() < 1e-10, "t {t}: {l2_flat} vs {l2}");
        for q in [4.0, 6.0] {
            let harmonic = spectral_norm(&u, NormKind::Lp { p: q }, &basis).unwrap();
            let predicted = flat_lp_from_harmonic(harmonic, t, q).unwrap();
            let measured = box_lp_norm(flat.values(), &grid, q);
            assert!((predicted / measured - 1.0).abs() < 1e-8, "t {t} q {q}");
        }
    }
}

#[test]
fn free_flow_matches_harmonic_flow_through_the_lens() {
    // Flat free evolution from U0 = u0, pushed to the harmonic picture, is
    // the exact oscillator flow of u0.
    let basis = BasisTable::build(48, 96).unwrap();
    let u0 = coherent_state(Complex64::new(0.6, 0.3), 1.0, 48);
    let grid = BoxGrid::default();
    let xs = grid.xs();
    let start = GridState::new(evaluate_expansion(u0.coeffs(), &xs), Geometry::PeriodicBox(grid));
    for t in [0.2, 0.45, 0.6] {
        let s = flat_time(t).unwrap();
        let flat = linear_free(&start, s).unwrap();
        let pushed = lens_forward(&flat, s, t, &basis.geometry()).unwrap();
        let exact = basis.synthesize(&linear_harmonic(&u0, t)).unwrap();
        assert!(max_diff(&pushed, &exact) <= 1e-6, "t {t}: {}", max_diff(&pushed, &exact));
    }
}

#[test]
fn time_map_round_trip_over_a_wide_range() {
    for k in -60..=60 {
        let s = (k as f64 / 10.0).sinh() * 1.0e6 / 60f64.sinh() * 10.0;
        let s = s.clamp(-1e6, 1e6);
        let t = time_map(s, Direction::ToHarmonic).unwrap();
        let back = time_map(t, Direction::ToFlat).unwrap();
        assert!((back - s).abs() <= 1e-9 * s.abs().max(1.0) * s.abs().max(1.0), "s {s}: {back}");
    }
    assert!(flat_time(std::f64::consts::FRAC_PI_4).is_err());
    assert!(time_map(f64::NAN, Direction::ToHarmonic).is_err());
}

proptest! {
    #[test]
    fn time_map_is_odd_and_monotone(s in -1.0e6f64..1.0e6, d in 0.0f64..10.0) {
        prop_assert_eq!(harmonic_time(-s), -harmonic_time(s));
        prop_assert!(harmonic_time(s + d) >= harmonic_time(s));
        let t = harmonic_time(s);
        prop_assert!(t.abs() < std::f64::consts::FRAC_PI_4);
        prop_assert_eq!(flat_time(-t).unwrap(), -flat_time(t).unwrap());
    }
}
