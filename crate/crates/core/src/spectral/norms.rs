use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::hermite::BasisTable;
use super::periodic::box_lp_norm;
use super::state::{Geometry, GridState, SpectralState};

/// Which norm to take. `p = f64::INFINITY` selects the sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    /// Harmonic Sobolev norm `(sum (2n+1)^sigma |c_n|^2)^(1/2)`.
    Sobolev { sigma: f64 },
    /// `||H^(sigma/2) u||_{L^p}`.
    Wsp { sigma: f64, p: f64 },
    Lp { p: f64 },
}

impl NormKind {
    pub fn validate(&self) -> Result<()> {
        let (sigma, p) = match *self {
            NormKind::Sobolev { sigma } => (sigma, 2.0),
            NormKind::Wsp { sigma, p } => (sigma, p),
            NormKind::Lp { p } => (0.0, p),
        };
        if !(-2.0..=2.0).contains(&sigma) {
            return Err(LabError::invalid(format!("sigma = {sigma} outside [-2, 2]")));
        }
        if !(p >= 1.0) {
            return Err(LabError::invalid(format!("p = {p} outside [1, inf]")));
        }
        Ok(())
    }
}

/// `sum_j W_j |u_j|^p` on the Hermite nodes of `basis`.
pub fn lp_power_on_nodes(values: &[Complex64], basis: &BasisTable, p: f64) -> f64 {
    values
        .iter()
        .zip(basis.weights())
        .map(|(v, w)| w * v.norm().powf(p))
        .sum()
}

fn lp_on_nodes(values: &[Complex64], basis: &BasisTable, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else if p == 2.0 {
        values
            .iter()
            .zip(basis.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    } else {
        lp_power_on_nodes(values, basis, p).powf(1.0 / p)
    }
}

/// Norm of a coefficient vector; grid norms synthesize on the nodes of `basis`.
pub fn spectral_norm(state: &SpectralState, kind: NormKind, basis: &BasisTable) -> Result<f64> {
    kind.validate()?;
    match kind {
        NormKind::Sobolev { sigma } => Ok(state
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| ((2 * n + 1) as f64).powf(sigma) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()),
        NormKind::Wsp { sigma, p } => {
            let scaled: Vec<Complex64> = state
                .coeffs()
                .iter()
                .enumerate()
                .map(|(n, c)| c * ((2 * n + 1) as f64).powf(0.5 * sigma))
                .collect();
            let grid = basis.synthesize(&SpectralState::new(scaled))?;
            Ok(lp_on_nodes(grid.values(), basis, p))
        }
        NormKind::Lp { p } => {
            let grid = basis.synthesize(state)?;
            Ok(lp_on_nodes(grid.values(), basis, p))
        }
    }
}

/// Norm of pointwise samples. Hermite-node grids need the matching basis;
/// periodic boxes only support `Lp` (uniform trapezoid).
pub fn grid_norm(grid: &GridState, kind: NormKind, basis: Option<&BasisTable>) -> Result<f64> {
    kind.validate()?;
    match (grid.geometry(), kind) {
        (Geometry::PeriodicBox(b), NormKind::Lp { p }) => Ok(box_lp_norm(grid.values(), b, p)),
        (Geometry::PeriodicBox(_), _) => Err(LabError::invalid(
            "harmonic Sobolev norms need Hermite coefficients, not box samples",
        )),
        (Geometry::HermiteNodes { count }, _) => {
            let basis = basis
                .filter(|b| b.nq() == *count)
                .ok_or_else(|| LabError::invalid("grid norm needs the basis matching the Hermite nodes"))?;
            match kind {
                NormKind::Lp { p } => Ok(lp_on_nodes(grid.values(), basis, p)),
                _ => spectral_norm(&basis.analyze(grid)?, kind, basis),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hermite_function;

    /// Adaptive Simpson on [a, b]; independent of the quadrature rule.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn sobolev_of_first_mode() {
        let basis = BasisTable::build(4, 8).unwrap();
        let s = SpectralState::mode(1, 4);
        let v = spectral_norm(&s, NormKind::Sobolev { sigma: 1.0 }, &basis).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-15);
        assert!((v - 1.732_050_8).abs() < 1e-7);
    }

    #[test]
    fn ground_state_l2_is_one() {
        let basis = BasisTable::build(4, 8).unwrap();
        let v = spectral_norm(&SpectralState::mode(0, 4), NormKind::Lp { p: 2.0 }, &basis).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ground_state_l4_against_simpson() {
        let oracle = adaptive_simpson(&|x| hermite_function(0, x).powi(4), -12.0, 12.0, 1e-14).powf(0.25);
        // closed form (2 pi)^(-1/8)
        assert!((oracle - (2.0 * std::f64::consts::PI).powf(-0.125)).abs() < 1e-12);
        let basis = BasisTable::build(16, 32).unwrap();
        let v = spectral_norm(&SpectralState::mode(0, 16), NormKind::Lp { p: 4.0 }, &basis).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn wsp_zero_sigma_matches_lp() {
        let basis = BasisTable::build(8, 16).unwrap();
        let s = SpectralState::new(
            (0..8).map(|n| Complex64::new(1.0 / (n + 1) as f64, 0.2 * n as f64 / 8.0)).collect(),
        );
        let a = spectral_norm(&s, NormKind::Wsp { sigma: 0.0, p: 6.0 }, &basis).unwrap();
        let b = spectral_norm(&s, NormKind::Lp { p: 6.0 }, &basis).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let basis = BasisTable::build(4, 8).unwrap();
        let s = SpectralState::mode(0, 4);
        assert!(spectral_norm(&s, NormKind::Sobolev { sigma: 2.5 }, &basis).is_err());
        assert!(spectral_norm(&s, NormKind::Lp { p: 0.5 }, &basis).is_err());
        let grid = GridState::from_fn(crate::spectral::BoxGrid::new(4.0, 16).unwrap(), |_| Complex64::new(1.0, 0.0));
        assert!(grid_norm(&grid, NormKind::Sobolev { sigma: 0.0 }, None).is_err());
        assert!(grid_norm(&grid, NormKind::Lp { p: 2.0 }, None).is_ok());
    }
}
