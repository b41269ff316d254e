use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::spectral::{box_lp_norm, BoxFft, BoxGrid, Geometry, GridState};

use super::trajectory::{Diagnostics, TrajectoryRecord};
use super::{step_count, SolverConfig};

/// Boundary-mass fraction that adds a warning to the record.
pub const BOUNDARY_WARN: f64 = 1e-4;
/// Boundary-mass fraction that aborts a flat run.
pub const BOUNDARY_FAIL: f64 = 1e-2;
/// Relative mass allowed outside `|y| <= L/2` at the start of a run.
const START_MARGIN: f64 = 1e-8;

fn box_mass(values: &[Complex64], grid: &BoxGrid) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx()
}

fn mass_fraction_beyond(values: &[Complex64], grid: &BoxGrid, radius: f64) -> f64 {
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = values
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j).abs() >= radius)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    outer / total
}

/// Fraction of the mass within a tenth of the box half-width of the edge.
pub fn boundary_mass_fraction(values: &[Complex64], grid: &BoxGrid) -> f64 {
    mass_fraction_beyond(values, grid, 0.9 * grid.half_width)
}

fn free_multiply(data: &mut [Complex64], ks: &[f64], s: f64) {
    for (v, k) in data.iter_mut().zip(ks) {
        *v *= Complex64::from_polar(1.0, -k * k * s);
    }
}

/// Exact free flow `exp(-i k² s)` on the box frequencies.
pub fn linear_free(u: &GridState, s: f64) -> Result<GridState> {
    let grid = u.box_grid()?;
    let fft = BoxFft::new(grid.points);
    let mut data = u.values().to_vec();
    if s != 0.0 {
        fft.forward(&mut data);
        free_multiply(&mut data, &grid.wavenumbers(), s);
        fft.inverse(&mut data);
    }
    GridState::try_new(data, *u.geometry())
}

/// Strang splitting for `i U_s + U_yy = coupling |U|^(p-1) U` on the periodic box.
#[derive(Clone)]
pub struct FlatSolver {
    cfg: SolverConfig,
    grid: BoxGrid,
    fft: BoxFft,
    ks: Vec<f64>,
}

impl FlatSolver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.box_grid;
        Ok(Self { fft: BoxFft::new(grid.points), ks: grid.wavenumbers(), grid, cfg })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn check_input(&self, u0: &GridState) -> Result<()> {
        let g = u0.box_grid()?;
        if g != self.grid {
            return Err(LabError::invalid(format!("data lives on {g:?}, solver on {:?}", self.grid)));
        }
        let outside = mass_fraction_beyond(u0.values(), &self.grid, 0.5 * self.grid.half_width);
        if outside > START_MARGIN {
            return Err(LabError::invalid(format!(
                "initial data has mass fraction {outside:.3e} outside |y| <= L/2"
            )));
        }
        Ok(())
    }

    fn nonlinear(&self, data: &mut [Complex64], strength: f64) {
        let half = 0.5 * (self.cfg.p - 1.0);
        for v in data.iter_mut() {
            let r2 = v.norm_sqr();
            if r2 > 0.0 {
                *v *= Complex64::from_polar(1.0, -strength * r2.powf(half));
            }
        }
    }

    /// One base step of length `h`; returns the substep count.
    fn step(&self, data: &mut [Complex64], s: f64, h: f64) -> Result<usize> {
        let coupling = self.cfg.coupling;
        if coupling == 0.0 {
            self.fft.forward(data);
            free_multiply(data, &self.ks, h);
            self.fft.inverse(data);
            return Ok(1);
        }
        let sup = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let phase = coupling.abs() * sup.powf(self.cfg.p - 1.0) * h.abs();
        if !phase.is_finite() {
            return Err(LabError::NumericalFailure { time: s, detail: "non-finite nonlinear phase".into() });
        }
        let m = ((phase / self.cfg.theta).ceil() as usize).max(1);
        let hs = h / m as f64;
        // Adjacent half linear steps are fused.
        self.fft.forward(data);
        free_multiply(data, &self.ks, 0.5 * hs);
        for j in 0..m {
            self.fft.inverse(data);
            self.nonlinear(data, coupling * hs);
            self.fft.forward(data);
            let lin = if j + 1 == m { 0.5 * hs } else { hs };
            free_multiply(data, &self.ks, lin);
        }
        self.fft.inverse(data);
        if !data.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::NumericalFailure { time: s + h, detail: "state became non-finite".into() });
        }
        Ok(m)
    }

    fn diagnostics(&self, data: &[Complex64], boundary: f64, substeps: usize) -> Diagnostics {
        Diagnostics {
            mass: box_mass(data, &self.grid),
            energy: None,
            potential_power: None,
            norms: self.cfg.record_norms.iter().map(|&q| box_lp_norm(data, &self.grid, q)).collect(),
            boundary_mass: Some(boundary),
            substeps,
        }
    }

    /// Integrates from `s0` to `s1`, recording every `record_every` base steps.
    pub fn solve(&self, u0: &GridState, s0: f64, s1: f64) -> Result<TrajectoryRecord<GridState>> {
        self.check_input(u0)?;
        let geometry = Geometry::PeriodicBox(self.grid);
        let mut data = u0.values().to_vec();
        let mut record = TrajectoryRecord::new(self.cfg.record_norms.clone());
        let b0 = boundary_mass_fraction(&data, &self.grid);
        record.push(s0, u0.clone(), self.diagnostics(&data, b0, 0));

        let steps = step_count(s1 - s0, self.cfg.dt);
        if steps == 0 {
            return Ok(record);
        }
        let h = (s1 - s0) / steps as f64;
        let mut substeps = 0;
        let mut warned = false;
        for k in 0..steps {
            let s = s0 + k as f64 * h;
            substeps += self.step(&mut data, s, h)?;
            let sn = if k + 1 == steps { s1 } else { s0 + (k + 1) as f64 * h };
            let boundary = boundary_mass_fraction(&data, &self.grid);
            if boundary > BOUNDARY_FAIL {
                return Err(LabError::BoundaryMass { time: sn, fraction: boundary });
            }
            if boundary > BOUNDARY_WARN && !warned {
                warned = true;
                record
                    .warnings
                    .push(format!("boundary mass fraction {boundary:.3e} at s = {sn}"));
            }
            if (k + 1) % self.cfg.record_every == 0 || k + 1 == steps {
                let state = GridState::new(data.clone(), geometry);
                record.push(sn, state, self.diagnostics(&data, boundary, substeps));
                substeps = 0;
            }
        }
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_box() -> GridState {
        let grid = BoxGrid::default();
        GridState::from_fn(grid, |y| Complex64::new(PI.powf(-0.25) * (-0.5 * y * y).exp(), 0.0))
    }

    fn free_gaussian(y: f64, s: f64) -> Complex64 {
        let z = Complex64::new(1.0, 2.0 * s);
        PI.powf(-0.25) * z.powf(-0.5) * (-(y * y) / (2.0 * z)).exp()
    }

    #[test]
    fn free_flow_matches_closed_form() {
        let u = gaussian_box();
        let grid = u.box_grid().unwrap();
        for s in [0.5, 1.0, 2.0] {
            let out = linear_free(&u, s).unwrap();
            let err = out
                .values()
                .iter()
                .enumerate()
                .map(|(j, v)| (v - free_gaussian(grid.x(j), s)).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "s = {s}: {err}");
            let sup = out.max_abs();
            assert!((sup - PI.powf(-0.25) * (1.0 + 4.0 * s * s).powf(-0.25)).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let u = gaussian_box();
        assert_eq!(linear_free(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn linear_solver_matches_exact_flow() {
        let cfg = SolverConfig::default().linear().with_dt(0.05);
        let solver = FlatSolver::new(cfg).unwrap();
        let u = gaussian_box();
        let rec = solver.solve(&u, 0.0, 1.0).unwrap();
        let exact = linear_free(&u, 1.0).unwrap();
        let err = rec
            .last_state()
            .unwrap()
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn rejects_data_near_the_edge() {
        let grid = BoxGrid::default();
        let u = GridState::from_fn(grid, |y| Complex64::new((-(y - 30.0).powi(2)).exp(), 0.0));
        let solver = FlatSolver::new(SolverConfig::default()).unwrap();
        assert!(solver.solve(&u, 0.0, 0.1).is_err());
    }

    #[test]
    fn nonlinear_run_conserves_mass() {
        let cfg = SolverConfig::default().with_p(3.0).with_dt(0.01);
        let solver = FlatSolver::new(cfg).unwrap();
        let u = GridState::from_fn(BoxGrid::default(), |y| Complex64::new(2.0 * (-0.5 * y * y).exp(), 0.0));
        let rec = solver.solve(&u, 0.0, 0.5).unwrap();
        assert!(rec.mass_drift() < 1e-12);
    }
}
