use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::lens::check_harmonic_time;
use crate::spectral::{lp_power_on_nodes, BasisTable, SpectralState};

use super::energy::energy_parts;
use super::trajectory::{Diagnostics, TrajectoryRecord};
use super::{step_count, SolverConfig};

/// `cos(2t)^((p-5)/2)`, the time-dependent strength of the harmonic nonlinearity.
pub fn nonlinearity_coefficient(t: f64, p: f64) -> f64 {
    if p == 5.0 {
        1.0
    } else {
        (2.0 * t).cos().powf(0.5 * (p - 5.0))
    }
}

/// `exp(-i (2n+1) t)`, with the quarter-period part of `t` applied exactly.
fn harmonic_phase(n: usize, quarter_turns: i64, remainder: f64) -> Complex64 {
    let odd = (2 * n + 1) as i64;
    let q = (odd * quarter_turns).rem_euclid(4);
    let exact = match q {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    if remainder == 0.0 {
        exact
    } else {
        exact * Complex64::from_polar(1.0, -(odd as f64) * remainder)
    }
}

fn split_quarter_turns(t: f64) -> (i64, f64) {
    let k = (t / FRAC_PI_2).round();
    (k as i64, t - k * FRAC_PI_2)
}

/// Exact linear harmonic flow `c_n -> c_n exp(-i (2n+1) t)`.
pub fn linear_harmonic(state: &SpectralState, t: f64) -> SpectralState {
    let (k, r) = split_quarter_turns(t);
    SpectralState::new(
        state
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let ph = harmonic_phase(n, k, r);
                if ph.im == 0.0 {
                    c * ph.re
                } else if ph.re == 0.0 {
                    Complex64::new(-c.im * ph.im, c.re * ph.im)
                } else {
                    c * ph
                }
            })
            .collect(),
    )
}

/// Strang splitting for `i u_t = H u + coupling * cos(2t)^((p-5)/2) |u|^(p-1) u`
/// on a square Hermite collocation space.
#[derive(Debug, Clone)]
pub struct HarmonicSolver {
    basis: BasisTable,
    cfg: SolverConfig,
}

impl HarmonicSolver {
    /// Solver for data with `input_modes` modes, working on
    /// `padding * input_modes` modes.
    pub fn new(input_modes: usize, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = BasisTable::collocation(input_modes * cfg.padding)?;
        Ok(Self { basis, cfg })
    }

    /// Solver whose working space has exactly `modes` modes (no padding).
    pub fn unpadded(modes: usize, mut cfg: SolverConfig) -> Result<Self> {
        cfg.padding = 1;
        Self::new(modes, cfg)
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    /// Collocation basis: the nodes the nonlinearity and all grid norms use.
    pub fn basis(&self) -> &BasisTable {
        &self.basis
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Zero-pads data into the working space.
    pub fn embed(&self, u0: &SpectralState) -> Result<SpectralState> {
        if u0.len() > self.modes() {
            return Err(LabError::invalid(format!(
                "state has {} modes, solver space only {}",
                u0.len(),
                self.modes()
            )));
        }
        Ok(u0.resized(self.modes()))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        check_harmonic_time(t)?;
        if t.abs() > self.cfg.t_cap + 1e-12 {
            return Err(LabError::invalid(format!(
                "harmonic time {t} is beyond t_cap = {}",
                self.cfg.t_cap
            )));
        }
        Ok(())
    }

    fn linear_in_place(&self, c: &mut [Complex64], h: f64) {
        let (k, r) = split_quarter_turns(h);
        for (n, v) in c.iter_mut().enumerate() {
            *v *= harmonic_phase(n, k, r);
        }
    }

    fn nonlinear_in_place(&self, c: &mut [Complex64], grid: &mut [Complex64], strength: f64) -> Result<()> {
        let half = 0.5 * (self.cfg.p - 1.0);
        self.basis.synthesize_into(c, grid)?;
        for v in grid.iter_mut() {
            let r2 = v.norm_sqr();
            if r2 > 0.0 {
                let phase = -strength * r2.powf(half);
                *v *= Complex64::from_polar(1.0, phase);
            }
        }
        self.basis.analyze_into(grid, c);
        Ok(())
    }

    /// One base step from `t` to `t + h`; returns the substep count.
    fn step(&self, c: &mut [Complex64], grid: &mut [Complex64], t: f64, h: f64) -> Result<usize> {
        let coupling = self.cfg.coupling;
        if coupling == 0.0 {
            self.linear_in_place(c, h);
            return Ok(1);
        }
        let p = self.cfg.p;
        self.basis.synthesize_into(c, grid)?;
        let sup = grid.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let lambda_mid = nonlinearity_coefficient(t + 0.5 * h, p);
        let phase = coupling.abs() * lambda_mid * sup.powf(p - 1.0) * h.abs();
        if !phase.is_finite() {
            return Err(LabError::NumericalFailure { time: t, detail: "non-finite nonlinear phase".into() });
        }
        let m = ((phase / self.cfg.theta).ceil() as usize).max(1);
        let hs = h / m as f64;
        for j in 0..m {
            let ts = t + j as f64 * hs;
            self.linear_in_place(c, 0.5 * hs);
            let strength = coupling * nonlinearity_coefficient(ts + 0.5 * hs, p) * hs;
            self.nonlinear_in_place(c, grid, strength)?;
            self.linear_in_place(c, 0.5 * hs);
        }
        if !c.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::NumericalFailure { time: t + h, detail: "state became non-finite".into() });
        }
        Ok(m)
    }

    /// Advances `state` (already in the working space) from `t0` to `t1`
    /// with equal steps no longer than `dt`. Returns the substep count.
    pub fn advance(&self, state: &mut SpectralState, t0: f64, t1: f64) -> Result<usize> {
        self.check_time(t0)?;
        self.check_time(t1)?;
        if state.len() != self.modes() {
            return Err(LabError::invalid("state is not in the solver working space; call embed first"));
        }
        let steps = step_count(t1 - t0, self.cfg.dt);
        if steps == 0 {
            return Ok(0);
        }
        let h = (t1 - t0) / steps as f64;
        let mut grid = vec![Complex64::new(0.0, 0.0); self.modes()];
        let mut substeps = 0;
        for k in 0..steps {
            substeps += self.step(state.coeffs_mut(), &mut grid, t0 + k as f64 * h, h)?;
        }
        Ok(substeps)
    }

    pub fn diagnostics(&self, state: &SpectralState, t: f64, substeps: usize) -> Result<Diagnostics> {
        let parts = energy_parts(t, state, self.cfg.p, &self.basis)?;
        let grid = self.basis.synthesize(state)?;
        let norms = self
            .cfg
            .record_norms
            .iter()
            .map(|&q| {
                if q.is_infinite() {
                    grid.max_abs()
                } else {
                    lp_power_on_nodes(grid.values(), &self.basis, q).powf(1.0 / q)
                }
            })
            .collect();
        Ok(Diagnostics {
            mass: state.mass(),
            energy: Some(parts.total),
            potential_power: Some(parts.lp_power),
            norms,
            boundary_mass: None,
            substeps,
        })
    }

    /// Integrates from `t0` to `t1`, recording every `record_every` base steps
    /// and at `t1`.
    pub fn solve(&self, u0: &SpectralState, t0: f64, t1: f64) -> Result<TrajectoryRecord<SpectralState>> {
        self.check_time(t0)?;
        self.check_time(t1)?;
        let mut state = self.embed(u0)?;
        let mut record = TrajectoryRecord::new(self.cfg.record_norms.clone());
        record.push(t0, state.clone(), self.diagnostics(&state, t0, 0)?);

        let steps = step_count(t1 - t0, self.cfg.dt);
        if steps == 0 {
            return Ok(record);
        }
        let h = (t1 - t0) / steps as f64;
        let mut grid = vec![Complex64::new(0.0, 0.0); self.modes()];
        let mut substeps = 0;
        for k in 0..steps {
            let t = t0 + k as f64 * h;
            substeps += self.step(state.coeffs_mut(), &mut grid, t, h)?;
            let done = k + 1 == steps;
            if (k + 1) % self.cfg.record_every == 0 || done {
                let tn = if done { t1 } else { t0 + (k + 1) as f64 * h };
                record.push(tn, state.clone(), self.diagnostics(&state, tn, substeps)?);
                substeps = 0;
            }
        }
        Ok(record)
    }

    /// Runs through the increasing (or decreasing) `times`, returning the
    /// state at each one.
    pub fn states_at(&self, u0: &SpectralState, t0: f64, times: &[f64]) -> Result<Vec<SpectralState>> {
        let mut state = self.embed(u0)?;
        let mut t = t0;
        let mut out = Vec::with_capacity(times.len());
        for &tn in times {
            self.advance(&mut state, t, tn)?;
            t = tn;
            out.push(state.clone());
        }
        Ok(out)
    }
}
