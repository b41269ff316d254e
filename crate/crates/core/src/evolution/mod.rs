//! Time integration in both pictures and the experiments built on it.
//!
//! The harmonic solver works on a square collocation space: `K` Hermite modes
//! and the `K` Gauss–Hermite nodes, so that synthesis and analysis are
//! mutually inverse orthogonal maps. The pointwise nonlinear phase is then
//! unitary in coefficient space and the discrete mass is conserved to
//! rounding. Data with `N` modes is zero-padded to `K = padding * N`.

mod energy;
mod experiments;
mod flat;
mod harmonic;
mod trajectory;

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::BoxGrid;

pub use energy::{energy, energy_derivative_check, energy_rate, EnergyDerivativeReport, EnergyValue};
pub use experiments::{
    decay_experiment, dispersion_check, localized_decay_experiment, norm_growth_experiment,
    scattering_experiment, target_decay_exponent, Cutoff, DecayReport, DispersionReport, EnsembleSpec,
    LocalizedDecayReport, NormGrowthReport, SampleFailure, ScatteringReport,
};
pub use flat::{boundary_mass_fraction, linear_free, FlatSolver, BOUNDARY_FAIL, BOUNDARY_WARN};
pub use harmonic::{linear_harmonic, nonlinearity_coefficient, HarmonicSolver};
pub use trajectory::{Diagnostics, TrajectoryRecord};

/// Default harmonic stop time `pi/4 - 0.05`.
pub const DEFAULT_T_CAP: f64 = FRAC_PI_4 - 0.05;

/// Integrator settings shared by both pictures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Nonlinearity exponent in `|u|^(p-1) u`.
    pub p: f64,
    /// Base step.
    pub dt: f64,
    /// Largest nonlinear phase allowed in one substep.
    pub theta: f64,
    /// Harmonic runs refuse to go past `|t| = t_cap`.
    pub t_cap: f64,
    #[serde(rename = "box")]
    pub box_grid: BoxGrid,
    /// Record diagnostics every this many base steps.
    pub record_every: usize,
    /// Multiplies the nonlinearity; `0` switches it off.
    pub coupling: f64,
    /// Harmonic working space has `padding * N` modes.
    pub padding: usize,
    /// Extra `L^q` norms recorded along trajectories.
    pub record_norms: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 5.0,
            dt: 1e-3,
            theta: 0.1,
            t_cap: DEFAULT_T_CAP,
            box_grid: BoxGrid::default(),
            record_every: 1,
            coupling: 1.0,
            padding: 2,
            record_norms: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn linear(mut self) -> Self {
        self.coupling = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(LabError::invalid(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.theta > 0.0 && self.theta <= 0.5) {
            return Err(LabError::invalid(format!("theta must lie in (0, 0.5], got {}", self.theta)));
        }
        if !(self.t_cap > 0.0 && self.t_cap < FRAC_PI_4) {
            return Err(LabError::invalid(format!("t_cap must lie in (0, pi/4), got {}", self.t_cap)));
        }
        if self.record_every == 0 || self.padding == 0 {
            return Err(LabError::invalid("record_every and padding must be at least 1"));
        }
        if self.record_norms.iter().any(|q| !(*q >= 1.0)) {
            return Err(LabError::invalid("recorded norm exponents must be >= 1"));
        }
        BoxGrid::new(self.box_grid.half_width, self.box_grid.points)?;
        Ok(())
    }

    /// Flat-time horizon reachable before the cap.
    pub fn s_horizon(&self) -> f64 {
        0.5 * (2.0 * self.t_cap).tan()
    }
}

/// Number of equal base steps covering `span` with steps no longer than `dt`.
pub(crate) fn step_count(span: f64, dt: f64) -> usize {
    if span == 0.0 {
        0
    } else {
        ((span.abs() / dt) - 1e-9).ceil().max(1.0) as usize
    }
}
