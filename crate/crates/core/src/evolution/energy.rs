use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lens::check_harmonic_time;
use crate::spectral::{lp_power_on_nodes, BasisTable, SpectralState};

use super::harmonic::nonlinearity_coefficient;
use super::trajectory::TrajectoryRecord;

/// Above this top-decile mass fraction the `L^(p+1)` term is flagged.
const UNRESOLVED_TAIL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub total: f64,
    /// `½ sum (2n+1) |c_n|²`.
    pub kinetic: f64,
    /// `cos(2t)^((p-5)/2) / (p+1) * ||u||_{p+1}^{p+1}`.
    pub potential: f64,
    /// The state has significant mass in its top modes, so the grid norm may
    /// be under-resolved.
    pub unresolved: bool,
}

pub(crate) struct EnergyParts {
    pub total: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub lp_power: f64,
}

pub(crate) fn energy_parts(t: f64, u: &SpectralState, p: f64, basis: &BasisTable) -> Result<EnergyParts> {
    check_harmonic_time(t)?;
    let kinetic = 0.5
        * u.coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| (2 * n + 1) as f64 * c.norm_sqr())
            .sum::<f64>();
    let grid = basis.synthesize(u)?;
    let lp_power = lp_power_on_nodes(grid.values(), basis, p + 1.0);
    let potential = nonlinearity_coefficient(t, p) / (p + 1.0) * lp_power;
    Ok(EnergyParts { total: kinetic + potential, kinetic, potential, lp_power })
}

/// Energy of the harmonic-picture equation at time `t`; the `L^(p+1)` norm is
/// computed on the nodes of `basis`.
pub fn energy(t: f64, u: &SpectralState, p: f64, basis: &BasisTable) -> Result<EnergyValue> {
    if !(p > 1.0) {
        return Err(LabError::invalid(format!("p must exceed 1, got {p}")));
    }
    let parts = energy_parts(t, u, p, basis)?;
    Ok(EnergyValue {
        total: parts.total,
        kinetic: parts.kinetic,
        potential: parts.potential,
        unresolved: u.tail_mass_fraction() > UNRESOLVED_TAIL,
    })
}

/// `(5-p) sin(2t) cos(2t)^((p-7)/2) / (p+1) * lp_power`, the exact rate of
/// change of the energy along a solution.
pub fn energy_rate(t: f64, p: f64, lp_power: f64) -> f64 {
    if p == 5.0 {
        return 0.0;
    }
    let c = (2.0 * t).cos();
    (5.0 - p) * (2.0 * t).sin() * c.powf(0.5 * (p - 7.0)) / (p + 1.0) * lp_power
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDerivativeReport {
    pub max_residual: f64,
    pub times: Vec<f64>,
    /// Finite-difference derivative minus the exact rate, per recorded time.
    pub residuals: Vec<f64>,
}

/// Compares a second-order finite difference of the recorded energy with
/// [`energy_rate`]. The trajectory must be recorded at equally spaced times.
pub fn energy_derivative_check(traj: &TrajectoryRecord<SpectralState>, p: f64) -> Result<EnergyDerivativeReport> {
    let n = traj.len();
    if n < 3 {
        return Err(LabError::invalid(format!("need at least 3 recorded times, got {n}")));
    }
    let mut e = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for d in &traj.diagnostics {
        match (d.energy, d.potential_power) {
            (Some(a), Some(b)) => {
                e.push(a);
                w.push(b);
            }
            _ => return Err(LabError::invalid("trajectory has no energy diagnostics")),
        }
    }
    let h = traj.times[1] - traj.times[0];
    for pair in traj.times.windows(2) {
        if ((pair[1] - pair[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(LabError::invalid("energy check needs equally spaced records (record_every = 1)"));
        }
    }
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            let fd = if j == 0 {
                (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * e[n - 1] - 4.0 * e[n - 2] + e[n - 3]) / (2.0 * h)
            } else {
                (e[j + 1] - e[j - 1]) / (2.0 * h)
            };
            fd - energy_rate(traj.times[j], p, w[j])
        })
        .collect();
    let max_residual = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(EnergyDerivativeReport { max_residual, times: traj.times.clone(), residuals })
}
