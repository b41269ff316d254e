//! Lens transform between flat NLS (clock `s`) and the harmonic picture
//! (clock `t`, `|t| < pi/4`):
//!
//! `u(t, x) = cos(2t)^(-1/2) U(tan(2t)/2, x / cos(2t)) exp(-i x^2 tan(2t) / 2)`.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{evaluate_expansion, interpolate, Geometry, GridState, QuadratureRule, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToFlat,
    ToHarmonic,
}

/// `s = tan(2t)/2` and its inverse `t = arctan(2s)/2`.
pub fn time_map(value: f64, direction: Direction) -> Result<f64> {
    match direction {
        Direction::ToFlat => {
            check_harmonic_time(value)?;
            Ok(0.5 * (2.0 * value).tan())
        }
        Direction::ToHarmonic => {
            if !value.is_finite() {
                return Err(LabError::invalid(format!("flat time {value} is not finite")));
            }
            Ok(0.5 * (2.0 * value).atan())
        }
    }
}

pub fn flat_time(t: f64) -> Result<f64> {
    time_map(t, Direction::ToFlat)
}

pub fn harmonic_time(s: f64) -> f64 {
    0.5 * (2.0 * s).atan()
}

pub(crate) fn check_harmonic_time(t: f64) -> Result<()> {
    if !(t.abs() < FRAC_PI_4) {
        return Err(LabError::invalid(format!("harmonic time {t} outside (-pi/4, pi/4)")));
    }
    Ok(())
}

/// Something that can be sampled at arbitrary points.
pub trait Field {
    fn eval(&self, xs: &[f64]) -> Result<Vec<Complex64>>;
}

/// Band-limited interpolation of box samples.
impl Field for GridState {
    fn eval(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let grid = self.box_grid()?;
        interpolate(self.values(), &grid, xs)
    }
}

/// Hermite series `sum c_n e_n(x)`, defined on the whole line.
impl Field for SpectralState {
    fn eval(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        Ok(evaluate_expansion(self.coeffs(), xs))
    }
}

fn geometry_points(geometry: &Geometry) -> Result<Vec<f64>> {
    match geometry {
        Geometry::PeriodicBox(b) => Ok(b.xs()),
        Geometry::HermiteNodes { count } => Ok(QuadratureRule::gauss_hermite(*count)?.nodes().to_vec()),
    }
}

/// `exp(i * sign * x^2 * k)` with the phase reduced mod 2pi per point.
fn chirp(x: f64, k: f64, sign: f64) -> Complex64 {
    let phase = (x * x * k).rem_euclid(TAU);
    Complex64::from_polar(1.0, sign * phase)
}

/// Harmonic-picture samples `u(t, x)` on `target` from the flat solution `U`
/// at time `s = tan(2t)/2`.
pub fn lens_forward(flat: &impl Field, s: f64, t: f64, target: &Geometry) -> Result<GridState> {
    check_harmonic_time(t)?;
    let expected = harmonic_time(s);
    if (expected - t).abs() > 1e-10 {
        return Err(LabError::invalid(format!(
            "flat time {s} corresponds to t = {expected}, not {t}"
        )));
    }
    let c = (2.0 * t).cos();
    let half_tan = 0.5 * (2.0 * t).tan();
    let xs = geometry_points(target)?;
    let pulled: Vec<f64> = xs.iter().map(|x| x / c).collect();
    let values = flat.eval(&pulled)?;
    let amp = c.powf(-0.5);
    let out = xs
        .iter()
        .zip(values)
        .map(|(&x, v)| v * amp * chirp(x, half_tan, -1.0))
        .collect();
    GridState::try_new(out, *target)
}

/// Flat-picture samples `U(s, y)` on `target` from the harmonic solution `u`
/// at time `t`: `U(s, y) = cos(2t)^(1/2) u(t, y cos(2t)) exp(i y^2 cos(2t) sin(2t) / 2)`.
pub fn lens_inverse(harmonic: &impl Field, t: f64, target: &Geometry) -> Result<GridState> {
    check_harmonic_time(t)?;
    let c = (2.0 * t).cos();
    let k = 0.5 * c * (2.0 * t).sin();
    let ys = geometry_points(target)?;
    let pushed: Vec<f64> = ys.iter().map(|y| y * c).collect();
    let values = harmonic.eval(&pushed)?;
    let amp = c.sqrt();
    let out = ys
        .iter()
        .zip(values)
        .map(|(&y, v)| v * amp * chirp(y, k, 1.0))
        .collect();
    GridState::try_new(out, *target)
}

/// `||U(s)||_{L^q} = cos(2t)^(1/2 - 1/q) ||u(t)||_{L^q}`: the lens only
/// rescales Lebesgue norms, so flat norms follow from harmonic ones.
pub fn flat_lp_from_harmonic(harmonic_norm: f64, t: f64, q: f64) -> Result<f64> {
    check_harmonic_time(t)?;
    let exponent = if q.is_infinite() { 0.5 } else { 0.5 - 1.0 / q };
    Ok((2.0 * t).cos().powf(exponent) * harmonic_norm)
}
