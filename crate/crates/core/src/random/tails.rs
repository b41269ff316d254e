use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::BasisTable;
use crate::stats::{linear_fit, LinearFit};

use super::law::{ensemble, sample_with_alphas, CoefficientLaw, SampleStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub radius: f64,
    /// Empirical exceedance probability.
    pub tail: f64,
    pub stderr: f64,
    pub exceedances: usize,
    /// No sample exceeded the radius; the point is left out of the fit.
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub sigma: f64,
    pub samples: usize,
    pub time_points: usize,
    /// Per-sample `max_t ||exp(-itH) u0||_{W^{sigma,inf}}`.
    pub sup_norms: Vec<f64>,
    pub points: Vec<TailPoint>,
    /// Least-squares fit of `log tail` against `R^2` over uncensored points.
    pub fit: Option<LinearFit>,
}

impl TailReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Times `-pi + (k + 1/2) 2pi / T`, strictly inside `(-pi, pi)`.
pub fn time_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| -PI + (k as f64 + 0.5) * 2.0 * PI / points as f64)
        .collect()
}

/// `max_t max_j |sum_n (2n+1)^(sigma/2) c_n exp(-i(2n+1)t) e_n(x_j)|`.
pub fn sup_wsp_inf_along_orbit(coeffs: &[Complex64], sigma: f64, times: &[f64], basis: &BasisTable) -> Result<f64> {
    let weighted: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * ((2 * n + 1) as f64).powf(0.5 * sigma))
        .collect();
    let mut rotated = weighted.clone();
    let mut grid = vec![Complex64::new(0.0, 0.0); basis.nq()];
    let mut best: f64 = 0.0;
    for &t in times {
        for (n, (r, w)) in rotated.iter_mut().zip(&weighted).enumerate() {
            *r = w * Complex64::from_polar(1.0, -((2 * n + 1) as f64) * t);
        }
        basis.synthesize_into(&rotated, &mut grid)?;
        best = grid.iter().map(|v| v.norm()).fold(best, f64::max);
    }
    Ok(best)
}

/// Empirical tail of the time-supremum of the `W^{sigma,inf}` norm along the
/// linear harmonic flow, for data drawn from `mu0` truncated to `basis.modes()`.
pub fn smoothing_tail_experiment(
    sigma: f64,
    radii: &[f64],
    basis: &BasisTable,
    samples: usize,
    time_points: usize,
    stream: SampleStream,
) -> Result<TailReport> {
    if !(sigma < 1.0 / 6.0) {
        return Err(LabError::invalid(format!("sigma must lie below 1/6, got {sigma}")));
    }
    if time_points < 8 {
        return Err(LabError::invalid("need at least 8 time points"));
    }
    if samples == 0 {
        return Err(LabError::invalid("need at least one sample"));
    }
    let alphas = CoefficientLaw::Mu0.alphas(basis.modes())?;
    let times = time_grid(time_points);
    let sup_norms = ensemble(stream, samples, |s| {
        let u0 = sample_with_alphas(&alphas, s);
        sup_wsp_inf_along_orbit(u0.coeffs(), sigma, &times, basis)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let m = samples as f64;
    let points: Vec<TailPoint> = radii
        .iter()
        .map(|&radius| {
            let exceedances = sup_norms.iter().filter(|v| **v >= radius).count();
            let tail = exceedances as f64 / m;
            TailPoint {
                radius,
                tail,
                stderr: (tail * (1.0 - tail) / m).sqrt(),
                exceedances,
                censored: exceedances == 0,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.censored)
        .map(|p| (p.radius * p.radius, p.tail.ln()))
        .unzip();
    Ok(TailReport {
        sigma,
        samples,
        time_points,
        sup_norms,
        fit: linear_fit(&xs, &ys),
        points,
    })
}
