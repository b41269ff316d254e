use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform periodic grid `y_j = -L + j * 2L / n`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for BoxGrid {
    fn default() -> Self {
        Self { half_width: 40.0, points: 4096 }
    }
}

impl BoxGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || points < 2 {
            return Err(LabError::invalid(format!(
                "box needs L > 0 and at least two points, got L = {half_width}, n = {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points;
        let dk = PI / self.half_width;
        (0..n)
            .map(|m| {
                let signed = if m < n.div_ceil(2) { m as isize } else { m as isize - n as isize };
                signed as f64 * dk
            })
            .collect()
    }
}

/// Forward/inverse FFT pair for one box size. The inverse is normalised.
#[derive(Clone)]
pub struct BoxFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl BoxFft {
    pub fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
            n: points,
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

/// `(sum |u_j|^p dx)^(1/p)`, or the maximum modulus for `p = inf`.
pub fn box_lp_norm(values: &[Complex64], grid: &BoxGrid, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let sum: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    (sum * grid.dx()).powf(1.0 / p)
}

/// Flat Sobolev norm `(sum (1 + k^2)^sigma |U_hat(k)|^2)^(1/2)` with the
/// Parseval normalisation of the box, so `sigma = 0` gives the `L²` norm.
pub fn box_sobolev_norm(values: &[Complex64], grid: &BoxGrid, sigma: f64, fft: &BoxFft) -> f64 {
    let mut spec = values.to_vec();
    fft.forward(&mut spec);
    let ks = grid.wavenumbers();
    let sum: f64 = spec
        .iter()
        .zip(&ks)
        .map(|(u, k)| (1.0 + k * k).powf(sigma) * u.norm_sqr())
        .sum();
    (sum * grid.dx() / grid.points as f64).sqrt()
}

/// Band-limited (trigonometric) interpolation of box samples at arbitrary
/// points inside `[-L, L]`.
pub fn interpolate(values: &[Complex64], grid: &BoxGrid, xs: &[f64]) -> Result<Vec<Complex64>> {
    let n = grid.points;
    if values.len() != n {
        return Err(LabError::invalid("interpolation samples do not match the box"));
    }
    let l = grid.half_width;
    if let Some(worst) = xs.iter().map(|x| x.abs()).filter(|a| *a > l * (1.0 + 1e-12)).reduce(f64::max) {
        return Err(LabError::DomainEscape { offending: worst, half_width: l });
    }
    let mut spec = values.to_vec();
    BoxFft::new(n).forward(&mut spec);
    let dk = PI / l;
    let half = n / 2;
    let has_nyquist = n % 2 == 0;
    let positive = n.div_ceil(2); // modes 0..positive are non-negative
    let inv_n = 1.0 / n as f64;

    Ok(xs
        .iter()
        .map(|&x| {
            let theta = dk * (x + l);
            let mut acc = spec[0];
            let step = Complex64::from_polar(1.0, theta);
            let mut z = step;
            for m in 1..positive {
                if m % 256 == 0 {
                    z = Complex64::from_polar(1.0, theta * m as f64);
                }
                acc += spec[m] * z + spec[n - m] * z.conj();
                z *= step;
            }
            if has_nyquist {
                acc += spec[half] * (theta * half as f64).cos();
            }
            acc * inv_n
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> Complex64 {
        Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp())
    }

    #[test]
    fn wavenumbers_fft_order() {
        let g = BoxGrid::new(PI, 8).unwrap();
        assert_eq!(g.wavenumbers(), vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn interpolation_is_spectrally_accurate() {
        let g = BoxGrid::new(10.0, 256).unwrap();
        let vals: Vec<Complex64> = g.xs().into_iter().map(gaussian).collect();
        let xs = [-3.3, -0.123, 0.0, 0.5, 2.71, 9.99];
        let out = interpolate(&vals, &g, &xs).unwrap();
        for (x, v) in xs.iter().zip(out) {
            assert!((v - gaussian(*x)).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn interpolation_refuses_points_outside() {
        let g = BoxGrid::new(5.0, 64).unwrap();
        let vals = vec![Complex64::new(0.0, 0.0); 64];
        match interpolate(&vals, &g, &[1.0, -7.5]) {
            Err(LabError::DomainEscape { offending, .. }) => assert_eq!(offending, 7.5),
            other => panic!("expected domain escape, got {other:?}"),
        }
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let g = BoxGrid::new(12.0, 512).unwrap();
        let vals: Vec<Complex64> = g.xs().into_iter().map(gaussian).collect();
        let fft = BoxFft::new(g.points);
        let h0 = box_sobolev_norm(&vals, &g, 0.0, &fft);
        let l2 = box_lp_norm(&vals, &g, 2.0);
        assert!((h0 - l2).abs() < 1e-12);
        // ∫ e^{-2x²} (1 + 0.09 x²) dx
        let exact = ((std::f64::consts::PI / 2.0).sqrt() * (1.0 + 0.09 / 4.0)).sqrt();
        assert!((l2 - exact).abs() < 1e-12);
    }
}
