use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::periodic::BoxGrid;

/// Coefficients of a function in the Hermite eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); modes] }
    }

    /// Unit vector at mode `n`.
    pub fn mode(n: usize, modes: usize) -> Self {
        let mut s = Self::zeros(modes);
        s.coeffs[n] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `sum |c_n|^2`, equal to the squared `L²` norm of the synthesized function.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Zero-padded (or truncated) copy with `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// `l²` distance to another state, padding the shorter one with zeros.
    pub fn distance(&self, other: &SpectralState) -> f64 {
        let n = self.len().max(other.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Fraction of the mass carried by the top 10% of the modes. Large values
    /// mean grid norms of this state are not trustworthy.
    pub fn tail_mass_fraction(&self) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let start = self.len() - self.len().div_ceil(10);
        self.coeffs[start..].iter().map(|c| c.norm_sqr()).sum::<f64>() / total
    }
}

/// Where the samples of a [`GridState`] live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    /// Nodes of the Gauss–Hermite rule with `count` points.
    HermiteNodes { count: usize },
    /// Uniform periodic grid on `[-L, L)`.
    PeriodicBox(BoxGrid),
}

impl Geometry {
    pub fn len(&self) -> usize {
        match self {
            Geometry::HermiteNodes { count } => *count,
            Geometry::PeriodicBox(b) => b.points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Pointwise samples of a function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    values: Vec<Complex64>,
    geometry: Geometry,
}

impl GridState {
    /// Panics if the sample count does not match the geometry; use
    /// [`GridState::try_new`] for untrusted input.
    pub fn new(values: Vec<Complex64>, geometry: Geometry) -> Self {
        assert_eq!(values.len(), geometry.len(), "grid length does not match geometry");
        Self { values, geometry }
    }

    pub fn try_new(values: Vec<Complex64>, geometry: Geometry) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(LabError::invalid(format!(
                "{} samples for a geometry of {} points",
                values.len(),
                geometry.len()
            )));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::invalid("grid samples must be finite"));
        }
        Ok(Self { values, geometry })
    }

    /// Samples `f` on a periodic box.
    pub fn from_fn(grid: BoxGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.points).map(|j| f(grid.x(j))).collect();
        Self { values, geometry: Geometry::PeriodicBox(grid) }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn box_grid(&self) -> Result<BoxGrid> {
        match self.geometry {
            Geometry::PeriodicBox(b) => Ok(b),
            Geometry::HermiteNodes { .. } => {
                Err(LabError::invalid("operation needs a periodic-box grid"))
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
