use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LabError, Result};

use super::quadrature::{QuadratureRule, MAX_NODES};
use super::state::{Geometry, GridState, SpectralState};

const RESCALE: f64 = 1e150;
const LOG_RESCALE: f64 = 345.387_763_949_107; // ln(1e150)

/// Normalised Hermite functions `e_0(x), e_1(x), ...` at a fixed point.
///
/// The three-term recurrence runs on values scaled by `exp(x^2/2)` with a
/// running log scale, so neither the Gaussian factor nor the polynomial growth
/// overflows for the mode counts used here.
#[derive(Debug, Clone)]
pub struct HermiteRecurrence {
    x: f64,
    prev: f64,
    cur: f64,
    log_scale: f64,
    k: usize,
}

impl HermiteRecurrence {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            prev: 0.0,
            cur: 1.0,
            log_scale: -0.5 * x * x - 0.25 * PI.ln(),
            k: 0,
        }
    }

    fn advance(&mut self) {
        let k = self.k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * self.x * self.cur - (k / (k + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        if self.cur.abs() > RESCALE {
            self.cur /= RESCALE;
            self.prev /= RESCALE;
            self.log_scale += LOG_RESCALE;
        }
    }

    /// `(e_{n-1}, e_n)` up to a common positive factor. Ratios are exact even
    /// where the true values underflow.
    pub fn scaled_pair(mut self, n: usize) -> (f64, f64) {
        while self.k < n {
            self.advance();
        }
        (self.prev, self.cur)
    }
}

impl Iterator for HermiteRecurrence {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let value = self.cur * self.log_scale.exp();
        self.advance();
        Some(value)
    }
}

/// Table of `e_n(x_j)` on a Gauss–Hermite rule together with the spectrum of
/// the harmonic oscillator. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    modes: usize,
    rule: QuadratureRule,
    /// Mode-major: `values[n * nq + j] = e_n(x_j)`.
    values: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl BasisTable {
    pub fn build(modes: usize, nq: usize) -> Result<Self> {
        if modes == 0 || modes > nq || nq > MAX_NODES {
            return Err(LabError::invalid(format!(
                "basis needs 1 <= N <= Nq <= {MAX_NODES}, got N = {modes}, Nq = {nq}"
            )));
        }
        let rule = QuadratureRule::gauss_hermite(nq)?;
        let mut values = vec![0.0; modes * nq];
        for (j, &x) in rule.nodes().iter().enumerate() {
            for (n, e) in HermiteRecurrence::new(x).take(modes).enumerate() {
                if !e.is_finite() {
                    return Err(LabError::NumericalFailure {
                        time: 0.0,
                        detail: format!("Hermite recurrence overflow at mode {n}, x = {x}"),
                    });
                }
                values[n * nq + j] = e;
            }
        }
        let eigenvalues = (0..modes).map(|n| (2 * n + 1) as f64).collect();
        Ok(Self { modes, rule, values, eigenvalues })
    }

    /// Square table (`Nq = N`): synthesis and analysis are mutually inverse
    /// orthogonal maps, which is what the collocation solver needs.
    pub fn collocation(modes: usize) -> Result<Self> {
        Self::build(modes, modes)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nq(&self) -> usize {
        self.rule.count()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    /// `e_n` sampled at every node.
    pub fn row(&self, n: usize) -> &[f64] {
        let nq = self.nq();
        &self.values[n * nq..(n + 1) * nq]
    }

    pub fn value(&self, n: usize, j: usize) -> f64 {
        self.values[n * self.nq() + j]
    }

    /// `lambda_n^2 = 2n + 1`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::HermiteNodes { count: self.nq() }
    }

    /// `values[j] = sum_n c_n e_n(x_j)`.
    pub fn synthesize(&self, state: &SpectralState) -> Result<GridState> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.nq()];
        self.synthesize_into(state.coeffs(), &mut out)?;
        Ok(GridState::new(out, self.geometry()))
    }

    pub(crate) fn synthesize_into(&self, coeffs: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if coeffs.len() > self.modes {
            return Err(LabError::invalid(format!(
                "state has {} modes but the basis only {}",
                coeffs.len(),
                self.modes
            )));
        }
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (n, c) in coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for (o, &e) in out.iter_mut().zip(self.row(n)) {
                o.re += c.re * e;
                o.im += c.im * e;
            }
        }
        Ok(())
    }

    /// `c_n = <u, e_n>` by the compensated quadrature.
    pub fn analyze(&self, grid: &GridState) -> Result<SpectralState> {
        match grid.geometry() {
            Geometry::HermiteNodes { count } if *count == self.nq() => {}
            other => {
                return Err(LabError::invalid(format!(
                    "analyze needs a grid on the {} Hermite nodes of this basis, got {other:?}",
                    self.nq()
                )))
            }
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.modes];
        self.analyze_into(grid.values(), &mut coeffs);
        Ok(SpectralState::new(coeffs))
    }

    pub(crate) fn analyze_into(&self, values: &[Complex64], coeffs: &mut [Complex64]) {
        let weighted: Vec<Complex64> = values
            .iter()
            .zip(self.weights())
            .map(|(v, &w)| v * w)
            .collect();
        for (n, c) in coeffs.iter_mut().enumerate().take(self.modes) {
            let (mut re, mut im) = (0.0, 0.0);
            for (v, &e) in weighted.iter().zip(self.row(n)) {
                re += v.re * e;
                im += v.im * e;
            }
            *c = Complex64::new(re, im);
        }
    }
}

/// Evaluates `sum_n c_n e_n(x)` at arbitrary points.
pub fn evaluate_expansion(coeffs: &[Complex64], xs: &[f64]) -> Vec<Complex64> {
    xs.iter()
        .map(|&x| {
            HermiteRecurrence::new(x)
                .zip(coeffs)
                .fold(Complex64::new(0.0, 0.0), |acc, (e, c)| acc + c * e)
        })
        .collect()
}

/// `e_n(x)` for a single mode and point.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    HermiteRecurrence::new(x).nth(n).unwrap_or(0.0)
}
