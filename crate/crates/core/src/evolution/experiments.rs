use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lens::{flat_lp_from_harmonic, harmonic_time, Field};
use crate::random::{ensemble, sample, CoefficientLaw, SampleStream};
use crate::spectral::{
    box_lp_norm, box_sobolev_norm, lp_power_on_nodes, spectral_norm, BasisTable, BoxFft, BoxGrid, Geometry,
    GridState, NormKind, SpectralState,
};
use crate::stats::{linear_fit, mean_stderr, median, LinearFit};

use super::flat::{boundary_mass_fraction, linear_free};
use super::harmonic::{linear_harmonic, HarmonicSolver};
use super::SolverConfig;

/// `-(1/2 - 1/(p+1))`, the decay exponent of the `L^(p+1)` norm.
pub fn target_decay_exponent(p: f64) -> f64 {
    -(0.5 - 1.0 / (p + 1.0))
}

fn japanese(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

fn check_increasing(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|s| !s.is_finite()) {
        return Err(LabError::invalid(format!("{name} must be a non-empty increasing sequence")));
    }
    Ok(())
}

/// Indices of the upper half of a grid (at least two points when possible).
fn upper_half(len: usize) -> std::ops::Range<usize> {
    let start = (len / 2).min(len.saturating_sub(2));
    start..len
}

fn check_reach(s_grid: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let times: Vec<f64> = s_grid.iter().map(|&s| harmonic_time(s)).collect();
    if let Some(&last) = times.last() {
        if last.abs() > cfg.t_cap {
            return Err(LabError::invalid(format!(
                "s = {} needs t = {last:.6}, beyond t_cap = {} (reachable s <= {:.4})",
                s_grid[s_grid.len() - 1],
                cfg.t_cap,
                cfg.s_horizon()
            )));
        }
    }
    Ok(times)
}

/// Size and randomness of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub modes: usize,
    pub samples: usize,
    pub stream: SampleStream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub p: f64,
    pub s_grid: Vec<f64>,
    /// `||U(s)||_{p+1}` per successful sample.
    pub curves: Vec<Vec<f64>>,
    /// Fit of the mean log-norm against `log<s>` on the upper half of the grid.
    pub fit: Option<LinearFit>,
    pub exponent: f64,
    /// Two-standard-error band from the spread of per-sample slopes.
    pub exponent_band: (f64, f64),
    pub target: f64,
    /// Coefficient of `log(1 + log<s>)` when fitted jointly with the power
    /// over the whole grid; reported, not judged.
    pub log_power: Option<f64>,
    /// Same fit for the exact linear flow of the same samples.
    pub linear_exponent: f64,
    pub failures: Vec<SampleFailure>,
}

/// Least squares for `y = a + b x + c z`; returns `(b, c)`.
fn fit_two_regressors(xs: &[f64], zs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (mx, mz, my) = (mean(xs), mean(zs), mean(ys));
    let (mut sxx, mut szz, mut sxz, mut sxy, mut szy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((x, z), y) in xs.iter().zip(zs).zip(ys) {
        let (dx, dz, dy) = (x - mx, z - mz, y - my);
        sxx += dx * dx;
        szz += dz * dz;
        sxz += dx * dz;
        sxy += dx * dy;
        szy += dz * dy;
    }
    let det = sxx * szz - sxz * sxz;
    if det.abs() <= 1e-14 * sxx * szz {
        return None;
    }
    Some(((szz * sxy - sxz * szy) / det, (sxx * szy - sxz * sxy) / det))
}

fn log_slope(s_grid: &[f64], values: &[f64]) -> Option<LinearFit> {
    let range = upper_half(s_grid.len());
    let xs: Vec<f64> = s_grid[range.clone()].iter().map(|&s| japanese(s).ln()).collect();
    let ys: Vec<f64> = values[range].iter().map(|v| v.ln()).collect();
    linear_fit(&xs, &ys)
}

fn harmonic_lp(state: &SpectralState, basis: &BasisTable, q: f64) -> Result<f64> {
    let grid = basis.synthesize(state)?;
    Ok(lp_power_on_nodes(grid.values(), basis, q).powf(1.0 / q))
}

/// Decay of `||U(s)||_{p+1}` for random data. Each sample is evolved in the
/// harmonic picture and the flat norm recovered from the exact scaling of
/// Lebesgue norms under the lens.
pub fn decay_experiment(
    law: &CoefficientLaw,
    s_grid: &[f64],
    ens: EnsembleSpec,
    cfg: &SolverConfig,
) -> Result<DecayReport> {
    check_increasing(s_grid, "s_grid")?;
    if ens.samples == 0 {
        return Err(LabError::invalid("need at least one sample"));
    }
    let times = check_reach(s_grid, cfg)?;
    let p = cfg.p;
    let q = p + 1.0;
    let solver = HarmonicSolver::new(ens.modes, cfg.clone())?;

    let runs = ensemble(ens.stream, ens.samples, |stream| -> Result<(Vec<f64>, Vec<f64>)> {
        let u0 = sample(law, ens.modes, stream)?;
        let states = solver.states_at(&u0, 0.0, &times)?;
        let padded = solver.embed(&u0)?;
        let mut nonlinear = Vec::with_capacity(times.len());
        let mut linear = Vec::with_capacity(times.len());
        for (state, &t) in states.iter().zip(&times) {
            nonlinear.push(flat_lp_from_harmonic(harmonic_lp(state, solver.basis(), q)?, t, q)?);
            let free = linear_harmonic(&padded, t);
            linear.push(flat_lp_from_harmonic(harmonic_lp(&free, solver.basis(), q)?, t, q)?);
        }
        Ok((nonlinear, linear))
    });

    let mut curves = Vec::new();
    let mut linear_curves = Vec::new();
    let mut failures = Vec::new();
    for (k, run) in runs.into_iter().enumerate() {
        match run {
            Ok((a, b)) => {
                curves.push(a);
                linear_curves.push(b);
            }
            Err(e) => failures.push(SampleFailure { index: ens.stream.index + k as u64, error: e.to_string() }),
        }
    }
    if curves.is_empty() {
        return Err(LabError::NumericalFailure {
            time: times[times.len() - 1],
            detail: format!("all {} samples failed", ens.samples),
        });
    }

    let mean_log = |cs: &[Vec<f64>]| -> Vec<f64> {
        (0..s_grid.len())
            .map(|j| cs.iter().map(|c| c[j].ln()).sum::<f64>() / cs.len() as f64)
            .collect()
    };
    let mean_curve: Vec<f64> = mean_log(&curves).into_iter().map(f64::exp).collect();
    let fit = log_slope(s_grid, &mean_curve);
    let exponent = fit.map_or(f64::NAN, |f| f.slope);
    let slopes: Vec<f64> = curves
        .iter()
        .filter_map(|c| log_slope(s_grid, c).map(|f| f.slope))
        .collect();
    let (_, se) = mean_stderr(&slopes);
    let exponent_band = (exponent - 2.0 * se, exponent + 2.0 * se);

    let xs: Vec<f64> = s_grid.iter().map(|&s| japanese(s).ln()).collect();
    let zs: Vec<f64> = xs.iter().map(|x| (1.0 + x).ln()).collect();
    let log_power = fit_two_regressors(&xs, &zs, &mean_log(&curves)).map(|(_, c)| c);

    let linear_mean: Vec<f64> = mean_log(&linear_curves).into_iter().map(f64::exp).collect();
    let linear_exponent = log_slope(s_grid, &linear_mean).map_or(f64::NAN, |f| f.slope);

    Ok(DecayReport {
        p,
        s_grid: s_grid.to_vec(),
        curves,
        fit,
        exponent,
        exponent_band,
        target: target_decay_exponent(p),
        log_power,
        linear_exponent,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub p: f64,
    pub s_grid: Vec<f64>,
    /// `||V(s)||_{L²}` with `V(s) = exp(-i s d²) U(s) - U0`.
    pub profile_norms: Vec<f64>,
    /// `||V(s_j) - V(s_last)||_{L²}`; the last entry is zero.
    pub cauchy_residuals: Vec<f64>,
    /// Hermite coefficients of `W+ ~ V(s_last)`.
    pub w_plus: SpectralState,
    /// `W+` sampled on the requested box.
    pub w_plus_box: GridState,
    pub w_plus_norm: f64,
    /// Decay rate of the residuals against `<s>` on the upper half of the grid.
    pub eta_fit: Option<f64>,
    /// Residuals strictly decrease over the upper half of the grid.
    pub tail_monotone: bool,
    /// `false` for `p <= 3`, where no scattering is expected.
    pub scattering_expected: bool,
}

/// Scattering profile of one solution. With `U(s)` the lens image of the
/// harmonic solution `u(t)`, the profile is `exp(itH) u(t) - u0`, so the
/// whole computation stays in Hermite coefficients and is exact in `L²(R)`.
pub fn scattering_experiment(
    u0: &SpectralState,
    s_grid: &[f64],
    cfg: &SolverConfig,
    output_box: BoxGrid,
) -> Result<ScatteringReport> {
    check_increasing(s_grid, "s_grid")?;
    if s_grid[0] < 0.0 {
        return Err(LabError::invalid("s_grid must be non-negative"));
    }
    let times = check_reach(s_grid, cfg)?;
    let solver = HarmonicSolver::new(u0.len(), cfg.clone())?;
    let base = solver.embed(u0)?;
    let states = solver.states_at(u0, 0.0, &times)?;
    let profiles: Vec<SpectralState> = states
        .iter()
        .zip(&times)
        .map(|(u, &t)| {
            let back = linear_harmonic(u, -t);
            SpectralState::new(back.coeffs().iter().zip(base.coeffs()).map(|(a, b)| a - b).collect())
        })
        .collect();
    let last = profiles[profiles.len() - 1].clone();
    let profile_norms: Vec<f64> = profiles.iter().map(|v| v.mass().sqrt()).collect();
    let cauchy_residuals: Vec<f64> = profiles.iter().map(|v| v.distance(&last)).collect();

    let tail = upper_half(s_grid.len());
    let tail_end = s_grid.len() - 1;
    let tail_monotone = cauchy_residuals[tail.start..tail_end]
        .windows(2)
        .all(|w| w[1] < w[0]);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (tail.start..tail_end)
        .filter(|&j| cauchy_residuals[j] > 0.0)
        .map(|j| (japanese(s_grid[j]).ln(), cauchy_residuals[j].ln()))
        .unzip();
    let eta_fit = linear_fit(&xs, &ys).map(|f| -f.slope);

    let values = last.eval(&output_box.xs())?;
    Ok(ScatteringReport {
        p: cfg.p,
        s_grid: s_grid.to_vec(),
        profile_norms,
        cauchy_residuals,
        w_plus_norm: last.mass().sqrt(),
        w_plus: last,
        w_plus_box: GridState::new(values, Geometry::PeriodicBox(output_box)),
        eta_fit,
        tail_monotone,
        scattering_expected: cfg.p > 3.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub p: f64,
    pub s_grid: Vec<f64>,
    /// `||exp(i s d²) phi||_{p+1} |s|^(1/2 - 1/(p+1)) / ||phi||_{(p+1)'}`.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Slope of `log ratio` against `log s` over the last decade of the grid.
    pub plateau_slope: Option<f64>,
    /// Largest boundary-mass fraction met; large values mean the box is too small.
    pub max_boundary_mass: f64,
}

/// Dispersive estimate ratio for the free flow of `phi` on its box.
pub fn dispersion_check(phi: &GridState, p: f64, s_grid: &[f64]) -> Result<DispersionReport> {
    check_increasing(s_grid, "s_grid")?;
    if s_grid[0] <= 0.0 {
        return Err(LabError::invalid("s_grid must be positive"));
    }
    if !(p > 1.0) {
        return Err(LabError::invalid(format!("p must exceed 1, got {p}")));
    }
    let grid = phi.box_grid()?;
    let q = p + 1.0;
    let dual = q / p;
    let denom = box_lp_norm(phi.values(), &grid, dual);
    if denom == 0.0 {
        return Err(LabError::invalid("phi is zero"));
    }
    let exponent = 0.5 - 1.0 / q;
    let mut ratios = Vec::with_capacity(s_grid.len());
    let mut max_boundary_mass: f64 = 0.0;
    for &s in s_grid {
        let u = linear_free(phi, s)?;
        max_boundary_mass = max_boundary_mass.max(boundary_mass_fraction(u.values(), &grid));
        ratios.push(box_lp_norm(u.values(), &grid, q) * s.powf(exponent) / denom);
    }
    let s_last = s_grid[s_grid.len() - 1];
    let (xs, ys): (Vec<f64>, Vec<f64>) = s_grid
        .iter()
        .zip(&ratios)
        .filter(|(s, _)| **s >= s_last / 10.0)
        .map(|(s, r)| (s.ln(), r.ln()))
        .unzip();
    Ok(DispersionReport {
        p,
        s_grid: s_grid.to_vec(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
        plateau_slope: linear_fit(&xs, &ys).map(|f| f.slope),
        max_boundary_mass,
    })
}

/// Smooth even cutoff: `1` on `|y| <= plateau`, `0` for `|y| >= plateau + transition`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub plateau: f64,
    pub transition: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Self { plateau: 2.0, transition: 1.0 }
    }
}

impl Cutoff {
    pub fn eval(&self, y: f64) -> f64 {
        let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        let r = (y.abs() - self.plateau) / self.transition;
        if r <= 0.0 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            f(1.0 - r) / (f(1.0 - r) + f(r))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedDecayReport {
    pub sigma: f64,
    pub cutoff: Cutoff,
    pub s_grid: Vec<f64>,
    /// `||chi exp(i s d²) u||_{H^sigma}`.
    pub norms: Vec<f64>,
    /// Unlocalized `L²` norm along the same run.
    pub global_l2: Vec<f64>,
    /// Log-log slope on the upper half of the grid.
    pub fit_slope: Option<f64>,
    pub reference_slope: f64,
}

/// Localized Sobolev norm of the free evolution of `u`, sampled on `grid`.
pub fn localized_decay_experiment(
    u: &impl Field,
    grid: BoxGrid,
    sigma: f64,
    chi: Cutoff,
    s_grid: &[f64],
) -> Result<LocalizedDecayReport> {
    check_increasing(s_grid, "s_grid")?;
    if !(chi.plateau >= 0.0 && chi.transition > 0.0) || chi.plateau + chi.transition >= grid.half_width {
        return Err(LabError::invalid("cutoff must have positive transition and fit inside the box"));
    }
    let xs = grid.xs();
    let u0 = GridState::new(u.eval(&xs)?, Geometry::PeriodicBox(grid));
    let weights: Vec<f64> = xs.iter().map(|&y| chi.eval(y)).collect();
    let fft = BoxFft::new(grid.points);
    let mut norms = Vec::with_capacity(s_grid.len());
    let mut global_l2 = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let v = linear_free(&u0, s)?;
        global_l2.push(box_lp_norm(v.values(), &grid, 2.0));
        let local: Vec<Complex64> = v.values().iter().zip(&weights).map(|(a, w)| a * w).collect();
        norms.push(box_sobolev_norm(&local, &grid, sigma, &fft));
    }
    let range = upper_half(s_grid.len());
    let (fx, fy): (Vec<f64>, Vec<f64>) = range
        .filter(|&j| s_grid[j] > 0.0 && norms[j] > 0.0)
        .map(|j| (s_grid[j].ln(), norms[j].ln()))
        .unzip();
    Ok(LocalizedDecayReport {
        sigma,
        cutoff: chi,
        s_grid: s_grid.to_vec(),
        norms,
        global_l2,
        fit_slope: linear_fit(&fx, &fy).map(|f| f.slope),
        reference_slope: -0.25,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormGrowthReport {
    pub norm: NormKind,
    pub s_grid: Vec<f64>,
    /// Norm of the harmonic-picture state per sample and grid point.
    pub curves: Vec<Vec<f64>>,
    pub median_curve: Vec<f64>,
    /// `median² = a + b (ln s + 1)`.
    pub fit: Option<LinearFit>,
}

/// Tracks a weak norm of the harmonic-picture solution up to flat time
/// `s_max` on `points` log-spaced flat times in `[1, s_max]`.
pub fn norm_growth_experiment(
    law: &CoefficientLaw,
    s_max: f64,
    points: usize,
    norm: NormKind,
    ens: EnsembleSpec,
    cfg: &SolverConfig,
) -> Result<NormGrowthReport> {
    norm.validate()?;
    if !(s_max > 1.0) || points < 2 || ens.samples == 0 {
        return Err(LabError::invalid("need s_max > 1, at least two points and one sample"));
    }
    let s_grid: Vec<f64> = (0..points)
        .map(|j| s_max.powf(j as f64 / (points - 1) as f64))
        .collect();
    let times = check_reach(&s_grid, cfg)?;
    let solver = HarmonicSolver::new(ens.modes, cfg.clone())?;
    let curves = ensemble(ens.stream, ens.samples, |stream| -> Result<Vec<f64>> {
        let u0 = sample(law, ens.modes, stream)?;
        solver
            .states_at(&u0, 0.0, &times)?
            .iter()
            .map(|u| spectral_norm(u, norm, solver.basis()))
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let median_curve: Vec<f64> = (0..points)
        .map(|j| median(&curves.iter().map(|c| c[j]).collect::<Vec<_>>()))
        .collect();
    let xs: Vec<f64> = s_grid.iter().map(|s| s.ln() + 1.0).collect();
    let ys: Vec<f64> = median_curve.iter().map(|v| v * v).collect();
    Ok(NormGrowthReport { norm, fit: linear_fit(&xs, &ys), s_grid, curves, median_curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_exponents() {
        assert!((target_decay_exponent(5.0) + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(target_decay_exponent(7.0), -0.375);
    }

    #[test]
    fn cutoff_shape() {
        let chi = Cutoff::default();
        assert_eq!(chi.eval(0.0), 1.0);
        assert_eq!(chi.eval(-2.0), 1.0);
        assert_eq!(chi.eval(3.0), 0.0);
        assert!((chi.eval(2.5) - 0.5).abs() < 1e-15);
        assert!(chi.eval(2.2) > chi.eval(2.8));
    }

    #[test]
    fn two_regressor_fit_recovers_coefficients() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64 * 0.3).collect();
        let zs: Vec<f64> = xs.iter().map(|x| (1.0 + x).ln()).collect();
        let ys: Vec<f64> = xs.iter().zip(&zs).map(|(x, z)| 1.0 - 0.5 * x + 0.25 * z).collect();
        let (b, c) = fit_two_regressors(&xs, &zs, &ys).unwrap();
        assert!((b + 0.5).abs() < 1e-10 && (c - 0.25).abs() < 1e-10);
    }

    #[test]
    fn unreachable_grid_is_refused() {
        let cfg = SolverConfig::default();
        let ens = EnsembleSpec { modes: 8, samples: 1, stream: SampleStream::new(1, 0) };
        assert!(decay_experiment(&CoefficientLaw::Mu0, &[1.0, 50.0], ens, &cfg).is_err());
    }
}
