use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolution::{nonlinearity_coefficient, HarmonicSolver, SolverConfig};
use crate::lens::check_harmonic_time;
use crate::random::{ensemble, sample_with_alphas, CoefficientLaw, SampleStream};
use crate::spectral::{lp_power_on_nodes, BasisTable, NormKind, SpectralState, spectral_norm};
use crate::stats::{mean_stderr, median};

/// Inverse temperature of the weighted measures: `dnu_t = exp(-beta alpha) dmu0`.
/// With unit-variance coefficients the Gibbs density of `mu0` is
/// `exp(-2 K)`, so `beta = 2` makes `nu_t` the Gibbs measure of the full energy.
pub const DEFAULT_BETA: f64 = 2.0;

/// A set of states, tested on the `N`-mode collocation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventPredicate {
    /// `||u||_{L^p} <= radius`; an infinite radius is the whole space.
    LpBall { p: f64, radius: f64 },
    /// `||u||_{H^sigma} <= radius` in the harmonic Sobolev scale.
    SobolevBall { sigma: f64, radius: f64 },
    /// `lower_n <= |c_n| <= upper_n` for every listed mode.
    CoeffBox { bounds: Vec<(f64, f64)> },
}

impl EventPredicate {
    pub fn whole_space() -> Self {
        EventPredicate::LpBall { p: 2.0, radius: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        let radius = match self {
            EventPredicate::LpBall { p, radius } => {
                NormKind::Lp { p: *p }.validate()?;
                *radius
            }
            EventPredicate::SobolevBall { sigma, radius } => {
                NormKind::Sobolev { sigma: *sigma }.validate()?;
                *radius
            }
            EventPredicate::CoeffBox { bounds } => {
                if bounds.iter().any(|(lo, hi)| !(*lo >= 0.0 && lo <= hi)) {
                    return Err(LabError::invalid("coefficient box needs 0 <= lower <= upper"));
                }
                return Ok(());
            }
        };
        if !(radius > 0.0) {
            return Err(LabError::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(())
    }

    pub fn contains(&self, u: &SpectralState, basis: &BasisTable) -> Result<bool> {
        match self {
            EventPredicate::LpBall { radius, .. } | EventPredicate::SobolevBall { radius, .. }
                if radius.is_infinite() =>
            {
                Ok(true)
            }
            EventPredicate::LpBall { p, radius } => Ok(spectral_norm(u, NormKind::Lp { p: *p }, basis)? <= *radius),
            EventPredicate::SobolevBall { sigma, radius } => {
                Ok(spectral_norm(u, NormKind::Sobolev { sigma: *sigma }, basis)? <= *radius)
            }
            EventPredicate::CoeffBox { bounds } => Ok(bounds.iter().enumerate().all(|(n, (lo, hi))| {
                let a = u.coeffs().get(n).map_or(0.0, |c| c.norm());
                *lo <= a && a <= *hi
            })),
        }
    }

    /// Copy of a ball with a new radius.
    pub fn with_radius(&self, r: f64) -> Result<Self> {
        match self {
            EventPredicate::LpBall { p, .. } => Ok(EventPredicate::LpBall { p: *p, radius: r }),
            EventPredicate::SobolevBall { sigma, .. } => Ok(EventPredicate::SobolevBall { sigma: *sigma, radius: r }),
            EventPredicate::CoeffBox { .. } => Err(LabError::invalid("a coefficient box has no radius")),
        }
    }

    fn norm_kind(&self) -> Option<NormKind> {
        match self {
            EventPredicate::LpBall { p, .. } => Some(NormKind::Lp { p: *p }),
            EventPredicate::SobolevBall { sigma, .. } => Some(NormKind::Sobolev { sigma: *sigma }),
            EventPredicate::CoeffBox { .. } => None,
        }
    }
}

/// `alpha(t, u) = cos(2t)^((p-5)/2) / (p+1) * ||u||_{p+1}^{p+1}` on the nodes of `basis`.
pub fn alpha(t: f64, u: &SpectralState, p: f64, basis: &BasisTable) -> Result<f64> {
    check_harmonic_time(t)?;
    let grid = basis.synthesize(u)?;
    Ok(nonlinearity_coefficient(t, p) / (p + 1.0) * lp_power_on_nodes(grid.values(), basis, p + 1.0))
}

/// Density `exp(-beta alpha(t, u))` of `nu_t` against `mu0`.
pub fn nu_weight(t: f64, u: &SpectralState, p: f64, beta: f64, basis: &BasisTable) -> Result<f64> {
    Ok((-beta * alpha(t, u, p, basis)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    /// No sample hit the event, or the value is below ten standard errors.
    pub censored: bool,
    /// Samples dropped after a solver failure.
    pub failed: usize,
    /// More than 1% of the samples failed.
    pub flagged: bool,
}

impl WeightedEstimate {
    fn from_terms(terms: &[f64], stream: SampleStream, failed: usize) -> Self {
        let (value, stderr) = mean_stderr(terms);
        let total = terms.len() + failed;
        WeightedEstimate {
            value,
            stderr,
            samples: terms.len(),
            seed: stream.seed,
            censored: value == 0.0 || value < 10.0 * stderr,
            failed,
            flagged: failed as f64 > 0.01 * total as f64,
        }
    }
}

/// Truncated `mu0` on `modes` modes with the weights `exp(-beta alpha)`.
#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    p: f64,
    beta: f64,
    samples: usize,
    stream: SampleStream,
    basis: BasisTable,
    alphas: Vec<f64>,
}

/// Settings echoed into measure reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEcho {
    pub p: f64,
    pub beta: f64,
    pub modes: usize,
    pub samples: usize,
    pub seed: u64,
    pub stream_index: u64,
}

impl WeightedEnsemble {
    pub fn new(p: f64, modes: usize, samples: usize, stream: SampleStream) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(LabError::invalid(format!("p must exceed 1, got {p}")));
        }
        if samples < 100 {
            return Err(LabError::invalid(format!("need at least 100 samples, got {samples}")));
        }
        Ok(Self {
            p,
            beta: DEFAULT_BETA,
            samples,
            stream,
            basis: BasisTable::collocation(modes)?,
            alphas: CoefficientLaw::Mu0.alphas(modes)?,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(LabError::invalid(format!("beta must be positive, got {beta}")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn basis(&self) -> &BasisTable {
        &self.basis
    }

    pub fn echo(&self) -> EnsembleEcho {
        EnsembleEcho {
            p: self.p,
            beta: self.beta,
            modes: self.basis.modes(),
            samples: self.samples,
            seed: self.stream.seed,
            stream_index: self.stream.index,
        }
    }

    pub fn draw(&self, k: u64) -> SpectralState {
        sample_with_alphas(&self.alphas, self.stream.offset(k))
    }

    pub fn weight(&self, t: f64, u: &SpectralState) -> Result<f64> {
        nu_weight(t, u, self.p, self.beta, &self.basis)
    }

    /// `nu_t(A)`: mean of `1_A(u) exp(-beta alpha(t, u))` over the samples.
    pub fn estimate_event(&self, t: f64, event: &EventPredicate) -> Result<WeightedEstimate> {
        check_harmonic_time(t)?;
        event.validate()?;
        let terms = ensemble(self.stream, self.samples, |s| -> Result<f64> {
            let u = sample_with_alphas(&self.alphas, s);
            self.term(t, &u, &u, event)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        Ok(WeightedEstimate::from_terms(&terms, self.stream, 0))
    }

    fn term(&self, t: f64, weighted: &SpectralState, tested: &SpectralState, event: &EventPredicate) -> Result<f64> {
        if event.contains(tested, &self.basis)? {
            self.weight(t, weighted)
        } else {
            Ok(0.0)
        }
    }

    /// `nu_0(Phi(t,0)^(-1) A)`: mean of `1_A(Phi(t,0) u) exp(-beta alpha(0, u))`,
    /// with `Phi` the collocation flow on the same `N` modes.
    pub fn estimate_pullback(&self, t: f64, event: &EventPredicate, cfg: &SolverConfig) -> Result<WeightedEstimate> {
        event.validate()?;
        let solver = HarmonicSolver::unpadded(self.basis.modes(), cfg.clone().with_p(self.p))?;
        let outcomes = ensemble(self.stream, self.samples, |s| -> Result<Option<f64>> {
            let u = sample_with_alphas(&self.alphas, s);
            let mut v = u.clone();
            match solver.advance(&mut v, 0.0, t) {
                Ok(_) => Ok(Some(self.term(0.0, &u, &v, event)?)),
                Err(e) if e.is_numerical() => Ok(None),
                Err(e) => Err(e),
            }
        });
        let mut terms = Vec::with_capacity(self.samples);
        let mut failed = 0;
        for o in outcomes {
            match o? {
                Some(v) => terms.push(v),
                None => failed += 1,
            }
        }
        if terms.is_empty() {
            return Err(LabError::NumericalFailure { time: t, detail: "every sample failed".into() });
        }
        Ok(WeightedEstimate::from_terms(&terms, self.stream, failed))
    }

    /// Median of the event norm under `mu0`, from a pilot ensemble on a stream
    /// disjoint from the main one.
    pub fn median_radius(&self, event: &EventPredicate, pilot: usize) -> Result<f64> {
        let kind = event
            .norm_kind()
            .ok_or_else(|| LabError::invalid("median calibration needs a ball event"))?;
        let start = self.stream.offset(self.samples as u64);
        let norms = ensemble(start, pilot.max(1), |s| {
            spectral_norm(&sample_with_alphas(&self.alphas, s), kind, &self.basis)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        Ok(median(&norms))
    }
}

/// `x^(cos(2t)^((5-p)/2))` for `p <= 5`, `x` for `p >= 5`.
pub fn monotonicity_bound(p: f64, t: f64, x: f64) -> Result<f64> {
    check_harmonic_time(t)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(LabError::invalid(format!("x must lie in [0, 1], got {x}")));
    }
    Ok(x.powf(bound_exponent(p, t)))
}

fn bound_exponent(p: f64, t: f64) -> f64 {
    if p >= 5.0 {
        1.0
    } else {
        (2.0 * t).cos().powf(0.5 * (5.0 - p))
    }
}

/// Minimum of `(k/e) F^(1 - 1/k)` over `k >= 1`, returned as `(k*, value)`.
pub fn holder_envelope(f: f64) -> Result<(f64, f64)> {
    if !(f > 0.0 && f < 1.0) {
        return Err(LabError::invalid(format!("F must lie in (0, 1), got {f}")));
    }
    let e = std::f64::consts::E;
    if f <= 1.0 / e {
        let k = -f.ln();
        Ok((k, -f * f.ln()))
    } else {
        Ok((1.0, 1.0 / e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotonicityVerdict {
    Holds,
    ViolatedWithinNoise,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityConfig {
    pub t: f64,
    pub event: EventPredicate,
    pub ensemble: EnsembleEcho,
    pub dt: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr_lhs: f64,
    pub stderr_rhs: f64,
    /// `None` when either side is censored.
    pub verdict: Option<MonotonicityVerdict>,
    pub pullback: WeightedEstimate,
    pub event_estimate: WeightedEstimate,
    pub exponent: f64,
    pub config: MonotonicityConfig,
}

/// Compares `nu_0(Phi(t,0)^(-1) A)` with the bound applied to `nu_t(A)`, both
/// estimated from the same samples.
pub fn monotonicity_experiment(
    ens: &WeightedEnsemble,
    t: f64,
    event: &EventPredicate,
    cfg: &SolverConfig,
) -> Result<MonotonicityReport> {
    let pullback = ens.estimate_pullback(t, event, cfg)?;
    let at_t = ens.estimate_event(t, event)?;
    let exponent = bound_exponent(ens.p, t);
    let rhs = monotonicity_bound(ens.p, t, at_t.value.clamp(0.0, 1.0))?;
    let stderr_rhs = if at_t.value > 0.0 {
        exponent * at_t.value.powf(exponent - 1.0) * at_t.stderr
    } else {
        0.0
    };
    let lhs = pullback.value;
    let combined = pullback.stderr.hypot(stderr_rhs);
    let verdict = if pullback.censored || at_t.censored {
        None
    } else if lhs <= rhs + 2.0 * combined {
        Some(MonotonicityVerdict::Holds)
    } else if lhs > rhs + 4.0 * combined {
        Some(MonotonicityVerdict::Violated)
    } else {
        Some(MonotonicityVerdict::ViolatedWithinNoise)
    };
    Ok(MonotonicityReport {
        lhs,
        rhs,
        stderr_lhs: pullback.stderr,
        stderr_rhs,
        verdict,
        pullback,
        event_estimate: at_t,
        exponent,
        config: MonotonicityConfig { t, event: event.clone(), ensemble: ens.echo(), dt: cfg.dt, theta: cfg.theta },
    })
}
