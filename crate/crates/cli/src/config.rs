//! Effective run configuration: built-in defaults, then an optional flat
//! JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use nlslab_core::evolution::{SolverConfig, DEFAULT_T_CAP};
use nlslab_core::measure::{Density, VectorField, DEFAULT_BETA};
use nlslab_core::{BoxGrid, CoefficientLaw, NormKind, SampleStream};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Every parameter any subcommand reads. Serialized verbatim into each JSON
/// summary, with defaults resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub modes: usize,
    /// Quadrature nodes for the transform checks; `0` means `2 * modes`.
    pub quad: usize,
    pub p: f64,
    pub box_half_width: f64,
    pub box_points: usize,
    pub dt: f64,
    pub theta: f64,
    pub t_cap: f64,
    pub padding: usize,
    pub coupling: f64,
    pub record_every: usize,
    pub samples: usize,
    pub seed: u64,
    /// `mu0`, `shifted` or `scaled:<c>`.
    pub law: String,
    /// Second law of the equivalence diagnostic.
    pub law_b: String,
    pub terms: usize,
    /// Harmonic time for `monotonicity`; end time for `evolve`.
    pub t: f64,
    /// `sample` (a draw of `law`) or `coherent`.
    pub init: String,
    pub amplitude: f64,
    /// Displacement of the coherent state.
    pub center: f64,
    /// `harmonic` or `flat`, for `evolve`.
    pub geometry: String,
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    pub sigma: f64,
    pub plateau: f64,
    pub transition: f64,
    /// Event radius for `monotonicity`; `null` calibrates to the median.
    pub radius: Option<f64>,
    pub pilot: usize,
    pub beta: f64,
    /// Tail radii; empty picks quantiles of the run itself.
    pub radii: Vec<f64>,
    pub time_points: usize,
    /// `sobolev:<sigma>`, `lp:<p>` or `wsp:<sigma>:<p>`.
    pub norm: String,
    pub kappa: f64,
    pub c: f64,
    pub big_c: f64,
    pub bourgain_radii: Vec<f64>,
    pub mu: Option<PathBuf>,
    pub nu: Option<PathBuf>,
    pub alpha: f64,
    pub weak_p: Vec<f64>,
    pub field: VectorField,
    pub density: Density,
    /// `rational:<a>/<b>`, `golden` or `oscillator`.
    pub map: String,
    /// `arc:<start>:<length>`, `ball:<x>:<v>:<radius>` or `full`.
    pub set: String,
    pub n_max: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            modes: 64,
            quad: 0,
            p: solver.p,
            box_half_width: solver.box_grid.half_width,
            box_points: solver.box_grid.points,
            dt: solver.dt,
            theta: solver.theta,
            t_cap: DEFAULT_T_CAP,
            padding: solver.padding,
            coupling: solver.coupling,
            record_every: 10,
            samples: 1000,
            seed: 0,
            law: "mu0".into(),
            law_b: "shifted".into(),
            terms: 4096,
            t: 0.3,
            init: "sample".into(),
            amplitude: 1.0,
            center: 1.0,
            geometry: "harmonic".into(),
            s_min: 5.0,
            s_max: 50.0,
            s_points: 16,
            sigma: 0.1,
            plateau: 2.0,
            transition: 1.0,
            radius: None,
            pilot: 2000,
            beta: DEFAULT_BETA,
            radii: Vec::new(),
            time_points: 64,
            norm: "sobolev:-0.1".into(),
            kappa: 2.0,
            c: 1.0,
            big_c: 1.0,
            bourgain_radii: vec![10.0],
            mu: None,
            nu: None,
            alpha: 1.0,
            weak_p: vec![2.0],
            field: VectorField::HarmonicOscillator,
            density: Density::Uniform,
            map: "rational:1/7".into(),
            set: "arc:0:0.1".into(),
            n_max: 1000,
        }
    }
}

/// Flags that override configuration entries. Field names match
/// `RunConfig` so both merge as JSON objects.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Overrides {
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long = "box-half-width", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_half_width: Option<f64>,
    #[arg(long = "box-points", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_points: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[arg(long = "t-cap", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[arg(long = "record-every", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[arg(long = "law-b", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law_b: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    #[arg(long = "s-min", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
    #[arg(long = "s-max", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[arg(long = "s-points", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_points: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[arg(long = "time-points", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_points: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long = "big-c", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    /// Radii of the time-step budget.
    #[arg(long = "R", global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bourgain_radii: Option<Vec<f64>>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long = "weak-p", global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_p: Option<Vec<f64>>,
    /// `harmonic-oscillator`, `expanding` or `pendulum`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// `uniform` or `gaussian`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[arg(long = "n-max", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
}

fn object(v: Value, what: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!("{what} must be a JSON object"))),
    }
}

impl RunConfig {
    /// Defaults, overlaid by the file at `path` (if any), overlaid by `flags`.
    pub fn resolve(path: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut merged = object(serde_json::to_value(RunConfig::default()).expect("config serializes"), "defaults")?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("reading config {}: {e}", path.display())))?;
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("parsing config {}: {e}", path.display())))?;
            merged.extend(object(file, "config file")?);
        }
        merged.extend(object(serde_json::to_value(flags).expect("flags serialize"), "flags")?);
        let mut cfg: RunConfig =
            serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if cfg.quad == 0 {
            cfg.quad = 2 * cfg.modes;
        }
        cfg.solver()?.validate()?;
        if cfg.modes == 0 {
            return Err(CliError::Usage("modes must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        Ok(SolverConfig {
            p: self.p,
            dt: self.dt,
            theta: self.theta,
            t_cap: self.t_cap,
            box_grid: self.box_grid()?,
            record_every: self.record_every,
            coupling: self.coupling,
            padding: self.padding,
            record_norms: Vec::new(),
        })
    }

    pub fn box_grid(&self) -> Result<BoxGrid, CliError> {
        Ok(BoxGrid::new(self.box_half_width, self.box_points)?)
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream::new(self.seed, 0)
    }

    pub fn coefficient_law(&self) -> Result<CoefficientLaw, CliError> {
        Ok(CoefficientLaw::parse(&self.law)?)
    }

    /// `samples` geometric points in `[s_min, s_max]`.
    pub fn s_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min) || self.s_points < 2 {
            return Err(CliError::Usage("need 0 < s_min < s_max and at least two s points".into()));
        }
        let ratio = (self.s_max / self.s_min).ln();
        let last = self.s_points - 1;
        Ok((0..self.s_points)
            .map(|j| if j == last { self.s_max } else { self.s_min * (ratio * j as f64 / last as f64).exp() })
            .collect())
    }

    pub fn norm_kind(&self) -> Result<NormKind, CliError> {
        let parts: Vec<&str> = self.norm.split(':').collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number '{s}' in norm '{}'", self.norm)))
        };
        let kind = match parts.as_slice() {
            ["sobolev", s] => NormKind::Sobolev { sigma: num(s)? },
            ["lp", p] => NormKind::Lp { p: num(p)? },
            ["wsp", s, p] => NormKind::Wsp { sigma: num(s)?, p: num(p)? },
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown norm '{}' (expected sobolev:<s>, lp:<p> or wsp:<s>:<p>)",
                    self.norm
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}
