use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::random::{ensemble, SampleStream};

/// Planar vector fields of the classical lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorField {
    /// `x' = v, v' = -x`.
    HarmonicOscillator,
    /// `x' = x, y' = y`.
    Expanding,
    /// `x' = v, v' = -sin x`.
    Pendulum,
}

impl VectorField {
    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        let [x, v] = z;
        match self {
            VectorField::HarmonicOscillator => [v, -x],
            VectorField::Expanding => [x, v],
            VectorField::Pendulum => [v, -x.sin()],
        }
    }
}

/// Densities `g` of the classical lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Density {
    Uniform,
    /// `exp(-(x² + v²)/2)`.
    Gaussian,
}

impl Density {
    pub fn eval(&self, z: [f64; 2]) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Gaussian => (-0.5 * (z[0] * z[0] + z[1] * z[1])).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    /// Largest `|sum_k d_k (g F_k)|` over the random points.
    pub max_divergence_residual: f64,
    /// `g`-weighted volume of the image of the reference box after unit time,
    /// divided by that of the box.
    pub volume_factor: f64,
    /// `|volume_factor - 1|`.
    pub volume_drift: f64,
}

fn add(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + s * b[0], a[1] + s * b[1]]
}

fn rk4_flow(field: VectorField, mut z: [f64; 2], time: f64, steps: usize) -> [f64; 2] {
    let h = time / steps as f64;
    for _ in 0..steps {
        let k1 = field.eval(z);
        let k2 = field.eval(add(z, k1, 0.5 * h));
        let k3 = field.eval(add(z, k2, 0.5 * h));
        let k4 = field.eval(add(z, k3, h));
        z = [
            z[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            z[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    z
}

const DIFF_STEP: f64 = 1e-5;
const FLOW_STEPS: usize = 200;
const CLOUD_SIDE: usize = 40;

fn divergence(field: VectorField, g: Density, z: [f64; 2]) -> f64 {
    let flux = |z: [f64; 2], k: usize| g.eval(z) * field.eval(z)[k];
    (0..2)
        .map(|k| {
            let mut plus = z;
            let mut minus = z;
            plus[k] += DIFF_STEP;
            minus[k] -= DIFF_STEP;
            (flux(plus, k) - flux(minus, k)) / (2.0 * DIFF_STEP)
        })
        .sum()
}

/// Checks `sum_k d_k (g F_k) = 0` at random points of `[-2, 2]²` and measures
/// how the flow changes the `g`-weighted volume of `[-1/2, 1/2]²` in unit time.
pub fn liouville_check(field: VectorField, g: Density, samples: usize, stream: SampleStream) -> Result<LiouvilleReport> {
    if samples == 0 {
        return Err(LabError::invalid("need at least one sample point"));
    }
    let residuals = ensemble(stream, samples, |s| {
        let mut rng = s.rng();
        let z = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        divergence(field, g, z)
    });
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(LabError::invalid("field or density is not finite at a sample point"));
    }
    let max_divergence_residual = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);

    // Midpoint cloud over the reference box; each cell carries g(Phi z) det DPhi(z).
    let h = 1.0 / CLOUD_SIDE as f64;
    let mut before = 0.0;
    let mut after = 0.0;
    for i in 0..CLOUD_SIDE {
        for j in 0..CLOUD_SIDE {
            let z = [-0.5 + (i as f64 + 0.5) * h, -0.5 + (j as f64 + 0.5) * h];
            let image = rk4_flow(field, z, 1.0, FLOW_STEPS);
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut plus = z;
                let mut minus = z;
                plus[k] += DIFF_STEP;
                minus[k] -= DIFF_STEP;
                let (a, b) = (rk4_flow(field, plus, 1.0, FLOW_STEPS), rk4_flow(field, minus, 1.0, FLOW_STEPS));
                for r in 0..2 {
                    jac[r][k] = (a[r] - b[r]) / (2.0 * DIFF_STEP);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            before += g.eval(z);
            after += g.eval(image) * det;
        }
    }
    let volume_factor = after / before;
    Ok(LiouvilleReport { max_divergence_residual, volume_factor, volume_drift: (volume_factor - 1.0).abs() })
}

/// Measure-preserving maps of the recurrence lab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum RecurrenceMap {
    /// Rotation of the circle `[0, 1)` by `numerator / denominator` of a turn,
    /// computed in exact integer arithmetic.
    RationalRotation { numerator: u64, denominator: u64 },
    /// Rotation by the golden-ratio fraction `(sqrt 5 - 1)/2` of a turn.
    GoldenRotation,
    /// Time-one map of `x' = v, v' = -x` (rotation of the plane by one radian).
    OscillatorTimeOne,
}

/// Sets of positive measure on which orbits start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "kebab-case")]
pub enum RecurrenceSet {
    /// Arc `[start, start + length)` of the circle `[0, 1)`.
    Arc { start: f64, length: f64 },
    /// Disc in the plane.
    Ball { x: f64, v: f64, radius: f64 },
    /// The whole circle.
    FullCircle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    /// First return time per starting point; `None` if beyond `n_max`.
    pub return_times: Vec<Option<u64>>,
    pub fraction_returned: f64,
}

fn in_arc(x: f64, start: f64, length: f64) -> bool {
    (x - start).rem_euclid(1.0) < length
}

/// First-return statistics for orbits started uniformly in `set`.
pub fn poincare_recurrence(
    map: RecurrenceMap,
    set: RecurrenceSet,
    n_max: u64,
    samples: usize,
    stream: SampleStream,
) -> Result<RecurrenceReport> {
    let planar = matches!(map, RecurrenceMap::OscillatorTimeOne);
    match (planar, set) {
        (false, RecurrenceSet::Ball { .. }) | (true, RecurrenceSet::Arc { .. } | RecurrenceSet::FullCircle) => {
            return Err(LabError::invalid("set does not live in the phase space of the map"));
        }
        (_, RecurrenceSet::Arc { length, .. }) if !(length > 0.0 && length <= 1.0) => {
            return Err(LabError::invalid("arc length must lie in (0, 1]"));
        }
        (_, RecurrenceSet::Ball { radius, .. }) if !(radius > 0.0) => {
            return Err(LabError::invalid("ball radius must be positive"));
        }
        _ => {}
    }
    if let RecurrenceMap::RationalRotation { denominator: 0, .. } = map {
        return Err(LabError::invalid("rotation denominator must be positive"));
    }
    if samples == 0 {
        return Err(LabError::invalid("need at least one starting point"));
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let return_times = ensemble(stream, samples, |s| {
        let mut rng = s.rng();
        match set {
            RecurrenceSet::Ball { x, v, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                let z = [x + r * phi.cos(), v + r * phi.sin()];
                (1..=n_max).find(|&n| {
                    // x' = v, v' = -x rotates clockwise by n radians.
                    let (s, c) = (n as f64).sin_cos();
                    let w = [c * z[0] + s * z[1], -s * z[0] + c * z[1]];
                    (w[0] - x).hypot(w[1] - v) < radius
                })
            }
            _ => {
                let x0 = match set {
                    RecurrenceSet::Arc { start, length } => (start + length * rng.random::<f64>()).rem_euclid(1.0),
                    _ => rng.random::<f64>(),
                };
                let inside = |x: f64| match set {
                    RecurrenceSet::Arc { start, length } => in_arc(x, start, length),
                    _ => true,
                };
                (1..=n_max).find(|&n| {
                    let shift = match map {
                        RecurrenceMap::RationalRotation { numerator, denominator } => {
                            ((n as u128 * numerator as u128) % denominator as u128) as f64 / denominator as f64
                        }
                        _ => (n as f64 * golden).fract(),
                    };
                    let x = if shift == 0.0 { x0 } else { (x0 + shift).rem_euclid(1.0) };
                    inside(x)
                })
            }
        }
    });
    let returned = return_times.iter().filter(|r| r.is_some()).count();
    Ok(RecurrenceReport { fraction_returned: returned as f64 / samples as f64, return_times })
}
