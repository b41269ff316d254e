use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::SpectralState;

/// Position in the counter-based random stream: sample `index` of the
/// ensemble keyed by `seed`. Draws are a pure function of `(seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub index: u64,
}

impl SampleStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Stream of the `k`-th sample after this one.
    pub fn offset(&self, k: u64) -> Self {
        Self { seed: self.seed, index: self.index.wrapping_add(k) }
    }

    /// A ChaCha generator positioned at the start of this sample's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// `(g1 + i g2) / sqrt(2)` with independent standard normals, so `E|g|^2 = 1`.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Positive sequence `alpha_n` of a diagonal Gaussian law
/// `sum_n alpha_n g_n e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum CoefficientLaw {
    /// `alpha_n = (2n+1)^(-1/2)`: the Gibbs law of the linear harmonic flow.
    Mu0,
    /// `alpha_n = (2n+3)^(-1/2)`.
    Shifted,
    /// `alpha_n = c (2n+1)^(-1/2)`.
    Scaled { factor: f64 },
    Custom { alpha: Vec<f64> },
}

impl CoefficientLaw {
    pub fn alpha(&self, n: usize) -> Result<f64> {
        let a = match self {
            CoefficientLaw::Mu0 => ((2 * n + 1) as f64).powf(-0.5),
            CoefficientLaw::Shifted => ((2 * n + 3) as f64).powf(-0.5),
            CoefficientLaw::Scaled { factor } => factor * ((2 * n + 1) as f64).powf(-0.5),
            CoefficientLaw::Custom { alpha } => *alpha.get(n).ok_or_else(|| {
                LabError::invalid(format!("custom law has {} entries, mode {n} requested", alpha.len()))
            })?,
        };
        if !(a.is_finite() && a > 0.0) {
            return Err(LabError::invalid(format!("alpha_{n} = {a} is not a positive finite number")));
        }
        Ok(a)
    }

    pub fn alphas(&self, modes: usize) -> Result<Vec<f64>> {
        (0..modes).map(|n| self.alpha(n)).collect()
    }

    /// Numeric tag used in the binary ensemble header.
    pub fn id(&self) -> u64 {
        match self {
            CoefficientLaw::Mu0 => 0,
            CoefficientLaw::Shifted => 1,
            CoefficientLaw::Scaled { .. } => 2,
            CoefficientLaw::Custom { .. } => 3,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mu0" => Ok(CoefficientLaw::Mu0),
            "shifted" => Ok(CoefficientLaw::Shifted),
            other => match other.strip_prefix("scaled:") {
                Some(c) => c
                    .parse::<f64>()
                    .map(|factor| CoefficientLaw::Scaled { factor })
                    .map_err(|_| LabError::invalid(format!("bad scale factor in '{other}'"))),
                None => Err(LabError::invalid(format!(
                    "unknown law '{other}' (expected mu0, shifted or scaled:<c>)"
                ))),
            },
        }
    }
}

/// One draw `c_n = alpha_n g_n`, `n < modes`.
pub fn sample(law: &CoefficientLaw, modes: usize, stream: SampleStream) -> Result<SpectralState> {
    if modes == 0 {
        return Err(LabError::invalid("need at least one mode"));
    }
    let alphas = law.alphas(modes)?;
    Ok(sample_with_alphas(&alphas, stream))
}

pub(crate) fn sample_with_alphas(alphas: &[f64], stream: SampleStream) -> SpectralState {
    let mut rng = stream.rng();
    SpectralState::new(alphas.iter().map(|&a| complex_normal(&mut rng) * a).collect())
}

/// Maps `f` over `count` consecutive samples in parallel; the output is in
/// sample order whatever the thread count.
pub fn ensemble<T, F>(stream: SampleStream, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(SampleStream) -> T + Sync + Send,
{
    (0..count as u64).into_par_iter().map(|k| f(stream.offset(k))).collect()
}
