use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stats::ks_two_sample;

use super::law::{complex_normal, ensemble, SampleStream};

/// What is fed through the phase rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationInput {
    /// Complex standard Gaussians: rotation invariant.
    Gaussian,
    /// `|g_n|`: not rotation invariant; used to check the test has power.
    Modulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    /// Larger of the two KS distances.
    pub statistic: f64,
    /// Bonferroni-combined p-value of the real-part and modulus tests.
    pub p_value: f64,
    pub ks_real: f64,
    pub p_real: f64,
    pub ks_modulus: f64,
    pub p_modulus: f64,
}

/// Compares `M` draws of `(g_n)` with `M` independent draws of
/// `(exp(-i (2n+1) t) g_n)` through two-sample KS tests on real parts and
/// moduli, pooled over the `N` modes.
pub fn rotation_invariance_test(
    t: f64,
    modes: usize,
    samples: usize,
    stream: SampleStream,
    input: RotationInput,
) -> Result<RotationReport> {
    if samples < 1000 {
        return Err(LabError::invalid(format!("need at least 1000 samples, got {samples}")));
    }
    if modes == 0 {
        return Err(LabError::invalid("need at least one mode"));
    }
    let draw = |s: SampleStream, rotate: bool| -> Vec<Complex64> {
        let mut rng = s.rng();
        (0..modes)
            .map(|n| {
                let g = complex_normal(&mut rng);
                let g = match input {
                    RotationInput::Gaussian => g,
                    RotationInput::Modulus => Complex64::new(g.norm(), 0.0),
                };
                if rotate {
                    g * Complex64::from_polar(1.0, -((2 * n + 1) as f64) * t)
                } else {
                    g
                }
            })
            .collect()
    };
    let plain: Vec<Complex64> = ensemble(stream, samples, |s| draw(s, false)).into_iter().flatten().collect();
    let rotated: Vec<Complex64> = ensemble(stream.offset(samples as u64), samples, |s| draw(s, true))
        .into_iter()
        .flatten()
        .collect();

    let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<f64>>();
    let abs = |v: &[Complex64]| v.iter().map(|z| z.norm()).collect::<Vec<f64>>();
    let (ks_real, p_real) = ks_two_sample(&re(&plain), &re(&rotated));
    let (ks_modulus, p_modulus) = ks_two_sample(&abs(&plain), &abs(&rotated));

    Ok(RotationReport {
        statistic: ks_real.max(ks_modulus),
        p_value: (2.0 * p_real.min(p_modulus)).min(1.0),
        ks_real,
        p_real,
        ks_modulus,
        p_modulus,
    })
}
