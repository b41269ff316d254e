use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stats::linear_fit;

use super::law::CoefficientLaw;

/// Decay exponents at or above this classify the pair as equivalent.
pub const EQUIVALENT_EXPONENT: f64 = 1.2;
/// Decay exponents at or below this classify the pair as singular.
pub const SINGULAR_EXPONENT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    Singular,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Partial sums of `(alpha_n / beta_n - 1)^2`.
    pub ratio_partial_sums: Vec<f64>,
    /// Partial sums of `(log alpha_n - log beta_n)^2`.
    pub log_partial_sums: Vec<f64>,
    /// Slope of `log increment` against `log(n+1)` over the upper half of
    /// the terms (log criterion). `-inf` when the tail increments vanish.
    pub tail_slope: f64,
    /// Same slope for the ratio criterion.
    pub ratio_tail_slope: f64,
    pub verdict: Verdict,
}

/// Fitted slope of the increments over the upper half of the range.
/// Returns `-inf` if every increment there is zero.
fn tail_slope(increments: &[f64]) -> f64 {
    let start = increments.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = increments[start..]
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0)
        .map(|(k, d)| (((start + k + 1) as f64).ln(), d.ln()))
        .unzip();
    if xs.is_empty() {
        return f64::NEG_INFINITY;
    }
    match linear_fit(&xs, &ys) {
        Some(fit) => fit.slope,
        // a single nonzero increment: no decay information
        None => 0.0,
    }
}

/// Classifies two diagonal Gaussian laws by the decay of the increments of
/// both equivalence criteria. The verdict uses the log criterion, which is
/// symmetric in the two laws.
pub fn equivalence_diagnostic(a: &CoefficientLaw, b: &CoefficientLaw, terms: usize) -> Result<EquivalenceReport> {
    if terms < 16 {
        return Err(LabError::invalid(format!("need at least 16 terms, got {terms}")));
    }
    let alpha = a.alphas(terms)?;
    let beta = b.alphas(terms)?;

    let ratio_inc: Vec<f64> = alpha.iter().zip(&beta).map(|(x, y)| (x / y - 1.0).powi(2)).collect();
    let log_inc: Vec<f64> = alpha.iter().zip(&beta).map(|(x, y)| (x.ln() - y.ln()).powi(2)).collect();

    let partial = |inc: &[f64]| {
        inc.iter()
            .scan(0.0, |s, d| {
                *s += d;
                Some(*s)
            })
            .collect::<Vec<f64>>()
    };

    let slope = tail_slope(&log_inc);
    let q = -slope;
    let verdict = if q >= EQUIVALENT_EXPONENT {
        Verdict::Equivalent
    } else if q <= SINGULAR_EXPONENT {
        Verdict::Singular
    } else {
        Verdict::Inconclusive
    };

    Ok(EquivalenceReport {
        ratio_partial_sums: partial(&ratio_inc),
        log_partial_sums: partial(&log_inc),
        tail_slope: slope,
        ratio_tail_slope: tail_slope(&ratio_inc),
        verdict,
    })
}
