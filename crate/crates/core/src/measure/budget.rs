use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Time-step bookkeeping of the globalisation argument at radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BourgainBudget {
    pub kappa: f64,
    pub c: f64,
    pub big_c: f64,
    pub radius: f64,
    /// Local existence time `R^(-kappa)`.
    pub tau: f64,
    /// Horizon `exp(cR/2)`.
    pub horizon: f64,
    /// `2 floor(T / tau) + 1`, as a float so huge counts stay representable.
    pub steps: f64,
    /// `steps * C exp(-cR)`.
    pub union_bound: f64,
    /// `C exp(-cR/2)`.
    pub target: f64,
    pub ratio: f64,
    /// `(R + 1)^(1/2)`.
    pub norm_level: f64,
    /// `tau > T`: a single step covers the horizon.
    pub degenerate: bool,
}

pub fn bourgain_budget(kappa: f64, c: f64, big_c: f64, radius: f64) -> Result<BourgainBudget> {
    if [kappa, c, big_c, radius].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(LabError::invalid("budget parameters must be positive and finite"));
    }
    let tau = radius.powf(-kappa);
    let horizon = (0.5 * c * radius).exp();
    let degenerate = tau > horizon;
    let steps = if degenerate { 1.0 } else { 2.0 * (horizon / tau).floor() + 1.0 };
    let union_bound = steps * big_c * (-c * radius).exp();
    let target = big_c * (-0.5 * c * radius).exp();
    Ok(BourgainBudget {
        kappa,
        c,
        big_c,
        radius,
        tau,
        horizon,
        steps,
        union_bound,
        target,
        ratio: union_bound / target,
        norm_level: (radius + 1.0).sqrt(),
        degenerate,
    })
}

/// `C (ln|t| + 1)^(1/2)` for `|t| >= 1`, the growth allowed on the good set.
pub fn log_growth_bound(big_c: f64, t: f64) -> f64 {
    big_c * (t.abs().max(1.0).ln() + 1.0).sqrt()
}
