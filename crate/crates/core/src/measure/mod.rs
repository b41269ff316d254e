//! Weighted Gaussian measures on the truncated phase space and the
//! finite-dimensional tools around them.
//!
//! `nu_t` lives on the `N`-mode collocation space, where the harmonic flow is
//! an exact Hamiltonian system, so Liouville's theorem applies verbatim to
//! the discrete dynamics.

mod budget;
mod classical;
mod discrete;
mod weighted;

pub use budget::{bourgain_budget, log_growth_bound, BourgainBudget};
pub use classical::{
    liouville_check, poincare_recurrence, Density, LiouvilleReport, RecurrenceMap, RecurrenceReport, RecurrenceSet,
    VectorField,
};
pub use discrete::{power_inequality_scan, rn_discrete, DiscreteMeasure, PowerScan, RnReport, WeakLpConstant, MAX_ATOMS};
pub use weighted::{
    alpha, holder_envelope, monotonicity_bound, monotonicity_experiment, nu_weight, EnsembleEcho, EventPredicate,
    MonotonicityConfig, MonotonicityReport, MonotonicityVerdict, WeightedEnsemble, WeightedEstimate, DEFAULT_BETA,
};
