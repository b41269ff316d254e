//! Diagonal Gaussian laws on Hermite coefficients and the experiments built
//! on them.

mod equivalence;
mod invariance;
pub mod io;
mod law;
mod tails;

pub use equivalence::{equivalence_diagnostic, EquivalenceReport, Verdict, EQUIVALENT_EXPONENT, SINGULAR_EXPONENT};
pub use invariance::{rotation_invariance_test, RotationInput, RotationReport};
pub use law::{complex_normal, ensemble, sample, CoefficientLaw, SampleStream};
pub use tails::{smoothing_tail_experiment, sup_wsp_inf_along_orbit, time_grid, TailPoint, TailReport};

pub(crate) use law::sample_with_alphas;
