//! Numerical laboratory for the one-dimensional defocusing nonlinear
//! Schrödinger equation with Gaussian random initial data.
//!
//! The crate is organised around six pieces:
//!
//! * [`spectral`]: Hermite eigenbasis of `H = -d²/dx² + x²`, Gauss–Hermite
//!   quadrature, transforms, harmonic Sobolev and Lebesgue norms, and the
//!   periodic-box grid used by the flat solver.
//! * [`random`]: counter-based sampling of diagonal Gaussian laws (the
//!   harmonic Gibbs law `mu0` among them), equivalence diagnostics, the
//!   phase-rotation test and the smoothing tail experiment.
//! * [`lens`]: the explicit change of variables between flat NLS on the line
//!   and the weighted harmonic NLS on `|t| < pi/4`.
//! * [`evolution`]: split-step integrators for both pictures, exact linear
//!   propagators, the energy functional, and the decay / scattering /
//!   dispersion experiments.
//! * [`measure`]: the weighted measures `nu_t`, Monte Carlo event estimates,
//!   the monotonicity experiment, discrete Radon–Nikodym tools, the
//!   globalisation budget and a small classical-mechanics lab.
//! * [`stats`]: the few estimators shared by the experiments.

pub mod error;
pub mod evolution;
pub mod lens;
pub mod measure;
pub mod random;
pub mod spectral;
pub mod stats;

pub use error::{LabError, Result};
pub use num_complex::Complex64;

pub use evolution::{SolverConfig, TrajectoryRecord};
pub use random::{CoefficientLaw, SampleStream};
pub use spectral::{BasisTable, BoxGrid, Geometry, GridState, NormKind, QuadratureRule, SpectralState};
