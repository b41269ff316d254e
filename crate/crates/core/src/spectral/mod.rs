//! Hermite eigenbasis of the harmonic oscillator, quadrature, transforms and
//! norms, plus the periodic box used by the flat solver.

mod hermite;
mod norms;
mod periodic;
mod quadrature;
mod state;

pub use hermite::{evaluate_expansion, hermite_function, BasisTable, HermiteRecurrence};
pub use norms::{grid_norm, lp_power_on_nodes, spectral_norm, NormKind};
pub use periodic::{box_lp_norm, box_sobolev_norm, interpolate, BoxFft, BoxGrid};
pub use quadrature::{QuadratureRule, MAX_NODES};
pub use state::{Geometry, GridState, SpectralState};

/// Default number of modes.
pub const DEFAULT_MODES: usize = 64;

/// Coherent state of the oscillator: a Gaussian displaced to position
/// `sqrt(2) Re(a)` with momentum `sqrt(2) Im(a)`, times `amplitude`.
/// Coefficients `amplitude * exp(-|a|^2/2) a^n / sqrt(n!)`.
pub fn coherent_state(a: num_complex::Complex64, amplitude: f64, modes: usize) -> SpectralState {
    let mut coeffs = Vec::with_capacity(modes);
    let mut term = num_complex::Complex64::new(amplitude * (-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 0..modes {
        coeffs.push(term);
        term = term * a / ((n + 1) as f64).sqrt();
    }
    SpectralState::new(coeffs)
}
