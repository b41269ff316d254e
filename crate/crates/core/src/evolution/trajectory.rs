use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Quantities recorded at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mass: f64,
    /// Harmonic runs only.
    pub energy: Option<f64>,
    /// `sum_j W_j |u_j|^(p+1)` on the solver nodes (harmonic runs only).
    pub potential_power: Option<f64>,
    /// `L^q` norms for the exponents in `SolverConfig::record_norms`.
    pub norms: Vec<f64>,
    /// Fraction of mass near the box edge (flat runs only).
    pub boundary_mass: Option<f64>,
    /// Nonlinear substeps taken since the previous record.
    pub substeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<Diagnostics>,
    pub norm_exponents: Vec<f64>,
    /// Set when the boundary mass crossed the warning threshold.
    pub warnings: Vec<String>,
}

impl<S> TrajectoryRecord<S> {
    pub(crate) fn new(norm_exponents: Vec<f64>) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Vec::new(),
            norm_exponents,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, state: S, diag: Diagnostics) {
        self.times.push(t);
        self.states.push(state);
        self.diagnostics.push(diag);
    }

    pub fn last_state(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = match self.diagnostics.first() {
            Some(d) if d.mass > 0.0 => d.mass,
            _ => return 0.0,
        };
        self.diagnostics
            .iter()
            .map(|d| ((d.mass - m0) / m0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `time,mass,energy,lp_<q>...`; floats use the
    /// shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,mass,energy");
        for q in &self.norm_exponents {
            let _ = write!(out, ",lp_{q}");
        }
        if self.diagnostics.iter().any(|d| d.boundary_mass.is_some()) {
            out.push_str(",boundary_mass");
        }
        out.push('\n');
        for (t, d) in self.times.iter().zip(&self.diagnostics) {
            let _ = write!(out, "{t:?},{:?}", d.mass);
            match d.energy {
                Some(e) => {
                    let _ = write!(out, ",{e:?}");
                }
                None => out.push(','),
            }
            for v in &d.norms {
                let _ = write!(out, ",{v:?}");
            }
            if let Some(b) = d.boundary_mass {
                let _ = write!(out, ",{b:?}");
            }
            out.push('\n');
        }
        out
    }
}
