use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest atom count for subset enumeration.
pub const MAX_ATOMS: usize = 24;

/// Finite measure on `m` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>) -> Result<Self> {
        if let Some(bad) = atoms.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(LabError::invalid(format!("atom mass {bad} is not a finite non-negative number")));
        }
        Ok(Self { atoms })
    }

    /// One mass per line; blank lines and lines starting with `#` are skipped.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut atoms = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| LabError::invalid(format!("reading line {}: {e}", k + 1)))?;
            let field = line.trim().trim_end_matches(',');
            if field.is_empty() || field.starts_with('#') {
                continue;
            }
            let v = field
                .parse::<f64>()
                .map_err(|_| LabError::invalid(format!("line {}: '{field}' is not a number", k + 1)))?;
            atoms.push(v);
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass of the subset encoded by the bits of `mask`.
    pub fn subset_mass(&self, mask: u64) -> f64 {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a)
            .sum()
    }
}

fn same_support_size(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.len() != nu.len() {
        return Err(LabError::invalid(format!("measures have {} and {} atoms", mu.len(), nu.len())));
    }
    if mu.is_empty() {
        return Err(LabError::invalid("measures have no atoms"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakLpConstant {
    pub p: f64,
    /// Smallest `C'` with `nu(f >= lambda) <= C' lambda^(-p)` for every atom value `lambda`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnReport {
    pub density: Vec<f64>,
    pub sup: f64,
    pub weak_lp: Vec<WeakLpConstant>,
}

/// Density `f = dmu/dnu` on atoms.
pub fn rn_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure, weak_exponents: &[f64]) -> Result<RnReport> {
    same_support_size(mu, nu)?;
    let mut density = Vec::with_capacity(mu.len());
    for (i, (&m, &n)) in mu.atoms().iter().zip(nu.atoms()).enumerate() {
        if n == 0.0 {
            if m > 0.0 {
                return Err(LabError::NotAbsolutelyContinuous { atom: i, mu: m });
            }
            density.push(0.0);
        } else {
            density.push(m / n);
        }
    }
    let sup = density.iter().copied().fold(0.0, f64::max);
    let weak_lp = weak_exponents
        .iter()
        .map(|&p| WeakLpConstant { p, constant: weak_lp_constant(&density, nu.atoms(), p) })
        .collect();
    Ok(RnReport { density, sup, weak_lp })
}

fn weak_lp_constant(density: &[f64], nu: &[f64], p: f64) -> f64 {
    density
        .iter()
        .filter(|&&lambda| lambda > 0.0)
        .map(|&lambda| {
            let level: f64 = density
                .iter()
                .zip(nu)
                .filter(|(f, _)| **f >= lambda)
                .map(|(_, n)| n)
                .sum();
            level * lambda.powf(p)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerScan {
    pub alpha: f64,
    /// `max_A mu(A) / nu(A)^alpha` over non-empty subsets; infinite when some
    /// `nu`-null set carries `mu` mass.
    pub best_c: f64,
    /// Atom indices of a maximising subset.
    pub witness: Vec<usize>,
}

/// Brute-force enumeration of all `2^m - 1` non-empty subsets.
pub fn power_inequality_scan(mu: &DiscreteMeasure, nu: &DiscreteMeasure, alpha: f64) -> Result<PowerScan> {
    same_support_size(mu, nu)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(LabError::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let m = mu.len();
    if m > MAX_ATOMS {
        return Err(LabError::invalid(format!("{m} atoms exceed the enumeration limit {MAX_ATOMS}")));
    }
    // Subset sums from two half tables; with integer masses they are exact.
    let low_bits = m / 2;
    let table = |meas: &DiscreteMeasure, shift: usize, bits: usize| -> Vec<f64> {
        (0..1u64 << bits).map(|mask| meas.subset_mass(mask << shift)).collect()
    };
    let (mu_lo, nu_lo) = (table(mu, 0, low_bits), table(nu, 0, low_bits));
    let (mu_hi, nu_hi) = (table(mu, low_bits, m - low_bits), table(nu, low_bits, m - low_bits));
    let lo_mask = (1u64 << low_bits) - 1;
    let ratio = |mask: u64| -> f64 {
        let (lo, hi) = ((mask & lo_mask) as usize, (mask >> low_bits) as usize);
        let a = mu_lo[lo] + mu_hi[hi];
        let b = nu_lo[lo] + nu_hi[hi];
        if b == 0.0 {
            if a > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else if alpha == 1.0 {
            a / b
        } else {
            a / b.powf(alpha)
        }
    };
    let total = 1u64 << m;
    let chunk = 1u64 << 12;
    let (best_c, best_mask) = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = (c * chunk).max(1);
            let end = ((c + 1) * chunk).min(total);
            (start..end).fold((f64::NEG_INFINITY, 0u64), |acc, mask| {
                let r = ratio(mask);
                if r > acc.0 {
                    (r, mask)
                } else {
                    acc
                }
            })
        })
        // Ties go to the smallest mask, independent of scheduling.
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let witness = (0..m).filter(|i| best_mask >> i & 1 == 1).collect();
    Ok(PowerScan { alpha, best_c: best_c.max(0.0), witness })
}
