use crate::error::{LabError, Result};

use super::hermite::HermiteRecurrence;

/// Upper limit on the number of nodes (and modes) the lab builds.
pub const MAX_NODES: usize = 4096;

/// Gauss–Hermite rule with the Gaussian weight folded into the stored weights.
///
/// `weights()[j]` is `w_j * exp(x_j^2)` where `w_j` is the classical weight for
/// `∫ f(x) exp(-x^2) dx`. Applied to products of Hermite functions it computes
/// `L²(R)` inner products directly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_hermite(count: usize) -> Result<Self> {
        if count == 0 || count > MAX_NODES {
            return Err(LabError::invalid(format!(
                "quadrature node count must lie in 1..={MAX_NODES}, got {count}"
            )));
        }
        let mut nodes = jacobi_eigenvalues(count)?;
        nodes.sort_by(|a, b| a.total_cmp(b));

        for x in nodes.iter_mut() {
            *x = polish_root(*x, count)?;
        }
        // Mirror so the rule is symmetric bit for bit.
        for j in 0..count / 2 {
            let r = 0.5 * (nodes[count - 1 - j] - nodes[j]);
            nodes[j] = -r;
            nodes[count - 1 - j] = r;
        }
        if count % 2 == 1 {
            nodes[count / 2] = 0.0;
        }

        // Christoffel–Darboux at a root of e_n: w_j e^{x_j^2} = 1 / (n e_{n-1}(x_j)^2).
        let mut weights = Vec::with_capacity(count);
        for &x in &nodes {
            let e = HermiteRecurrence::new(x).nth(count - 1).unwrap_or(0.0);
            let w = 1.0 / (count as f64 * e * e);
            if !w.is_finite() {
                return Err(LabError::NumericalFailure {
                    time: 0.0,
                    detail: format!("non-finite quadrature weight at node {x}"),
                });
            }
            weights.push(w);
        }
        for j in 0..count / 2 {
            let w = 0.5 * (weights[j] + weights[count - 1 - j]);
            weights[j] = w;
            weights[count - 1 - j] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Compensated weights `w_j exp(x_j^2)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Classical Gauss–Hermite weight `w_j` for the `exp(-x^2)` convention.
    /// Underflows to zero for the outermost nodes of large rules.
    pub fn gaussian_weight(&self, j: usize) -> f64 {
        let x = self.nodes[j];
        self.weights[j] * (-x * x).exp()
    }
}

/// Newton refinement of a root of `e_n` using the scaled recurrence, which
/// returns `e_n` and `e_{n-1}` with a shared scale factor.
fn polish_root(mut x: f64, n: usize) -> Result<f64> {
    for _ in 0..8 {
        let (prev, cur) = HermiteRecurrence::new(x).scaled_pair(n);
        // e_n' = sqrt(2n) e_{n-1} - x e_n
        let deriv = (2.0 * n as f64).sqrt() * prev - x * cur;
        if deriv == 0.0 || !deriv.is_finite() {
            return Err(LabError::NumericalFailure {
                time: 0.0,
                detail: format!("Newton derivative vanished near node {x}"),
            });
        }
        let dx = cur / deriv;
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Eigenvalues of the Jacobi matrix of the Hermite weight (zero diagonal,
/// off-diagonal `sqrt(k/2)`), by implicit QL without eigenvectors.
fn jacobi_eigenvalues(n: usize) -> Result<Vec<f64>> {
    let mut d = vec![0.0_f64; n];
    let mut e: Vec<f64> = (0..n)
        .map(|k| if k + 1 < n { ((k + 1) as f64 / 2.0).sqrt() } else { 0.0 })
        .collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(LabError::NumericalFailure {
                    time: 0.0,
                    detail: "tridiagonal QL iteration did not converge".into(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn nodes_symmetric_and_increasing() {
        for n in [1, 2, 7, 8, 33, 128] {
            let rule = QuadratureRule::gauss_hermite(n).unwrap();
            let x = rule.nodes();
            for j in 1..n {
                assert!(x[j] > x[j - 1]);
            }
            for j in 0..n {
                assert!((x[j] + x[n - 1 - j]).abs() <= 1e-12);
            }
            assert!(rule.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn two_point_rule_closed_form() {
        let rule = QuadratureRule::gauss_hermite(2).unwrap();
        let r = 0.5_f64.sqrt();
        assert!((rule.nodes()[1] - r).abs() < 1e-15);
        assert!((rule.gaussian_weight(1) - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // ∫ x^{2k} e^{-x^2} dx = Γ(k + 1/2)
        let n = 12;
        let rule = QuadratureRule::gauss_hermite(n).unwrap();
        let mut gamma_half = PI.sqrt(); // Γ(1/2)
        for k in 0..n {
            let deg = 2 * k;
            let sum: f64 = (0..n)
                .map(|j| rule.gaussian_weight(j) * rule.nodes()[j].powi(deg as i32))
                .sum();
            assert!(
                ((sum - gamma_half) / gamma_half).abs() < 1e-10,
                "degree {deg}: {sum} vs {gamma_half}"
            );
            gamma_half *= k as f64 + 0.5;
            // odd moments vanish
            let odd: f64 = (0..n)
                .map(|j| rule.gaussian_weight(j) * rule.nodes()[j].powi(deg as i32 + 1))
                .sum();
            assert!(odd.abs() < 1e-10 * gamma_half.max(1.0));
        }
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(QuadratureRule::gauss_hermite(0).is_err());
        assert!(QuadratureRule::gauss_hermite(MAX_NODES + 1).is_err());
    }
}
