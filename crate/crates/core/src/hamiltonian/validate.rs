//! Sampled validation of symbols against analytic derivative-growth bounds.
//!
//! This is a heuristic, not a proof: mixed derivatives are sampled on a box
//! and the per-order maxima are checked for faster-than-geometric growth.
//! Restricted to a compact box any smooth function satisfies factorial
//! bounds with *some* constant, so the flag intentionally reacts to steep
//! low-order growth (large effective C) rather than to a formal violation.

use crate::error::{CoreError, Result};

use super::{SymbolKind, SymbolModel};

/// Sampling box `[x_min, x_max] × [ξ_min, ξ_max]` (d = 1).
#[derive(Debug, Clone, Copy)]
pub struct SymbolBox {
    pub x_min: f64,
    pub x_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl SymbolBox {
    pub fn centered(x_half: f64, xi_half: f64) -> Self {
        Self { x_min: -x_half, x_max: x_half, xi_min: -xi_half, xi_max: xi_half }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Orders k..=k_max actually examined.
    pub orders: Vec<usize>,
    /// max over samples and multi-indices of |∂^α a| per total order.
    pub max_derivative: Vec<f64>,
    /// max |∂^α a| / (C^{|α|+1} α!) per order, with the best-fit C below.
    pub max_ratios: Vec<f64>,
    pub best_c: f64,
    /// Consecutive-order growth test u_{m+1}/u_m > 1.5 fired somewhere.
    pub flagged: bool,
    /// This report samples a heuristic, not a proof.
    pub heuristic: bool,
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// m-fold iterated central difference along one variable: offsets m−2p with
/// binomial weights, denominator (2h)^m.
fn iterated_diff(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    let mut acc = 0.0;
    for (p, v) in values.iter().enumerate() {
        let w = if p % 2 == 0 { binomial(m, p) } else { -binomial(m, p) };
        acc += w * v;
    }
    acc / (2.0 * h).powi(m as i32)
}

/// |∂^i_x ∂^j_ξ a| at one point by composed central differences.
fn mixed_derivative(a: &SymbolModel, t: f64, x: f64, xi: f64, i: usize, j: usize) -> f64 {
    let zmag = (x * x + xi * xi).sqrt();
    let order = i + j;
    // step balances truncation against roundoff for the composed stencil
    let h = (f64::EPSILON).powf(1.0 / (order as f64 + 2.0)) * (1.0 + zmag);
    let mut outer = Vec::with_capacity(i + 1);
    for p in 0..=i {
        let xp = x + (i as f64 - 2.0 * p as f64) * h;
        if j == 0 {
            outer.push(a.evaluate1(t, xp, xi));
        } else {
            let inner: Vec<f64> = (0..=j)
                .map(|q| a.evaluate1(t, xp, xi + (j as f64 - 2.0 * q as f64) * h))
                .collect();
            outer.push(iterated_diff(&inner, h));
        }
    }
    if i == 0 {
        outer[0].abs()
    } else {
        iterated_diff(&outer, h).abs()
    }
}

/// Sample mixed derivatives of total order `k..=k_max` over the box and
/// report growth diagnostics. Quadratic symbols short-circuit analytically;
/// separable symbols have vanishing mixed derivatives by structure.
pub fn validate_symbol(
    a: &SymbolModel,
    t: f64,
    k: usize,
    boxr: SymbolBox,
    k_max: usize,
) -> Result<ValidationReport> {
    if a.dim() != 1 {
        return Err(CoreError::Unsupported("symbol validation is one-dimensional".into()));
    }
    if k_max > 6 {
        return Err(CoreError::OutOfRange(
            "k_max beyond 6 is not stable for finite differences".into(),
        ));
    }
    if k > k_max {
        return Err(CoreError::OutOfRange("k must not exceed k_max".into()));
    }
    const NS: usize = 9;
    let xs: Vec<f64> = (0..NS)
        .map(|i| boxr.x_min + (boxr.x_max - boxr.x_min) * i as f64 / (NS - 1) as f64)
        .collect();
    let xis: Vec<f64> = (0..NS)
        .map(|i| boxr.xi_min + (boxr.xi_max - boxr.xi_min) * i as f64 / (NS - 1) as f64)
        .collect();

    let orders: Vec<usize> = (k..=k_max).collect();
    let mut max_derivative = vec![0.0f64; orders.len()];
    let mut max_normalized = vec![0.0f64; orders.len()]; // max |∂^α a| / α!β!
    for (oi, &m) in orders.iter().enumerate() {
        for i in 0..=m {
            let j = m - i;
            let norm = factorial(i) * factorial(j);
            let u = if a.kind() == SymbolKind::QuadraticForm {
                // derivatives of order ≥ 3 vanish; orders ≤ 2 come from Q
                let q = &a.quadratic().unwrap().q;
                match (m, i, j) {
                    (2, 2, 0) => q[(0, 0)].abs(),
                    (2, 1, 1) => q[(0, 1)].abs(),
                    (2, 0, 2) => q[(1, 1)].abs(),
                    (0, _, _) | (1, _, _) => {
                        let mut v: f64 = 0.0;
                        for &x in &[boxr.x_min, boxr.x_max] {
                            for &xi in &[boxr.xi_min, boxr.xi_max] {
                                let g = if m == 0 {
                                    a.evaluate1(t, x, xi).abs()
                                } else if i == 1 {
                                    a.grad_x(t, &[x], &[xi])[0].abs()
                                } else {
                                    a.grad_xi(t, &[x], &[xi])[0].abs()
                                };
                                v = v.max(g);
                            }
                        }
                        v
                    }
                    _ => 0.0,
                }
            } else if a.kind() == SymbolKind::Separable && i > 0 && j > 0 {
                0.0 // mixed derivatives vanish by structure
            } else {
                let mut worst: f64 = 0.0;
                for &x in &xs {
                    for &xi in &xis {
                        worst = worst.max(mixed_derivative(a, t, x, xi, i, j));
                    }
                }
                worst
            };
            max_derivative[oi] = max_derivative[oi].max(u);
            max_normalized[oi] = max_normalized[oi].max(u / norm);
        }
    }

    let mut best_c: f64 = 0.0;
    for (oi, &m) in orders.iter().enumerate() {
        best_c = best_c.max(max_normalized[oi].powf(1.0 / (m as f64 + 1.0)));
    }
    let max_ratios: Vec<f64> = orders
        .iter()
        .zip(&max_normalized)
        .map(|(&m, &g)| if best_c == 0.0 { 0.0 } else { g / best_c.powi(m as i32 + 1) })
        .collect();

    // growth flag: plain consecutive-order ratio on the raw maxima
    let scale = max_derivative.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = 1e-6 * scale.max(1.0);
    let mut flagged = false;
    for w in max_derivative.windows(2) {
        if w[1] > tol && w[0] > tol && w[1] / w[0] > 1.5 {
            flagged = true;
        }
    }

    Ok(ValidationReport { orders, max_derivative, max_ratios, best_c, flagged, heuristic: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::registry::builtin;
    use std::sync::Arc;

    #[test]
    fn quadratic_passes_with_vanishing_high_orders() {
        let a = builtin("free").unwrap();
        let rep = validate_symbol(&a, 0.0, 3, SymbolBox::centered(3.0, 3.0), 6).unwrap();
        assert!(!rep.flagged, "{rep:?}");
        assert!(rep.max_derivative.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn bounded_analytic_potential_passes() {
        let a = builtin("anharmonic-bounded").unwrap();
        let rep = validate_symbol(&a, 0.0, 2, SymbolBox::centered(3.0, 3.0), 6).unwrap();
        assert!(!rep.flagged, "{rep:?}");
        // |∂^k cos| ≤ 1 ≤ C^{k+1} k! with C = 1: orders ≥ 3 contribute ≤ ~1
        for (m, u) in rep.orders.iter().zip(&rep.max_derivative) {
            if *m >= 3 {
                assert!(*u < 1.1, "order {m}: {u}");
            }
        }
    }

    #[test]
    fn gaussian_bump_symbol_is_flagged() {
        // a = ξ² + e^{x²} grows super-geometrically across orders on |x| ≤ 3
        let a = SymbolModel::general(
            "squared-exponential",
            1,
            Arc::new(|_t, x: &[f64], xi: &[f64]| xi[0] * xi[0] + (x[0] * x[0]).exp()),
            false,
        );
        let rep = validate_symbol(&a, 0.0, 2, SymbolBox::centered(3.0, 3.0), 5).unwrap();
        assert!(rep.flagged, "{rep:?}");
    }

    use crate::hamiltonian::SymbolModel;
}
