//! Symbol models a(t, x, ξ), validation against analytic symbol classes,
//! Hamiltonian flow integration with the variational equation, and the phase
//!
//! ```text
//!     ψ(t) = ∫₀ᵗ ( ξ^s·a_ξ(s, x^s, ξ^s) − a(s, x^s, ξ^s) ) ds
//! ```
//!
//! accumulated alongside the flow.

pub mod flow;
pub mod registry;
pub mod validate;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

pub use flow::{
    flow_map_on_lattice, integrate_flow, invert_flow_point, phase_gradient_check, FlowMapTable,
    FlowResult,
};
pub use registry::{builtin, builtin_names};
pub use validate::{validate_symbol, SymbolBox, ValidationReport};

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type TimeScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type GeneralFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// a(z) = ½ zᵀQz with Q symmetric, z = (x…, ξ…).
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub q: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() % 2 != 0 {
            return Err(CoreError::SymbolMismatch("Q must be square of size 2d".into()));
        }
        let sym = (&q - q.transpose()).abs().max();
        if sym > 1e-12 {
            return Err(CoreError::SymbolMismatch(format!("Q not symmetric (dev {sym:.1e})")));
        }
        Ok(Self { q })
    }
}

/// k(ξ) + V(t, x) with optional analytic first derivatives (d = 1 closures
/// return the single-axis derivative).
#[derive(Clone)]
pub struct Separable {
    pub kinetic: ScalarFn,
    pub potential: TimeScalarFn,
    pub kinetic_grad: Option<ScalarFn>,
    pub potential_grad: Option<TimeScalarFn>,
}

/// Primary classification used for method dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    QuadraticForm,
    Separable,
    General,
}

/// Real-valued Hamiltonian symbol with derivative access.
///
/// A symbol may carry several equivalent descriptions at once (the harmonic
/// oscillator is both a quadratic form and kinetic-plus-potential); solvers
/// pick the most structured one they can use.
#[derive(Clone)]
pub struct SymbolModel {
    name: String,
    dim: usize,
    time_dependent: bool,
    quadratic: Option<QuadraticForm>,
    separable: Option<Separable>,
    general: Option<GeneralFn>,
}

impl std::fmt::Debug for SymbolModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("kind", &self.kind())
            .field("time_dependent", &self.time_dependent)
            .finish()
    }
}

/// Relative step for central differences, h = 1e−5·(1 + |z|).
fn fd_step(z_mag: f64) -> f64 {
    1e-5 * (1.0 + z_mag)
}

impl SymbolModel {
    pub fn quadratic_form(name: impl Into<String>, q: DMatrix<f64>) -> Result<Self> {
        let qf = QuadraticForm::new(q)?;
        let dim = qf.q.nrows() / 2;
        Ok(Self {
            name: name.into(),
            dim,
            time_dependent: false,
            quadratic: Some(qf),
            separable: None,
            general: None,
        })
    }

    pub fn separable(
        name: impl Into<String>,
        dim: usize,
        sep: Separable,
        time_dependent: bool,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            time_dependent,
            quadratic: None,
            separable: Some(sep),
            general: None,
        }
    }

    pub fn general(
        name: impl Into<String>,
        dim: usize,
        eval: GeneralFn,
        time_dependent: bool,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            time_dependent,
            quadratic: None,
            separable: None,
            general: Some(eval),
        }
    }

    /// Attach a separable description to a quadratic symbol (or vice versa).
    pub fn with_separable(mut self, sep: Separable) -> Self {
        self.separable = Some(sep);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn kind(&self) -> SymbolKind {
        if self.quadratic.is_some() {
            SymbolKind::QuadraticForm
        } else if self.separable.is_some() {
            SymbolKind::Separable
        } else {
            SymbolKind::General
        }
    }

    pub fn quadratic(&self) -> Option<&QuadraticForm> {
        self.quadratic.as_ref()
    }

    pub fn separable_parts(&self) -> Option<&Separable> {
        self.separable.as_ref()
    }

    pub fn evaluate(&self, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(xi.len(), self.dim);
        if let Some(q) = &self.quadratic {
            let mut z = DVector::zeros(2 * self.dim);
            for i in 0..self.dim {
                z[i] = x[i];
                z[self.dim + i] = xi[i];
            }
            return 0.5 * (z.transpose() * &q.q * &z)[(0, 0)];
        }
        if let Some(s) = &self.separable {
            return (s.kinetic)(xi) + (s.potential)(t, x);
        }
        (self.general.as_ref().expect("symbol has at least one description"))(t, x, xi)
    }

    /// Convenience evaluation in one dimension.
    pub fn evaluate1(&self, t: f64, x: f64, xi: f64) -> f64 {
        self.evaluate(t, &[x], &[xi])
    }

    /// ∇_x a; analytic when the structure provides it, else central differences.
    pub fn grad_x(&self, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        if let Some(q) = &self.quadratic {
            let d = self.dim;
            return (0..d)
                .map(|i| {
                    let mut acc = 0.0;
                    for m in 0..d {
                        acc += q.q[(i, m)] * x[m] + q.q[(i, d + m)] * xi[m];
                    }
                    acc
                })
                .collect();
        }
        if self.dim == 1 {
            if let Some(s) = &self.separable {
                if let Some(gp) = &s.potential_grad {
                    return vec![(gp)(t, x)];
                }
            }
        }
        (0..self.dim).map(|i| self.fd_grad_x_axis(t, x, xi, i)).collect()
    }

    /// ∇_ξ a; analytic where available.
    pub fn grad_xi(&self, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        if let Some(q) = &self.quadratic {
            let d = self.dim;
            return (0..d)
                .map(|i| {
                    let mut acc = 0.0;
                    for m in 0..d {
                        acc += q.q[(d + i, m)] * x[m] + q.q[(d + i, d + m)] * xi[m];
                    }
                    acc
                })
                .collect();
        }
        if self.dim == 1 {
            if let Some(s) = &self.separable {
                if let Some(gk) = &s.kinetic_grad {
                    return vec![(gk)(xi)];
                }
            }
        }
        (0..self.dim).map(|i| self.fd_grad_xi_axis(t, x, xi, i)).collect()
    }

    fn fd_grad_x_axis(&self, t: f64, x: &[f64], xi: &[f64], axis: usize) -> f64 {
        let zmag = (x.iter().chain(xi).map(|v| v * v).sum::<f64>()).sqrt();
        let h = fd_step(zmag);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += h;
        xm[axis] -= h;
        (self.evaluate(t, &xp, xi) - self.evaluate(t, &xm, xi)) / (2.0 * h)
    }

    fn fd_grad_xi_axis(&self, t: f64, x: &[f64], xi: &[f64], axis: usize) -> f64 {
        let zmag = (x.iter().chain(xi).map(|v| v * v).sum::<f64>()).sqrt();
        let h = fd_step(zmag);
        let mut kp = xi.to_vec();
        let mut km = xi.to_vec();
        kp[axis] += h;
        km[axis] -= h;
        (self.evaluate(t, x, &kp) - self.evaluate(t, x, &km)) / (2.0 * h)
    }

    /// Full Hessian in z = (x, ξ), 2d×2d. Separable symbols have vanishing
    /// mixed x-ξ blocks by structure.
    pub fn hessian(&self, t: f64, x: &[f64], xi: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        if let Some(q) = &self.quadratic {
            return q.q.clone();
        }
        let n = 2 * d;
        let mut h = DMatrix::zeros(n, n);
        let zmag = (x.iter().chain(xi).map(|v| v * v).sum::<f64>()).sqrt();
        let step = 1e-4 * (1.0 + zmag);
        let eval = |z: &DVector<f64>| {
            let xs: Vec<f64> = z.iter().take(d).copied().collect();
            let ks: Vec<f64> = z.iter().skip(d).copied().collect();
            self.evaluate(t, &xs, &ks)
        };
        let mut z0 = DVector::zeros(n);
        for i in 0..d {
            z0[i] = x[i];
            z0[d + i] = xi[i];
        }
        let separable = self.separable.is_some();
        for i in 0..n {
            let mut zp = z0.clone();
            let mut zm = z0.clone();
            zp[i] += step;
            zm[i] -= step;
            h[(i, i)] = (eval(&zp) - 2.0 * eval(&z0) + eval(&zm)) / (step * step);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let crosses_blocks = (i < d) != (j < d);
                if separable && crosses_blocks {
                    continue;
                }
                let v = fd_mixed(&z0, i, j, step, &eval);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

fn fd_mixed(
    z0: &DVector<f64>,
    i: usize,
    j: usize,
    step: f64,
    eval: &impl Fn(&DVector<f64>) -> f64,
) -> f64 {
    let mut zpp = z0.clone();
    let mut zpm = z0.clone();
    let mut zmp = z0.clone();
    let mut zmm = z0.clone();
    zpp[i] += step;
    zpp[j] += step;
    zpm[i] += step;
    zpm[j] -= step;
    zmp[i] -= step;
    zmp[j] += step;
    zmm[i] -= step;
    zmm[j] -= step;
    (eval(&zpp) - eval(&zpm) - eval(&zmp) + eval(&zmm)) / (4.0 * step * step)
}
