//! Built-in symbol registry addressable by name.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Separable, SymbolModel};

/// Names and one-line descriptions of the built-in symbols.
pub fn builtin_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("free", "free particle, a = ξ²"),
        ("harmonic", "harmonic oscillator, a = (x² + ξ²)/2"),
        ("shear", "hyperbolic shear, a = xξ"),
        ("anharmonic-bounded", "a = ξ² + cos x (bounded analytic potential)"),
        ("kicked", "a = ξ² + cos(x)·s(t) with a smooth switch s"),
    ]
}

/// Smooth switch used by the "kicked" symbol.
fn switch(t: f64) -> f64 {
    0.5 * (1.0 + ((t - 0.5) / 0.1).tanh())
}

pub fn builtin(name: &str) -> Option<SymbolModel> {
    match name {
        "free" => {
            let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]);
            let sep = Separable {
                kinetic: Arc::new(|xi: &[f64]| xi[0] * xi[0]),
                potential: Arc::new(|_t, _x| 0.0),
                kinetic_grad: Some(Arc::new(|xi: &[f64]| 2.0 * xi[0])),
                potential_grad: Some(Arc::new(|_t, _x| 0.0)),
            };
            Some(SymbolModel::quadratic_form("free", q).unwrap().with_separable(sep))
        }
        "harmonic" => {
            let q = DMatrix::identity(2, 2);
            let sep = Separable {
                kinetic: Arc::new(|xi: &[f64]| 0.5 * xi[0] * xi[0]),
                potential: Arc::new(|_t, x: &[f64]| 0.5 * x[0] * x[0]),
                kinetic_grad: Some(Arc::new(|xi: &[f64]| xi[0])),
                potential_grad: Some(Arc::new(|_t, x: &[f64]| x[0])),
            };
            Some(SymbolModel::quadratic_form("harmonic", q).unwrap().with_separable(sep))
        }
        "shear" => {
            let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
            Some(SymbolModel::quadratic_form("shear", q).unwrap())
        }
        "anharmonic-bounded" => {
            let sep = Separable {
                kinetic: Arc::new(|xi: &[f64]| xi[0] * xi[0]),
                potential: Arc::new(|_t, x: &[f64]| x[0].cos()),
                kinetic_grad: Some(Arc::new(|xi: &[f64]| 2.0 * xi[0])),
                potential_grad: Some(Arc::new(|_t, x: &[f64]| -x[0].sin())),
            };
            Some(SymbolModel::separable("anharmonic-bounded", 1, sep, false))
        }
        "kicked" => {
            let sep = Separable {
                kinetic: Arc::new(|xi: &[f64]| xi[0] * xi[0]),
                potential: Arc::new(|t, x: &[f64]| x[0].cos() * switch(t)),
                kinetic_grad: Some(Arc::new(|xi: &[f64]| 2.0 * xi[0])),
                potential_grad: Some(Arc::new(|t, x: &[f64]| -x[0].sin() * switch(t))),
            };
            Some(SymbolModel::separable("kicked", 1, sep, true))
        }
        _ => None,
    }
}
