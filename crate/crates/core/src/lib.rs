//! Numerical library for wave-packet analysis of linear Schrödinger
//! propagators with analytic symbols: Gabor frames and the STFT, Hamiltonian
//! flows with variational Jacobians, reference propagators (metaplectic,
//! split-step, Weyl midpoint), Gabor-matrix assembly with exponential
//! sparsity fits and compressed application, type-I Fourier integral
//! operator phases, and phase-space diagnostics for analytic singularities.

pub mod container;
pub mod diag;
pub mod error;
pub mod field;
pub mod fio;
pub mod gabor;
pub mod hamiltonian;
pub mod propagator;
pub mod tf;

pub use error::{CoreError, Result};
pub use field::{
    fourier_forward, fourier_inverse, relative_l2_error, DomainTag, GridSpec, SampledState,
};
pub use tf::{istft, stft, DecayFit, Lattice, StftTable, Window, WindowKind};

/// Japanese bracket ⟨z⟩ = (1 + |z|²)^{1/2} on phase space.
pub fn bracket(x: f64, xi: f64) -> f64 {
    (1.0 + x * x + xi * xi).sqrt()
}
