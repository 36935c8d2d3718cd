//! Reference Schrödinger solvers for D_t u + a^w(t, x, D)u = 0, i.e.
//! ∂_t u = −i a^w u: exact metaplectic propagation for quadratic symbols,
//! Strang splitting for separable ones, and a Weyl-quadrature midpoint
//! scheme for general symbols. All methods conserve the L² norm up to
//! their stated tolerances.

pub mod metaplectic;
pub mod multiplier;

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::field::{fourier_forward, fourier_inverse, DomainTag, SampledState};
use crate::hamiltonian::{SymbolKind, SymbolModel};
use crate::tf::{auto_lattice, Window};

pub use metaplectic::{metaplectic_apply, metaplectic_window, GaussianPacket};
pub use multiplier::{
    build_window_table, evolved_window, gabor_multiplier_apply, EvolvedWindow, WindowTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MetaplecticExact,
    StrangSplit,
    WeylMidpoint,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MetaplecticExact => "metaplectic_exact",
            Method::StrangSplit => "strang_split",
            Method::WeylMidpoint => "weyl_midpoint",
        }
    }
}

/// A propagator S(t_end, t_start) bound to a symbol and a method.
#[derive(Clone)]
pub struct PropagatorHandle {
    pub symbol: Arc<SymbolModel>,
    pub method: Method,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl PropagatorHandle {
    /// Propagate over [0, t_end] with the default step t_end/512.
    pub fn new(symbol: Arc<SymbolModel>, method: Method, t_end: f64) -> Result<Self> {
        let dt = if t_end > 0.0 { t_end / 512.0 } else { 0.0 };
        Self::with_span(symbol, method, 0.0, t_end, dt)
    }

    pub fn with_dt(symbol: Arc<SymbolModel>, method: Method, t_end: f64, dt: f64) -> Result<Self> {
        Self::with_span(symbol, method, 0.0, t_end, dt)
    }

    pub fn with_span(
        symbol: Arc<SymbolModel>,
        method: Method,
        t_start: f64,
        t_end: f64,
        dt: f64,
    ) -> Result<Self> {
        if t_end < t_start {
            return Err(CoreError::OutOfRange("t_end must not precede t_start".into()));
        }
        match method {
            Method::MetaplecticExact => {
                if symbol.quadratic().is_none() {
                    return Err(CoreError::SymbolMismatch(format!(
                        "metaplectic_exact requires a quadratic form, {} is not one",
                        symbol.name()
                    )));
                }
            }
            Method::StrangSplit => {
                if symbol.separable_parts().is_none() {
                    return Err(CoreError::SymbolMismatch(format!(
                        "strang_split requires kinetic + potential structure, {} has none",
                        symbol.name()
                    )));
                }
            }
            Method::WeylMidpoint => {
                if symbol.dim() != 1 {
                    return Err(CoreError::SymbolMismatch(
                        "weyl_midpoint is one-dimensional".into(),
                    ));
                }
            }
        }
        Ok(Self { symbol, method, t_start, t_end, dt })
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn steps(&self) -> usize {
        if self.span() == 0.0 || self.dt <= 0.0 {
            1
        } else {
            (self.span() / self.dt).ceil() as usize
        }
    }

    /// Step count used for flow quadrature alongside this handle.
    pub fn flow_steps(&self) -> usize {
        self.steps().max(512)
    }
}

/// Norm and boundary-mass trace of one propagator run.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub boundary: Vec<f64>,
}

/// Weyl quantization applied by midpoint quadrature,
/// a^w f(x) = (2π)^{−1} ∬ e^{i(x−y)ξ} a((x+y)/2, ξ) f(y) dy dξ.
///
/// The inner ξ-integral over the grid is one inverse DFT per midpoint; the
/// outer y-sum is direct, O(n²) total.
pub struct WeylKernel {
    n: usize,
    /// table[s] = inverse DFT of a(m_s, ξ_·), midpoints m_s = x₀ + sΔx/2.
    table: Vec<Vec<C64>>,
}

impl WeylKernel {
    pub fn new(a: &SymbolModel, t: f64, grid: &crate::field::GridSpec) -> Result<Self> {
        if a.dim() != 1 {
            return Err(CoreError::Unsupported("weyl_apply requires d = 1".into()));
        }
        let n = grid.n();
        if n > 2048 {
            return Err(CoreError::OutOfRange(
                "weyl quadrature limited to n ≤ 2048 (O(n²) kernel)".into(),
            ));
        }
        let dx = grid.dx();
        let x0 = grid.x_node(0);
        let table: Vec<Vec<C64>> = (0..(2 * n - 1))
            .map(|s| {
                let m = x0 + s as f64 * dx / 2.0;
                let mut row: Vec<C64> = (0..n)
                    .map(|k| C64::new(a.evaluate1(t, m, grid.xi_node(k)), 0.0))
                    .collect();
                crate::field::dft_inverse(&mut row);
                row
            })
            .collect();
        Ok(Self { n, table })
    }

    pub fn apply_values(&self, f: &[C64], out: &mut [C64]) {
        let n = self.n;
        let scale = 1.0 / n as f64;
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (j, fj) in f.iter().enumerate() {
                let lag = i as i64 - j as i64;
                let idx = lag.rem_euclid(n as i64) as usize;
                let v = self.table[i + j][idx] * fj;
                if lag % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            out[i] = acc * scale;
        }
    }
}

/// a^w(t, x, D) f for a fixed time.
pub fn weyl_apply(a: &SymbolModel, t: f64, f: &SampledState) -> Result<SampledState> {
    if f.domain() != DomainTag::Position {
        return Err(CoreError::DomainMismatch { expected: "position", got: "frequency" });
    }
    let kernel = WeylKernel::new(a, t, f.grid())?;
    let mut out = vec![C64::new(0.0, 0.0); f.values().len()];
    kernel.apply_values(f.values(), &mut out);
    SampledState::new(*f.grid(), out, DomainTag::Position)
}

fn strang_step(
    u: &mut SampledState,
    sep: &crate::hamiltonian::Separable,
    t_mid: f64,
    dt: f64,
) -> Result<()> {
    let grid = *u.grid();
    // half potential kick
    for (j, v) in u.values_mut().iter_mut().enumerate() {
        let x = grid.x_node(j);
        *v *= C64::from_polar(1.0, -0.5 * dt * (sep.potential)(t_mid, &[x]));
    }
    // full kinetic step in frequency space
    let mut ff = fourier_forward(u)?;
    for (k, v) in ff.values_mut().iter_mut().enumerate() {
        let xi = grid.xi_node(k);
        *v *= C64::from_polar(1.0, -dt * (sep.kinetic)(&[xi]));
    }
    *u = fourier_inverse(&ff)?;
    // half potential kick
    for (j, v) in u.values_mut().iter_mut().enumerate() {
        let x = grid.x_node(j);
        *v *= C64::from_polar(1.0, -0.5 * dt * (sep.potential)(t_mid, &[x]));
    }
    Ok(())
}

fn midpoint_step(
    u: &SampledState,
    kernel: &WeylKernel,
    dt: f64,
) -> Result<SampledState> {
    let n = u.values().len();
    let mut next = u.clone();
    let mut mid = vec![C64::new(0.0, 0.0); n];
    let mut ku = vec![C64::new(0.0, 0.0); n];
    let norm0 = u.l2_norm().max(1e-300);
    let mut residual = f64::INFINITY;
    for _ in 0..10 {
        for i in 0..n {
            mid[i] = 0.5 * (u.values()[i] + next.values()[i]);
        }
        kernel.apply_values(&mid, &mut ku);
        let mut delta2 = 0.0;
        for i in 0..n {
            let v = u.values()[i] - C64::new(0.0, dt) * ku[i];
            delta2 += (v - next.values()[i]).norm_sqr();
            next.values_mut()[i] = v;
        }
        residual = (delta2.sqrt() * u.step().sqrt()) / norm0;
        if residual <= 1e-12 {
            return Ok(next);
        }
    }
    Err(CoreError::NonConvergence { residual })
}

/// Propagate `u0` to `h.t_end`, recording a norm/boundary trace.
pub fn evolve_traced(h: &PropagatorHandle, u0: &SampledState) -> Result<(SampledState, RunTrace)> {
    let bm = u0.boundary_mass();
    if bm >= 1e-10 {
        return Err(CoreError::BoundaryMass { mass: bm, limit: 1e-10 });
    }
    let mut trace = RunTrace::default();
    if h.span() == 0.0 {
        trace.times.push(h.t_start);
        trace.norms.push(u0.l2_norm());
        trace.boundary.push(bm);
        return Ok((u0.clone(), trace));
    }
    match h.method {
        Method::MetaplecticExact => {
            let g = Window::gaussian(*u0.grid())?;
            let lat = auto_lattice(u0.grid())?;
            let out = metaplectic_apply(h, u0, &g, &lat)?;
            trace.times.push(h.t_end);
            trace.norms.push(out.l2_norm());
            trace.boundary.push(out.boundary_mass());
            Ok((out, trace))
        }
        Method::StrangSplit => {
            let sep = h.symbol.separable_parts().expect("validated at construction");
            let steps = h.steps();
            let dt = h.span() / steps as f64;
            let mut u = u0.clone();
            let check_every = (steps / 32).max(1);
            for s in 0..steps {
                let t_mid = h.t_start + (s as f64 + 0.5) * dt;
                strang_step(&mut u, sep, t_mid, dt)?;
                if s % check_every == 0 || s + 1 == steps {
                    let bm = u.boundary_mass();
                    trace.times.push(h.t_start + (s as f64 + 1.0) * dt);
                    trace.norms.push(u.l2_norm());
                    trace.boundary.push(bm);
                    if bm > 1e-6 {
                        return Err(CoreError::BoundaryMass { mass: bm, limit: 1e-6 });
                    }
                }
            }
            Ok((u, trace))
        }
        Method::WeylMidpoint => {
            let steps = h.steps();
            let dt = h.span() / steps as f64;
            let autonomous = !h.symbol.time_dependent();
            let mut kernel = if autonomous {
                Some(WeylKernel::new(&h.symbol, h.t_start, u0.grid())?)
            } else {
                None
            };
            let mut u = u0.clone();
            let check_every = (steps / 32).max(1);
            for s in 0..steps {
                let t_mid = h.t_start + (s as f64 + 0.5) * dt;
                if !autonomous {
                    kernel = Some(WeylKernel::new(&h.symbol, t_mid, u0.grid())?);
                }
                u = midpoint_step(&u, kernel.as_ref().unwrap(), dt)?;
                if s % check_every == 0 || s + 1 == steps {
                    let bm = u.boundary_mass();
                    trace.times.push(h.t_start + (s as f64 + 1.0) * dt);
                    trace.norms.push(u.l2_norm());
                    trace.boundary.push(bm);
                    if bm > 1e-6 {
                        return Err(CoreError::BoundaryMass { mass: bm, limit: 1e-6 });
                    }
                }
            }
            Ok((u, trace))
        }
    }
}

pub fn evolve(h: &PropagatorHandle, u0: &SampledState) -> Result<SampledState> {
    evolve_traced(h, u0).map(|(u, _)| u)
}

/// Evolve and capture states at the requested times (snapped to step
/// boundaries). Only PDE-stepping methods support snapshots.
pub fn evolve_snapshots(
    h: &PropagatorHandle,
    u0: &SampledState,
    times: &[f64],
) -> Result<Vec<SampledState>> {
    let bm = u0.boundary_mass();
    if bm >= 1e-10 {
        return Err(CoreError::BoundaryMass { mass: bm, limit: 1e-10 });
    }
    match h.method {
        Method::StrangSplit => {}
        _ => {
            return Err(CoreError::Unsupported(
                "snapshots require the strang_split method".into(),
            ))
        }
    }
    let sep = h.symbol.separable_parts().expect("validated");
    let steps = h.steps();
    let dt = if h.span() > 0.0 { h.span() / steps as f64 } else { 0.0 };
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut want: Vec<usize> = times
        .iter()
        .map(|&t| {
            if dt == 0.0 {
                0
            } else {
                (((t - h.t_start) / dt).round() as usize).min(steps)
            }
        })
        .collect();
    want.sort_unstable();
    let mut wi = 0;
    while wi < want.len() && want[wi] == 0 {
        out.push(u.clone());
        wi += 1;
    }
    for s in 0..steps {
        let t_mid = h.t_start + (s as f64 + 0.5) * dt;
        strang_step(&mut u, sep, t_mid, dt)?;
        while wi < want.len() && want[wi] == s + 1 {
            out.push(u.clone());
            wi += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{relative_l2_error, GridSpec};
    use crate::hamiltonian::registry::builtin;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(512, 4.0 * PI).unwrap()
    }

    fn norm_gaussian(g: GridSpec) -> SampledState {
        SampledState::from_fn(g, |x| C64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0))
            .unwrap()
    }

    /// Closed-form free-particle evolution of the normalized Gaussian.
    fn free_gaussian_at(g: GridSpec, t: f64) -> SampledState {
        SampledState::from_fn(g, |x| {
            let sigma = C64::new(1.0, 2.0 * t);
            let amp = PI.powf(-0.25) / sigma.sqrt();
            amp * (-C64::new(x * x / 2.0, 0.0) / sigma).exp()
        })
        .unwrap()
    }

    #[test]
    fn weyl_of_momentum_squared_is_spectral_laplacian() {
        let a = builtin("free").unwrap();
        let f = norm_gaussian(grid());
        let got = weyl_apply(&a, 0.0, &f).unwrap();
        // spectral oracle: F^{-1}[ξ² f̂]
        let mut ff = fourier_forward(&f).unwrap();
        for (k, v) in ff.values_mut().iter_mut().enumerate() {
            let xi = grid().xi_node(k);
            *v *= xi * xi;
        }
        let want = fourier_inverse(&ff).unwrap();
        assert!(relative_l2_error(&got, &want) < 1e-8);
    }

    #[test]
    fn weyl_of_position_is_exact_multiplication() {
        use std::sync::Arc;
        let a = crate::hamiltonian::SymbolModel::general(
            "position",
            1,
            Arc::new(|_t, x: &[f64], _xi: &[f64]| x[0]),
            false,
        );
        let f = norm_gaussian(grid());
        let got = weyl_apply(&a, 0.0, &f).unwrap();
        for (j, (g, f)) in got.values().iter().zip(f.values()).enumerate() {
            let x = grid().x_node(j);
            assert!((g - f * x).norm() < 1e-12 * (1.0 + x.abs()), "node {j}");
        }
    }

    #[test]
    fn weyl_of_shear_matches_symmetrized_oracle() {
        let a = builtin("shear").unwrap();
        let f = norm_gaussian(grid());
        let got = weyl_apply(&a, 0.0, &f).unwrap();
        // (xD + Dx)/2 via the spectral derivative: x·Df + D(x·f) halves
        let spectral_d = |s: &SampledState| {
            let mut ff = fourier_forward(s).unwrap();
            for (k, v) in ff.values_mut().iter_mut().enumerate() {
                let xi = grid().xi_node(k);
                *v *= C64::new(0.0, xi); // D = −i∂ has symbol ξ: F[Df] = ξ f̂... D f = F^{-1}[ξ f̂]
            }
            fourier_inverse(&ff).unwrap()
        };
        // D f = F^{-1}[ξ f̂]; the extra i above is wrong, build directly:
        let d_op = |s: &SampledState| {
            let mut ff = fourier_forward(s).unwrap();
            for (k, v) in ff.values_mut().iter_mut().enumerate() {
                let xi = grid().xi_node(k);
                *v *= xi;
            }
            fourier_inverse(&ff).unwrap()
        };
        let _ = spectral_d;
        let xf = SampledState::new(
            grid(),
            f.values()
                .iter()
                .enumerate()
                .map(|(j, v)| v * grid().x_node(j))
                .collect(),
            DomainTag::Position,
        )
        .unwrap();
        let df = d_op(&f);
        let x_df = SampledState::new(
            grid(),
            df.values()
                .iter()
                .enumerate()
                .map(|(j, v)| v * grid().x_node(j))
                .collect(),
            DomainTag::Position,
        )
        .unwrap();
        let d_xf = d_op(&xf);
        let want = x_df.add(&d_xf).unwrap().scale(C64::new(0.5, 0.0));
        assert!(relative_l2_error(&got, &want) < 1e-8);
    }

    #[test]
    fn strang_free_particle_matches_spreading_gaussian() {
        let a = Arc::new(builtin("free").unwrap());
        let h = PropagatorHandle::new(a, Method::StrangSplit, 1.0).unwrap();
        let u0 = norm_gaussian(grid());
        let u1 = evolve(&h, &u0).unwrap();
        let want = free_gaussian_at(grid(), 1.0);
        let err = relative_l2_error(&u1, &want);
        assert!(err < 1e-7, "{err:.3e}");
    }

    #[test]
    fn zero_span_is_identity() {
        let a = Arc::new(builtin("harmonic").unwrap());
        let h = PropagatorHandle::new(a, Method::StrangSplit, 0.0).unwrap();
        let u0 = norm_gaussian(grid());
        let u = evolve(&h, &u0).unwrap();
        assert_eq!(u.values(), u0.values());
    }

    #[test]
    fn harmonic_ground_state_is_stationary_with_phase() {
        let a = Arc::new(builtin("harmonic").unwrap());
        let t = 0.7;
        let h = PropagatorHandle::with_dt(a, Method::StrangSplit, t, t / 16384.0).unwrap();
        let u0 = norm_gaussian(grid());
        let u = evolve(&h, &u0).unwrap();
        for (a, b) in u.values().iter().zip(u0.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-8);
        }
        // phase e^{−it/2}
        let phase = u.inner(&u0).unwrap();
        let expected = C64::from_polar(phase.norm(), -t / 2.0);
        assert!((phase - expected).norm() < 1e-6, "{phase} vs {expected}");
    }

    #[test]
    fn unitarity_of_stepping_methods() {
        let u0 = norm_gaussian(grid());
        let a = Arc::new(builtin("anharmonic-bounded").unwrap());
        let h = PropagatorHandle::new(a, Method::StrangSplit, 1.0).unwrap();
        let u = evolve(&h, &u0).unwrap();
        assert!((u.l2_norm() - u0.l2_norm()).abs() < 1e-8);
    }

    #[test]
    fn weyl_midpoint_matches_strang_on_anharmonic() {
        let g = GridSpec::new(128, 8.0).unwrap();
        let u0 = norm_gaussian(g);
        let a = Arc::new(builtin("anharmonic-bounded").unwrap());
        let t = 0.1;
        let hw =
            PropagatorHandle::with_dt(a.clone(), Method::WeylMidpoint, t, 2.5e-4).unwrap();
        let uw = evolve(&hw, &u0).unwrap();
        assert!((uw.l2_norm() - u0.l2_norm()).abs() < 1e-8, "midpoint unitarity");
        let hs = PropagatorHandle::with_dt(a, Method::StrangSplit, t, 1e-5).unwrap();
        let us = evolve(&hs, &u0).unwrap();
        let err = relative_l2_error(&uw, &us);
        assert!(err < 1e-5, "{err:.3e}");
    }

    #[test]
    fn semigroup_property_autonomous() {
        let a = Arc::new(builtin("anharmonic-bounded").unwrap());
        let u0 = norm_gaussian(grid());
        let h1 = PropagatorHandle::with_span(a.clone(), Method::StrangSplit, 0.0, 0.4, 0.4 / 512.0)
            .unwrap();
        let mid = evolve(&h1, &u0).unwrap();
        let h2 = PropagatorHandle::with_span(a.clone(), Method::StrangSplit, 0.4, 1.0, 0.6 / 512.0)
            .unwrap();
        let fin = evolve(&h2, &mid).unwrap();
        let hd =
            PropagatorHandle::with_dt(a, Method::StrangSplit, 1.0, 1.0 / 1024.0).unwrap();
        let direct = evolve(&hd, &u0).unwrap();
        let err = relative_l2_error(&fin, &direct);
        assert!(err < 1e-6, "{err:.3e}");
    }

    #[test]
    fn strang_second_order_convergence_on_harmonic() {
        let a = Arc::new(builtin("harmonic").unwrap());
        // displaced packet: closed-form reference via the metaplectic window
        let z0 = (1.0, 0.5);
        let g = Window::gaussian(grid()).unwrap();
        let u0 = crate::tf::pi_shift(&g.state, z0.0, z0.1)
            .unwrap()
            .scale(C64::new(1.0 / crate::tf::SYNTHESIS_NORM, 0.0));
        let t = 1.0;
        let reference = metaplectic::quadratic_packet_evolution(
            &builtin("harmonic").unwrap(),
            t,
            4096,
            &u0,
            z0,
        )
        .unwrap();
        let mut errs = Vec::new();
        for dt in [1e-2, 5e-3, 2.5e-3] {
            let h = PropagatorHandle::with_dt(a.clone(), Method::StrangSplit, t, dt).unwrap();
            let u = evolve(&h, &u0).unwrap();
            errs.push(relative_l2_error(&u, &reference));
        }
        let slope1 = (errs[0] / errs[1]).log2();
        let slope2 = (errs[1] / errs[2]).log2();
        for s in [slope1, slope2] {
            assert!((s - 2.0).abs() < 0.2, "slope {s}, errors {errs:?}");
        }
    }

    #[test]
    fn rejects_method_symbol_mismatch() {
        let shear = Arc::new(builtin("shear").unwrap());
        assert!(PropagatorHandle::new(shear.clone(), Method::StrangSplit, 1.0).is_err());
        let anh = Arc::new(builtin("anharmonic-bounded").unwrap());
        assert!(PropagatorHandle::new(anh, Method::MetaplecticExact, 1.0).is_err());
        assert!(PropagatorHandle::new(shear, Method::MetaplecticExact, 1.0).is_ok());
    }

    #[test]
    fn rejects_boundary_heavy_input() {
        let a = Arc::new(builtin("free").unwrap());
        let h = PropagatorHandle::new(a, Method::StrangSplit, 1.0).unwrap();
        let g = grid();
        let bad = SampledState::from_fn(g, |x| {
            C64::new((-(x - 0.95 * g.x_max()).powi(2)).exp(), 0.0)
        })
        .unwrap();
        assert!(matches!(evolve(&h, &bad), Err(CoreError::BoundaryMass { .. })));
    }

    #[test]
    fn snapshots_interpolate_the_run() {
        let a = Arc::new(builtin("free").unwrap());
        let h = PropagatorHandle::new(a, Method::StrangSplit, 1.0).unwrap();
        let u0 = norm_gaussian(grid());
        let snaps = evolve_snapshots(&h, &u0, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(snaps.len(), 3);
        assert!(relative_l2_error(&snaps[0], &u0) < 1e-15);
        let want_half = free_gaussian_at(grid(), 0.5);
        assert!(relative_l2_error(&snaps[1], &want_half) < 1e-7);
    }
}
