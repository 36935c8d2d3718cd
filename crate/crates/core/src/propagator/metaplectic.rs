//! Closed-form metaplectic propagation for quadratic symbols.
//!
//! For a(z) = ½ zᵀQz the flow is linear, χ_t = S_t = [[A,B],[C,D]], and the
//! propagator maps Gaussians to Gaussians: with g = c₀ e^{−w₀ y²/2},
//!
//! ```text
//!     S(t,0) g = c₀ α^{−1/2} e^{−w_t y²/2},   α = A + i w₀ B,
//!     w_t = −i (C + i w₀ D) / α.
//! ```
//!
//! The square-root branch (the scalar phase left open by the group cocycle)
//! is fixed by continuity in t from S(0,0) = Id, tracked by unwrapping
//! arg α along the flow trajectory; tests pin it against short-time Strang
//! evolution.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::field::{GridSpec, SampledState};
use crate::hamiltonian::{integrate_flow, SymbolModel};
use crate::tf::{Lattice, Window, WindowKind};

use super::multiplier::{gabor_multiplier_apply, WindowTable};
use super::PropagatorHandle;

/// Centered complex Gaussian amplitude·e^{−width·y²/2}, Re width > 0.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPacket {
    pub amplitude: C64,
    pub width: C64,
}

impl GaussianPacket {
    pub fn eval(&self, y: f64) -> C64 {
        self.amplitude * (-self.width * y * y / 2.0).exp()
    }

    pub fn sample(&self, grid: &GridSpec) -> SampledState {
        SampledState::from_fn(*grid, |y| self.eval(y)).expect("1-d grid")
    }
}

/// S(t,0) applied to the centered Gaussian `amplitude·e^{−y²/2}`.
pub fn metaplectic_window(
    a: &SymbolModel,
    t: f64,
    steps: usize,
    amplitude: C64,
) -> Result<GaussianPacket> {
    if a.quadratic().is_none() {
        return Err(CoreError::SymbolMismatch(format!(
            "{} is not a quadratic form",
            a.name()
        )));
    }
    if t == 0.0 {
        return Ok(GaussianPacket { amplitude, width: C64::new(1.0, 0.0) });
    }
    let flow = integrate_flow(a, &[0.0, 0.0], t, steps)?;
    // unwrap arg α continuously along the trajectory
    let mut theta = 0.0f64;
    let mut prev = C64::new(1.0, 0.0);
    let mut alpha = prev;
    for j in &flow.jac {
        alpha = C64::new(j[(0, 0)], j[(0, 1)]); // A + i·1·B
        theta += (alpha / prev).arg();
        prev = alpha;
    }
    let j = flow.final_jac();
    let (c, d) = (j[(1, 0)], j[(1, 1)]);
    let width = -C64::i() * (C64::new(c, d)) / alpha;
    let amplitude = amplitude * alpha.norm().powf(-0.5) * C64::from_polar(1.0, -theta / 2.0);
    Ok(GaussianPacket { amplitude, width })
}

/// Linear flow and quadratic phase data for a quadratic symbol:
/// χ_t(z) = S·z and ψ(t,z) = ½ (p₀x² + 2p₁xξ + p₂ξ²).
#[derive(Debug, Clone, Copy)]
pub struct QuadraticFlowData {
    pub s: [f64; 4],
    pub p: [f64; 3],
}

impl QuadraticFlowData {
    pub fn chi(&self, x: f64, xi: f64) -> (f64, f64) {
        (self.s[0] * x + self.s[1] * xi, self.s[2] * x + self.s[3] * xi)
    }

    pub fn psi(&self, x: f64, xi: f64) -> f64 {
        0.5 * (self.p[0] * x * x + 2.0 * self.p[1] * x * xi + self.p[2] * xi * xi)
    }
}

pub fn quadratic_flow_data(a: &SymbolModel, t: f64, steps: usize) -> Result<QuadraticFlowData> {
    if a.quadratic().is_none() {
        return Err(CoreError::SymbolMismatch(format!(
            "{} is not a quadratic form",
            a.name()
        )));
    }
    if t == 0.0 {
        return Ok(QuadraticFlowData { s: [1.0, 0.0, 0.0, 1.0], p: [0.0; 3] });
    }
    let fx = integrate_flow(a, &[1.0, 0.0], t, steps)?;
    let fxi = integrate_flow(a, &[0.0, 1.0], t, steps)?;
    let fboth = integrate_flow(a, &[1.0, 1.0], t, steps)?;
    let j = fx.final_jac();
    let s = [j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]];
    let pxx = 2.0 * fx.final_psi();
    let pxixi = 2.0 * fxi.final_psi();
    let pxxi = fboth.final_psi() - fx.final_psi() - fxi.final_psi();
    Ok(QuadraticFlowData { s, p: [pxx, pxxi, pxixi] })
}

/// Closed-form evolution of a displaced Gaussian packet
/// u₀ = π(z₀)(amp·e^{−y²/2}) under a quadratic symbol:
/// S(t,0)u₀ = e^{iψ(t,z₀)} π(χ_t z₀)[S(t,0)(amp·e^{−y²/2})].
pub fn quadratic_packet_evolution(
    a: &SymbolModel,
    t: f64,
    steps: usize,
    grid: &GridSpec,
    amplitude: C64,
    z0: (f64, f64),
) -> Result<SampledState> {
    let packet = metaplectic_window(a, t, steps, amplitude)?;
    let flow = integrate_flow(a, &[z0.0, z0.1], t, steps)?;
    let zt = flow.final_point();
    let (xp, xip) = (zt[0], zt[1]);
    let phase = C64::from_polar(1.0, flow.final_psi());
    SampledState::from_fn(*grid, |y| {
        let w = y - xp;
        phase * C64::from_polar(1.0, xip * w) * packet.eval(w)
    })
}

/// Gabor-multiplier representation of a metaplectic propagator: analyze with
/// g, transport the lattice through the linear flow, synthesize with the
/// shared closed-form evolved window.
pub fn metaplectic_apply(
    h: &PropagatorHandle,
    f: &SampledState,
    g: &Window,
    lat: &Lattice,
) -> Result<SampledState> {
    if h.symbol.quadratic().is_none() {
        return Err(CoreError::SymbolMismatch(format!(
            "{} is not a quadratic form",
            h.symbol.name()
        )));
    }
    if g.kind != WindowKind::Gaussian {
        return Err(CoreError::SymbolMismatch(
            "metaplectic_apply requires the Gaussian window".into(),
        ));
    }
    g.check_synthesis_norm()?;
    if h.t_start != 0.0 {
        return Err(CoreError::Unsupported("representation is anchored at t_start = 0".into()));
    }
    let c0 = g.state.values()[g.grid().n() / 2]; // g(0), x = 0 is a grid node
    let packet = metaplectic_window(&h.symbol, h.span(), h.flow_steps(), c0)?;
    gabor_multiplier_apply(h, f, g, lat, &WindowTable::SharedClosedForm(packet))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::relative_l2_error;
    use crate::hamiltonian::registry::builtin;
    use crate::propagator::{evolve, Method};
    use crate::tf::{auto_lattice, SYNTHESIS_NORM};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid() -> GridSpec {
        GridSpec::new(512, 4.0 * PI).unwrap()
    }

    #[test]
    fn window_evolution_free_particle_closed_form() {
        let a = builtin("free").unwrap();
        let p = metaplectic_window(&a, 1.0, 512, C64::new(1.0, 0.0)).unwrap();
        // S(t)e^{−y²/2} = (1+2it)^{−1/2} e^{−y²/(2(1+2it))}
        let sigma = C64::new(1.0, 2.0);
        let want_w = 1.0 / sigma;
        let want_amp = 1.0 / sigma.sqrt();
        assert!((p.width - want_w).norm() < 1e-9, "{} vs {}", p.width, want_w);
        assert!((p.amplitude - want_amp).norm() < 1e-9, "{} vs {}", p.amplitude, want_amp);
    }

    #[test]
    fn window_evolution_harmonic_ground_state_phase() {
        let a = builtin("harmonic").unwrap();
        for t in [0.5, 2.0, 5.0] {
            let p = metaplectic_window(&a, t, 4096, C64::new(1.0, 0.0)).unwrap();
            assert!((p.width - C64::new(1.0, 0.0)).norm() < 1e-8, "width {}", p.width);
            let want = C64::from_polar(1.0, -t / 2.0);
            assert!((p.amplitude - want).norm() < 1e-8, "t={t}: {} vs {want}", p.amplitude);
        }
    }

    #[test]
    fn branch_tracking_matches_short_time_strang() {
        let a = Arc::new(builtin("harmonic").unwrap());
        let t = 0.01;
        let g = Window::gaussian(grid()).unwrap();
        let c0 = g.state.values()[grid().n() / 2];
        let packet = metaplectic_window(&a, t, 64, c0).unwrap();
        let closed = packet.sample(&grid());
        let h = PropagatorHandle::with_dt(a, Method::StrangSplit, t, t / 256.0).unwrap();
        let pde = evolve(&h, &g.state).unwrap();
        let err = relative_l2_error(&closed, &pde);
        assert!(err < 1e-6, "{err:.3e}");
    }

    #[test]
    fn apply_at_zero_time_is_roundtrip() {
        let a = Arc::new(builtin("harmonic").unwrap());
        let h = PropagatorHandle::new(a, Method::MetaplecticExact, 0.0).unwrap();
        let g = Window::gaussian(grid()).unwrap();
        let lat = auto_lattice(&grid()).unwrap();
        let f = SampledState::from_fn(grid(), |x| {
            C64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
        })
        .unwrap();
        let out = metaplectic_apply(&h, &f, &g, &lat).unwrap();
        let err = relative_l2_error(&out, &f);
        assert!(err < 1e-6, "{err:.3e}");
    }

    #[test]
    fn apply_free_particle_cross_validates_strang() {
        let a = Arc::new(builtin("free").unwrap());
        let hm = PropagatorHandle::new(a.clone(), Method::MetaplecticExact, 1.0).unwrap();
        let hs = PropagatorHandle::new(a, Method::StrangSplit, 1.0).unwrap();
        let g = Window::gaussian(grid()).unwrap();
        let lat = auto_lattice(&grid()).unwrap();
        let f = SampledState::from_fn(grid(), |x| {
            C64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
        })
        .unwrap();
        let um = metaplectic_apply(&hm, &f, &g, &lat).unwrap();
        let us = evolve(&hs, &f).unwrap();
        let err = relative_l2_error(&um, &us);
        assert!(err < 1e-5, "{err:.3e}");
    }

    #[test]
    fn harmonic_quarter_period_is_fourier_transform() {
        let a = Arc::new(builtin("harmonic").unwrap());
        let t = PI / 2.0;
        let h = PropagatorHandle::new(a, Method::MetaplecticExact, t).unwrap();
        let g = Window::gaussian(grid()).unwrap();
        let lat = auto_lattice(&grid()).unwrap();
        // a displaced packet so the check is not trivial
        let f = crate::tf::pi_shift(&g.state, 1.0, -0.5)
            .unwrap()
            .scale(C64::new(1.0 / SYNTHESIS_NORM, 0.0));
        let out = metaplectic_apply(&h, &f, &g, &lat).unwrap();
        // oracle: (2π)^{−1/2}·f̂ evaluated on the spatial grid by direct sums
        let gr = grid();
        let scale = 1.0 / (2.0 * PI).sqrt();
        let oracle = SampledState::from_fn(gr, |x| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in f.values().iter().enumerate() {
                let y = gr.x_node(j);
                acc += v * C64::from_polar(1.0, -x * y);
            }
            acc * gr.dx() * scale
        })
        .unwrap();
        // align the single metaplectic phase constant
        let ip = out.inner(&oracle).unwrap();
        let phase = ip / ip.norm();
        let aligned = oracle.scale(phase);
        let err = relative_l2_error(&out, &aligned);
        assert!(err < 1e-5, "{err:.3e}");
        // and that constant is e^{−iπ/4}
        assert!((phase - C64::from_polar(1.0, -PI / 4.0)).norm() < 1e-4, "{phase}");
    }

    #[test]
    fn quadratic_flow_data_matches_direct_integration() {
        let a = builtin("harmonic").unwrap();
        let qfd = quadratic_flow_data(&a, 1.3, 1024).unwrap();
        for seed in [(0.7, -1.1), (2.0, 0.4), (-1.5, -0.9)] {
            let f = integrate_flow(&a, &[seed.0, seed.1], 1.3, 1024).unwrap();
            let (cx, cxi) = qfd.chi(seed.0, seed.1);
            let z = f.final_point();
            assert!((cx - z[0]).abs() < 1e-9 && (cxi - z[1]).abs() < 1e-9);
            assert!((qfd.psi(seed.0, seed.1) - f.final_psi()).abs() < 1e-9);
        }
    }
}
