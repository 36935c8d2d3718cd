//! Windows, the short-time Fourier transform V_g f(z) = ⟨f, π(z)g⟩, and the
//! continuous inversion formula discretized on an oversampled lattice.
//!
//! Phase-space shifts follow π(x,ξ)f(y) = e^{iξ(y−x)} f(y−x). With the
//! window normalized to ‖g‖ = (2π)^{−d/2}, the Riemann sum
//! Σ_z V_g f(z) π(z) g · dA reproduces f up to lattice truncation and the
//! frame deviation of the sampling density.

pub mod decay;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::field::{fourier_forward, fourier_inverse, DomainTag, GridSpec, SampledState};

pub use decay::{
    fit_exponential_decay, fit_log_decay, s11_membership_report, DecayCenter, DecayFit,
    FitOptions, MembershipReport, DECAY_RATE_THRESHOLD,
};

/// Rectangular phase-space lattice with nodes
/// `(x_j, ξ_k) = ((j − nx/2)·dx, (k − nxi/2)·dxi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    dx: f64,
    dxi: f64,
    nx: usize,
    nxi: usize,
}

impl Lattice {
    pub fn new(dx: f64, dxi: f64, nx: usize, nxi: usize) -> Result<Self> {
        if !(dx > 0.0 && dxi > 0.0) {
            return Err(CoreError::InvalidLattice("steps must be positive".into()));
        }
        if nx < 2 || nxi < 2 {
            return Err(CoreError::InvalidLattice("need at least 2 nodes per axis".into()));
        }
        let lat = Self { dx, dxi, nx, nxi };
        if lat.oversampling_ratio() < 2.0 - 1e-9 {
            return Err(CoreError::InvalidLattice(format!(
                "under-sampled: 2π/(dx·dxi) = {:.3} < 2",
                lat.oversampling_ratio()
            )));
        }
        Ok(lat)
    }

    /// Build from steps and half-widths; node counts are rounded to cover the extents.
    pub fn from_extents(dx: f64, dxi: f64, x_extent: f64, xi_extent: f64) -> Result<Self> {
        if !(x_extent > 0.0 && xi_extent > 0.0) {
            return Err(CoreError::InvalidLattice("extents must be positive".into()));
        }
        let nx = ((2.0 * x_extent / dx).round() as usize).max(2);
        let nxi = ((2.0 * xi_extent / dxi).round() as usize).max(2);
        Self::new(dx, dxi, nx, nxi)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nxi(&self) -> usize {
        self.nxi
    }

    pub fn len(&self) -> usize {
        self.nx * self.nxi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 2π/(dx·dxi); values below 2 are rejected at construction.
    pub fn oversampling_ratio(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.dx * self.dxi)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dxi
    }

    pub fn x_node(&self, j: usize) -> f64 {
        (j as i64 - (self.nx / 2) as i64) as f64 * self.dx
    }

    pub fn xi_node(&self, k: usize) -> f64 {
        (k as i64 - (self.nxi / 2) as i64) as f64 * self.dxi
    }

    pub fn x_extent(&self) -> f64 {
        self.x_node(0).abs().max(self.x_node(self.nx - 1).abs())
    }

    pub fn xi_extent(&self) -> f64 {
        self.xi_node(0).abs().max(self.xi_node(self.nxi - 1).abs())
    }

    /// Row-major node list, x outer, ξ inner.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.nx {
            for k in 0..self.nxi {
                out.push((self.x_node(j), self.xi_node(k)));
            }
        }
        out
    }

    pub fn node(&self, idx: usize) -> (f64, f64) {
        (self.x_node(idx / self.nxi), self.xi_node(idx % self.nxi))
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.nxi + k
    }

    /// True if `(x, ξ)` lies inside the closed bounding box of the nodes.
    pub fn contains(&self, x: f64, xi: f64) -> bool {
        let (x0, x1) = (self.x_node(0), self.x_node(self.nx - 1));
        let (k0, k1) = (self.xi_node(0), self.xi_node(self.nxi - 1));
        x >= x0 && x <= x1 && xi >= k0 && xi <= k1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Gaussian,
    Hermite(u32),
    Custom,
}

/// Analysis/synthesis window. The inversion formula requires
/// ‖g‖ = (2π)^{−1/2} in one dimension.
#[derive(Debug, Clone)]
pub struct Window {
    pub state: SampledState,
    pub kind: WindowKind,
    pub l2_normalization: f64,
}

/// Required window norm (2π)^{−d/2} for synthesis, d = 1.
pub const SYNTHESIS_NORM: f64 = 0.3989422804014327; // (2π)^{-1/2}

impl Window {
    /// Standard Gaussian e^{−x²/2}, rescaled to ‖g‖ = (2π)^{−1/2}.
    pub fn gaussian(grid: GridSpec) -> Result<Self> {
        let raw = SampledState::from_fn(grid, |x| C64::new((-x * x / 2.0).exp(), 0.0))?;
        Self::normalized(raw, WindowKind::Gaussian)
    }

    /// Hermite function of order `k`, rescaled to ‖g‖ = (2π)^{−1/2}.
    pub fn hermite(grid: GridSpec, k: u32) -> Result<Self> {
        let raw = SampledState::from_fn(grid, |x| {
            let e = (-x * x / 2.0).exp();
            let mut h_prev = e; // order 0 up to normalization
            if k == 0 {
                return C64::new(h_prev, 0.0);
            }
            let mut h = std::f64::consts::SQRT_2 * x * e;
            for m in 1..k {
                let m = m as f64;
                let next = ((2.0 / (m + 1.0)).sqrt() * x * h) - ((m / (m + 1.0)).sqrt() * h_prev);
                h_prev = h;
                h = next;
            }
            C64::new(h, 0.0)
        })?;
        Self::normalized(raw, WindowKind::Hermite(k))
    }

    pub fn custom(state: SampledState) -> Result<Self> {
        Self::normalized(state, WindowKind::Custom)
    }

    fn normalized(raw: SampledState, kind: WindowKind) -> Result<Self> {
        let norm = raw.l2_norm();
        if norm <= 0.0 {
            return Err(CoreError::Normalization { got: norm, required: SYNTHESIS_NORM });
        }
        let state = raw.scale(C64::new(SYNTHESIS_NORM / norm, 0.0));
        let l2_normalization = state.l2_norm();
        Ok(Self { state, kind, l2_normalization })
    }

    pub fn grid(&self) -> &GridSpec {
        self.state.grid()
    }

    pub fn check_synthesis_norm(&self) -> Result<()> {
        let got = self.state.l2_norm();
        if (got - SYNTHESIS_NORM).abs() > 1e-08 * SYNTHESIS_NORM {
            return Err(CoreError::Normalization { got, required: SYNTHESIS_NORM });
        }
        Ok(())
    }
}

/// Table of STFT samples V_g f(x_j, ξ_k) over a lattice, row-major in x.
#[derive(Debug, Clone)]
pub struct StftTable {
    pub lattice: Lattice,
    pub values: Vec<C64>,
}

impl StftTable {
    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        Self { lattice, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |V| on the boundary ring relative to the peak; a coverage
    /// diagnostic for the lattice-truncation invariant.
    pub fn boundary_peak_ratio(&self) -> f64 {
        let p = self.peak();
        if p == 0.0 {
            return 0.0;
        }
        let (nx, nxi) = (self.lattice.nx, self.lattice.nxi);
        let mut worst: f64 = 0.0;
        for j in 0..nx {
            for k in 0..nxi {
                if j == 0 || j == nx - 1 || k == 0 || k == nxi - 1 {
                    worst = worst.max(self.values[self.lattice.index(j, k)].norm());
                }
            }
        }
        worst / p
    }
}

/// Translate a state by `a`: (T_a f)(y) = f(y − a). Grid-multiple shifts are
/// index rolls on the torus; other shifts go through the frequency domain.
pub fn translate(f: &SampledState, a: f64) -> Result<SampledState> {
    let n = f.grid().n();
    let dx = f.grid().dx();
    let steps = a / dx;
    let rounded = steps.round();
    if (steps - rounded).abs() < 1e-9 {
        let m = rounded as i64;
        let vals = f.values();
        let shifted: Vec<C64> = (0..n)
            .map(|j| {
                let src = (j as i64 - m).rem_euclid(n as i64) as usize;
                vals[src]
            })
            .collect();
        return SampledState::new(*f.grid(), shifted, f.domain());
    }
    let mut ff = fourier_forward(f)?;
    for (k, v) in ff.values_mut().iter_mut().enumerate() {
        let xi = (k as f64 - n as f64 / 2.0) * std::f64::consts::PI / f.grid().x_max();
        *v *= C64::from_polar(1.0, -a * xi);
    }
    fourier_inverse(&ff)
}

/// Modulate: (M_ξ f)(y) = e^{iξy} f(y).
pub fn modulate(f: &SampledState, xi: f64) -> SampledState {
    let grid = *f.grid();
    let mut values = Vec::with_capacity(f.values().len());
    for (j, v) in f.values().iter().enumerate() {
        let y = grid.x_node(j);
        values.push(v * C64::from_polar(1.0, xi * y));
    }
    SampledState::new(grid, values, f.domain()).expect("same grid")
}

/// Phase-space shift π(x,ξ)f(y) = e^{iξ(y−x)} f(y−x).
pub fn pi_shift(f: &SampledState, x: f64, xi: f64) -> Result<SampledState> {
    translate(&modulate(f, xi), x)
}

/// Inverse shift π(x,ξ)^{-1} f(y) = e^{−iξy} f(y+x).
pub fn pi_shift_inverse(f: &SampledState, x: f64, xi: f64) -> Result<SampledState> {
    Ok(modulate(&translate(f, -x)?, -xi))
}

fn check_lattice_on_grid(lat: &Lattice, grid: &GridSpec) -> Result<()> {
    if lat.xi_extent() > grid.xi_max() + 1e-12 {
        return Err(CoreError::LatticeBeyondNyquist(format!(
            "lattice ξ extent {:.3} exceeds π/Δx = {:.3}",
            lat.xi_extent(),
            grid.xi_max()
        )));
    }
    if lat.x_extent() > grid.x_max() + 1e-12 {
        return Err(CoreError::LatticeBeyondNyquist(format!(
            "lattice x extent {:.3} exceeds x_max = {:.3}",
            lat.x_extent(),
            grid.x_max()
        )));
    }
    Ok(())
}

/// True when every lattice frequency node falls on a grid frequency bin.
fn frequency_commensurate(lat: &Lattice, grid: &GridSpec) -> bool {
    let ratio = lat.dxi / grid.dxi();
    (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0
}

/// Short-time Fourier transform of `f` with window `g` on the lattice.
///
/// Row j fixes the window position x_j; the frequency slice is one FFT when
/// the lattice frequencies sit on grid bins, and a direct Riemann sum
/// otherwise. Rows are computed in parallel and merged in row order.
pub fn stft(f: &SampledState, g: &Window, lat: &Lattice) -> Result<StftTable> {
    if f.grid() != g.grid() {
        return Err(CoreError::GridMismatch);
    }
    check_lattice_on_grid(lat, f.grid())?;
    let grid = *f.grid();
    let n = grid.n();
    let dx = grid.dx();
    let use_fft = frequency_commensurate(lat, &grid);
    let fvals = f.values();

    let rows: Vec<Vec<C64>> = (0..lat.nx)
        .into_par_iter()
        .map(|j| {
            let xj = lat.x_node(j);
            let tg = translate(&g.state, xj).expect("grid translate");
            let windowed: Vec<C64> = fvals
                .iter()
                .zip(tg.values())
                .map(|(a, b)| a * b.conj())
                .collect();
            let mut row = Vec::with_capacity(lat.nxi);
            if use_fft {
                let w = SampledState::new(grid, windowed, DomainTag::Position).unwrap();
                let wf = fourier_forward(&w).unwrap();
                for k in 0..lat.nxi {
                    let xi = lat.xi_node(k);
                    let bin = (xi / grid.dxi()).round() as i64 + (n / 2) as i64;
                    let v = if (0..n as i64).contains(&bin) {
                        wf.values()[bin as usize]
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    row.push(v * C64::from_polar(1.0, xi * xj));
                }
            } else {
                for k in 0..lat.nxi {
                    let xi = lat.xi_node(k);
                    let mut acc = C64::new(0.0, 0.0);
                    for (jy, w) in windowed.iter().enumerate() {
                        let y = grid.x_node(jy);
                        acc += w * C64::from_polar(1.0, -xi * y);
                    }
                    row.push(acc * dx * C64::from_polar(1.0, xi * xj));
                }
            }
            row
        })
        .collect();

    let mut values = Vec::with_capacity(lat.len());
    for row in rows {
        values.extend(row);
    }
    Ok(StftTable { lattice: lat.clone(), values })
}

/// Riemann-sum synthesis f ≈ Σ_z V(z) π(z) g · dA.
///
/// Rejects windows that violate ‖g‖ = (2π)^{−1/2}; no silent rescaling.
pub fn istft(tbl: &StftTable, g: &Window) -> Result<SampledState> {
    g.check_synthesis_norm()?;
    let lat = &tbl.lattice;
    if lat.oversampling_ratio() < 2.0 - 1e-9 {
        return Err(CoreError::InvalidLattice("under-sampled lattice".into()));
    }
    let grid = *g.grid();
    check_lattice_on_grid(lat, &grid)?;
    let n = grid.n();
    let da = lat.cell_area();

    let rows: Vec<Vec<C64>> = (0..lat.nx)
        .into_par_iter()
        .map(|j| {
            let xj = lat.x_node(j);
            let tg = translate(&g.state, xj).expect("grid translate");
            // s_j(y) = Σ_k V[j,k] e^{iξ_k (y − x_j)}
            let coeffs: Vec<C64> = (0..lat.nxi)
                .map(|k| {
                    let xi = lat.xi_node(k);
                    tbl.values[lat.index(j, k)] * C64::from_polar(1.0, -xi * xj)
                })
                .collect();
            (0..n)
                .map(|jy| {
                    let y = grid.x_node(jy);
                    let mut s = C64::new(0.0, 0.0);
                    for (k, c) in coeffs.iter().enumerate() {
                        s += c * C64::from_polar(1.0, lat.xi_node(k) * y);
                    }
                    s * tg.values()[jy]
                })
                .collect()
        })
        .collect();

    let mut out = vec![C64::new(0.0, 0.0); n];
    for row in rows {
        for (o, r) in out.iter_mut().zip(row) {
            *o += r;
        }
    }
    for v in &mut out {
        *v *= da;
    }
    SampledState::new(grid, out, DomainTag::Position)
}

/// A default lattice for a grid: balanced half-unit steps covering 90 % of
/// the spatial range (heavily oversampled).
pub fn auto_lattice(grid: &GridSpec) -> Result<Lattice> {
    let ext = 0.9 * grid.x_max().min(grid.xi_max());
    Lattice::from_extents(0.5, 0.5, ext, ext)
}

/// Upper bound check for the window-change inequality
/// |V_h f| ≤ ‖g‖⁻² (|V_g f| ∗ |V_h g|); returns the worst LHS − RHS over the
/// lattice (non-positive up to quadrature tolerance when it holds).
pub fn window_change_domination_check(
    f: &SampledState,
    g: &Window,
    h: &Window,
    lat: &Lattice,
) -> Result<f64> {
    let gn = g.state.l2_norm();
    if gn <= 0.0 {
        return Err(CoreError::Normalization { got: gn, required: SYNTHESIS_NORM });
    }
    let lhs = stft(f, h, lat)?;
    let a = stft(f, g, lat)?;
    // |V_h g| on the difference lattice (same steps, doubled counts).
    let diff = Lattice::new(lat.dx, lat.dxi, 2 * lat.nx, 2 * lat.nxi)?;
    let b = stft(&g.state, h, &diff)?;
    let da = lat.cell_area();
    let inv_g2 = 1.0 / (gn * gn);

    let worst = (0..lat.len())
        .into_par_iter()
        .map(|wi| {
            let (jw, kw) = (wi / lat.nxi, wi % lat.nxi);
            let mut conv = 0.0;
            for jz in 0..lat.nx {
                // difference index: (jw − jz) + nx etc.
                let jd = (jw as i64 - jz as i64 + lat.nx as i64) as usize;
                for kz in 0..lat.nxi {
                    let kd = (kw as i64 - kz as i64 + lat.nxi as i64) as usize;
                    conv += a.values[lat.index(jz, kz)].norm()
                        * b.values[diff.index(jd, kd)].norm();
                }
            }
            lhs.values[wi].norm() - inv_g2 * conv * da
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::relative_l2_error;
    use approx::assert_abs_diff_eq;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(512, 4.0 * std::f64::consts::PI).unwrap()
    }

    fn norm_gaussian(g: GridSpec) -> SampledState {
        SampledState::from_fn(g, |x| {
            C64::new(std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
        })
        .unwrap()
    }

    /// Lattice at a per-axis oversampling factor `m` (ratio m² in 2π/(dx·dxi)).
    fn balanced_lattice(per_axis: f64, ext: f64) -> Lattice {
        let s = (TAU / (per_axis * per_axis)).sqrt();
        Lattice::from_extents(s, s, ext, ext).unwrap()
    }

    #[test]
    fn lattice_rejects_undersampling() {
        assert!(Lattice::new(2.0, 2.0, 8, 8).is_err());
        assert!(Lattice::new(1.0, 1.0, 8, 8).is_ok());
    }

    #[test]
    fn stft_at_origin_is_inner_product() {
        let g = grid();
        let f = norm_gaussian(g);
        let w = Window::gaussian(g).unwrap();
        let lat = Lattice::new(1.0, 1.0, 4, 4).unwrap();
        let tbl = stft(&f, &w, &lat).unwrap();
        let idx = lat.index(2, 2); // node (0, 0)
        assert_eq!(lat.node(idx), (0.0, 0.0));
        let ip = f.inner(&w.state).unwrap();
        assert!((tbl.values[idx] - ip).norm() < 1e-13);
    }

    #[test]
    fn gaussian_stft_closed_form() {
        // |V_g g(x,ξ)| = ‖g‖²·e^{−(x²+ξ²)/4}
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let lat = Lattice::new(0.5, 0.5, 16, 16).unwrap();
        let tbl = stft(&w.state, &w, &lat).unwrap();
        let g2 = SYNTHESIS_NORM * SYNTHESIS_NORM;
        for &(j, k) in &[(8usize, 8usize), (10, 8), (8, 11), (12, 12), (3, 14)] {
            let (x, xi) = (lat.x_node(j), lat.xi_node(k));
            let expect = g2 * (-(x * x + xi * xi) / 4.0).exp();
            let got = tbl.values[lat.index(j, k)].norm();
            assert!(
                (got - expect).abs() < 1e-8,
                "({x},{xi}): got {got:.3e} expected {expect:.3e}"
            );
        }
    }

    #[test]
    fn stft_covariance_under_shifts() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let lat = Lattice::new(0.5, 0.5, 24, 24).unwrap();
        let (x0, xi0) = (1.0, -1.5); // two lattice steps in x, three in ξ
        let shifted = pi_shift(&f, x0, xi0).unwrap();
        let a = stft(&shifted, &w, &lat).unwrap();
        let b = stft(&f, &w, &lat).unwrap();
        for j in 4..20 {
            for k in 4..20 {
                let (x, xi) = (lat.x_node(j), lat.xi_node(k));
                let lhs = a.values[lat.index(j, k)].norm();
                // z − z₀ on the lattice
                let j2 = ((x - x0) / lat.dx()).round() as i64 + (lat.nx() / 2) as i64;
                let k2 = ((xi - xi0) / lat.dxi()).round() as i64 + (lat.nxi() / 2) as i64;
                let rhs = b.values[lat.index(j2 as usize, k2 as usize)].norm();
                assert!((lhs - rhs).abs() < 1e-10, "at ({x},{xi}): {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn stft_linear_in_f_conjugate_linear_in_g() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let lat = Lattice::new(1.0, 1.0, 8, 8).unwrap();
        let c = C64::new(0.7, -0.4);
        let a = stft(&f.scale(c), &w, &lat).unwrap();
        let b = stft(&f, &w, &lat).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y * c).norm() < 1e-12);
        }
        // conjugate linearity in g: scale the window state directly
        let mut wc = w.clone();
        wc.state = wc.state.scale(c);
        let ac = stft(&f, &wc, &lat).unwrap();
        for (x, y) in ac.values.iter().zip(&b.values) {
            assert!((x - y * c.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn stft_modulus_invariant_under_unimodular_factor() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let lat = Lattice::new(1.0, 1.0, 8, 8).unwrap();
        let a = stft(&f.scale(C64::from_polar(1.0, 1.234)), &w, &lat).unwrap();
        let b = stft(&f, &w, &lat).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_gaussian_at_oversampling_4_per_axis() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let lat = balanced_lattice(4.0, 11.5);
        let tbl = stft(&f, &w, &lat).unwrap();
        let rec = istft(&tbl, &w).unwrap();
        let err = relative_l2_error(&rec, &f);
        assert!(err < 1e-6, "roundtrip error {err:.3e}");
    }

    #[test]
    fn roundtrip_zero_table() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let lat = Lattice::new(0.5, 0.5, 8, 8).unwrap();
        let rec = istft(&StftTable::zeros(lat), &w).unwrap();
        assert_eq!(rec.l2_norm(), 0.0);
    }

    #[test]
    fn roundtrip_hermite_state() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let h1 = Window::hermite(g, 1).unwrap().state.scale(C64::new(1.0 / SYNTHESIS_NORM, 0.0));
        let lat = balanced_lattice(4.0, 11.5);
        let tbl = stft(&h1, &w, &lat).unwrap();
        let rec = istft(&tbl, &w).unwrap();
        let err = relative_l2_error(&rec, &h1);
        assert!(err < 1e-5, "roundtrip error {err:.3e}");
    }

    #[test]
    fn istft_rejects_denormalized_window() {
        let g = grid();
        let mut w = Window::gaussian(g).unwrap();
        w.state = w.state.scale(C64::new(2.0, 0.0));
        let lat = Lattice::new(0.5, 0.5, 8, 8).unwrap();
        assert!(matches!(
            istft(&StftTable::zeros(lat), &w),
            Err(CoreError::Normalization { .. })
        ));
    }

    #[test]
    fn roundtrip_error_decreases_with_oversampling() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let mut last = f64::INFINITY;
        for ratio in [2.0f64, 4.0, 8.0] {
            let s = (TAU / ratio).sqrt();
            let lat = Lattice::from_extents(s, s, 11.5, 11.5).unwrap();
            let tbl = stft(&f, &w, &lat).unwrap();
            let err = relative_l2_error(&istft(&tbl, &w).unwrap(), &f);
            assert!(err < last, "ratio {ratio}: {err:.3e} !< {last:.3e}");
            last = err;
        }
    }

    #[test]
    fn translate_matches_analytic_gaussian_for_fractional_shift() {
        let g = grid();
        let f = norm_gaussian(g);
        let a = 0.7313; // not a grid multiple
        let t = translate(&f, a).unwrap();
        let expect = SampledState::from_fn(g, |x| {
            C64::new(std::f64::consts::PI.powf(-0.25) * (-(x - a) * (x - a) / 2.0).exp(), 0.0)
        })
        .unwrap();
        assert!(relative_l2_error(&t, &expect) < 1e-12);
    }

    #[test]
    fn pi_shift_inverse_is_inverse() {
        let g = grid();
        let f = norm_gaussian(g);
        let shifted = pi_shift(&f, 1.3, -2.1).unwrap();
        let back = pi_shift_inverse(&shifted, 1.3, -2.1).unwrap();
        assert!(relative_l2_error(&back, &f) < 1e-12);
    }

    #[test]
    fn domination_gaussian_triple() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let f = norm_gaussian(g);
        let lat = Lattice::new(0.5, 0.5, 20, 20).unwrap();
        let v = window_change_domination_check(&f, &w, &w, &lat).unwrap();
        assert!(v <= 1e-8, "violation {v:.3e}");
    }

    #[test]
    fn domination_zero_state() {
        let g = grid();
        let w = Window::gaussian(g).unwrap();
        let lat = Lattice::new(0.5, 0.5, 12, 12).unwrap();
        let v = window_change_domination_check(&SampledState::zeros(g), &w, &w, &lat).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-300);
    }

    #[test]
    fn domination_hermite_window_on_smooth_state() {
        let g = grid();
        let gauss = Window::gaussian(g).unwrap();
        let herm = Window::hermite(g, 1).unwrap();
        // smooth decaying state: superposition of a few wave packets
        let mut f = SampledState::zeros(g);
        for (i, &(x0, xi0, re, im)) in
            [(0.4, 1.3, 0.9, 0.1), (-1.1, -0.6, 0.4, -0.7), (2.0, 0.3, -0.5, 0.2)]
                .iter()
                .enumerate()
        {
            let pkt = pi_shift(&norm_gaussian(g), x0, xi0).unwrap();
            f = f.add(&pkt.scale(C64::new(re, im + i as f64 * 0.01))).unwrap();
        }
        let lat = Lattice::new(0.5, 0.5, 20, 20).unwrap();
        let lhs_peak = stft(&f, &herm, &lat).unwrap().peak();
        let v = window_change_domination_check(&f, &gauss, &herm, &lat).unwrap();
        assert!(v <= 1e-6 * lhs_peak, "violation {v:.3e} vs peak {lhs_peak:.3e}");
    }
}
