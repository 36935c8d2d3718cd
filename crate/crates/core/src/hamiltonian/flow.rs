//! Hamiltonian flow integration.
//!
//! The flow solves ẋ = a_ξ, ξ̇ = −a_x from (x⁰, ξ⁰) = (x, ξ). The phase ψ and
//! the Jacobian ∂(xᵗ,ξᵗ)/∂(x,ξ) are carried as extra components of one RK4
//! system, so all quantities share the fourth-order accuracy and the output
//! is deterministic for a fixed step count.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::tf::Lattice;

use super::SymbolModel;

const BLOWUP_LIMIT: f64 = 1e6;

/// Trajectory, phase and flow Jacobian for one phase-space seed.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub t_grid: Vec<f64>,
    /// Phase-space points (x…, ξ…), one per time node.
    pub traj: Vec<DVector<f64>>,
    pub psi: Vec<f64>,
    pub jac: Vec<DMatrix<f64>>,
    /// Richardson estimate from comparing against a half-step-count run.
    pub step_halving_error: f64,
}

impl FlowResult {
    pub fn final_point(&self) -> &DVector<f64> {
        self.traj.last().expect("nonempty trajectory")
    }

    pub fn final_jac(&self) -> &DMatrix<f64> {
        self.jac.last().expect("nonempty trajectory")
    }

    pub fn final_psi(&self) -> f64 {
        *self.psi.last().expect("nonempty trajectory")
    }

    pub fn max_det_deviation(&self) -> f64 {
        self.jac
            .iter()
            .map(|j| (j.determinant() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Layout of the augmented state: [z(2d) | ψ | J row-major (2d)²].
fn rhs(a: &SymbolModel, t: f64, y: &[f64], dy: &mut [f64], reverse: bool) {
    let d = a.dim();
    let n = 2 * d;
    let x = &y[0..d];
    let xi = &y[d..n];
    let gx = a.grad_x(t, x, xi);
    let gxi = a.grad_xi(t, x, xi);
    let sign = if reverse { -1.0 } else { 1.0 };
    for i in 0..d {
        dy[i] = sign * gxi[i];
        dy[d + i] = -sign * gx[i];
    }
    // ψ̇ = ξ·a_ξ − a
    let mut p = 0.0;
    for i in 0..d {
        p += xi[i] * gxi[i];
    }
    dy[n] = sign * (p - a.evaluate(t, x, xi));
    // J̇ = (J_sympl · Hess a) · J
    let h = a.hessian(t, x, xi);
    // A = J_sympl·H: top rows are the ξ-rows of H, bottom rows −x-rows.
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                let a_rm = if r < d { h[(d + r, m)] } else { -h[(r - d, m)] };
                acc += a_rm * y[n + 1 + m * n + c];
            }
            dy[n + 1 + r * n + c] = sign * acc;
        }
    }
}

struct RawFlow {
    t_grid: Vec<f64>,
    states: Vec<Vec<f64>>,
}

/// Fixed-step RK4 on the augmented system. `reverse` integrates the
/// time-reversed field (for flow inversion); `t0` offsets the symbol clock.
fn rk4_flow(
    a: &SymbolModel,
    seed: &[f64],
    t0: f64,
    t_span: f64,
    steps: usize,
    reverse: bool,
    record: bool,
) -> Result<RawFlow> {
    let d = a.dim();
    let n = 2 * d;
    let len = n + 1 + n * n;
    let mut y = vec![0.0; len];
    y[..n].copy_from_slice(seed);
    for i in 0..n {
        y[n + 1 + i * n + i] = 1.0;
    }
    let dt = t_span / steps as f64;
    let mut t_grid = Vec::with_capacity(if record { steps + 1 } else { 1 });
    let mut states = Vec::with_capacity(if record { steps + 1 } else { 1 });
    if record {
        t_grid.push(0.0);
        states.push(y.clone());
    }
    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    let mut tmp = vec![0.0; len];
    // symbol clock: forward runs at t0 + s, reversed runs at t0 − s
    let clock = |s: f64| if reverse { t0 - s } else { t0 + s };
    for step in 0..steps {
        let s = step as f64 * dt;
        rhs(a, clock(s), &y, &mut k1, reverse);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        rhs(a, clock(s + 0.5 * dt), &tmp, &mut k2, reverse);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        rhs(a, clock(s + 0.5 * dt), &tmp, &mut k3, reverse);
        for i in 0..len {
            tmp[i] = y[i] + dt * k3[i];
        }
        rhs(a, clock(s + dt), &tmp, &mut k4, reverse);
        for i in 0..len {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let zmag = y[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !zmag.is_finite() || zmag > BLOWUP_LIMIT {
            return Err(CoreError::FlowBlowup { t_last: s });
        }
        if record {
            t_grid.push(s + dt);
            states.push(y.clone());
        }
    }
    if !record {
        t_grid.push(t_span);
        states.push(y);
    }
    Ok(RawFlow { t_grid, states })
}

fn unpack(d: usize, raw: RawFlow, err: f64) -> FlowResult {
    let n = 2 * d;
    let mut traj = Vec::with_capacity(raw.states.len());
    let mut psi = Vec::with_capacity(raw.states.len());
    let mut jac = Vec::with_capacity(raw.states.len());
    for s in &raw.states {
        traj.push(DVector::from_column_slice(&s[..n]));
        psi.push(s[n]);
        jac.push(DMatrix::from_fn(n, n, |r, c| s[n + 1 + r * n + c]));
    }
    FlowResult { t_grid: raw.t_grid, traj, psi, jac, step_halving_error: err }
}

/// Integrate the flow from `seed` over `[0, t_end]` with `steps` RK4 steps.
pub fn integrate_flow(
    a: &SymbolModel,
    seed: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<FlowResult> {
    if seed.len() != 2 * a.dim() {
        return Err(CoreError::OutOfRange(format!(
            "seed length {} does not match dimension {}",
            seed.len(),
            a.dim()
        )));
    }
    if !(t_end >= 0.0) {
        return Err(CoreError::OutOfRange("t_end must be nonnegative".into()));
    }
    let steps = steps.max(1);
    let fine = rk4_flow(a, seed, 0.0, t_end, steps, false, true)?;
    let err = if steps >= 2 {
        let coarse = rk4_flow(a, seed, 0.0, t_end, steps / 2, false, false)?;
        let zf = fine.states.last().unwrap();
        let zc = coarse.states.last().unwrap();
        let n = 2 * a.dim();
        zf[..n]
            .iter()
            .zip(&zc[..n])
            .map(|(f, c)| (f - c).powi(2))
            .sum::<f64>()
            .sqrt()
            / 15.0
    } else {
        f64::NAN
    };
    Ok(unpack(a.dim(), fine, err))
}

/// χ_t^{−1}(w): integrate the reversed field from `w` for time `t`.
pub fn invert_flow_point(a: &SymbolModel, w: &[f64], t: f64, steps: usize) -> Result<DVector<f64>> {
    let raw = rk4_flow(a, w, t, t, steps.max(1), true, false)?;
    let n = 2 * a.dim();
    Ok(DVector::from_column_slice(&raw.states.last().unwrap()[..n]))
}

/// Flow data over every node of a phase-space lattice (d = 1).
#[derive(Debug, Clone)]
pub struct FlowMapTable {
    pub lattice: Lattice,
    pub t: f64,
    /// χ_t(z) per node, row-major.
    pub chi: Vec<(f64, f64)>,
    pub psi: Vec<f64>,
    /// Row-major 2×2 Jacobian per node: [∂x/∂x, ∂x/∂ξ, ∂ξ/∂x, ∂ξ/∂ξ].
    pub jac: Vec<[f64; 4]>,
    pub failed: Vec<bool>,
    pub lipschitz: f64,
    pub inv_lipschitz: f64,
}

impl FlowMapTable {
    pub fn max_det_deviation(&self) -> f64 {
        self.jac
            .iter()
            .zip(&self.failed)
            .filter(|(_, f)| !**f)
            .map(|(j, _)| (j[0] * j[3] - j[1] * j[2] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Identity table at t = 0 (cheap path for degenerate requests).
    pub fn identity(lat: &Lattice) -> Self {
        let nodes = lat.nodes();
        Self {
            lattice: lat.clone(),
            t: 0.0,
            chi: nodes.clone(),
            psi: vec![0.0; nodes.len()],
            jac: vec![[1.0, 0.0, 0.0, 1.0]; nodes.len()],
            failed: vec![false; nodes.len()],
            lipschitz: 1.0,
            inv_lipschitz: 1.0,
        }
    }
}

/// Batch of [`integrate_flow`] over all lattice nodes, plus global bi-Lipschitz
/// estimates over node pairs. Per-node blow-ups are flagged; the batch
/// continues.
pub fn flow_map_on_lattice(
    a: &SymbolModel,
    lat: &Lattice,
    t: f64,
    steps: usize,
) -> Result<FlowMapTable> {
    if a.dim() != 1 {
        return Err(CoreError::Unsupported("lattice flow maps are one-dimensional".into()));
    }
    if t == 0.0 {
        return Ok(FlowMapTable::identity(lat));
    }
    let nodes = lat.nodes();
    let per_node: Vec<(f64, f64, f64, [f64; 4], bool)> = nodes
        .par_iter()
        .map(|&(x, xi)| match rk4_flow(a, &[x, xi], 0.0, t, steps.max(1), false, false) {
            Ok(raw) => {
                let s = raw.states.last().unwrap();
                (s[0], s[1], s[2], [s[3], s[4], s[5], s[6]], false)
            }
            Err(_) => (f64::NAN, f64::NAN, f64::NAN, [f64::NAN; 4], true),
        })
        .collect();
    let chi: Vec<(f64, f64)> = per_node.iter().map(|p| (p.0, p.1)).collect();
    let psi: Vec<f64> = per_node.iter().map(|p| p.2).collect();
    let jac: Vec<[f64; 4]> = per_node.iter().map(|p| p.3).collect();
    let failed: Vec<bool> = per_node.iter().map(|p| p.4).collect();

    let m = nodes.len();
    let (lip, inv_lip) = (0..m)
        .into_par_iter()
        .map(|i| {
            if failed[i] {
                return (0.0f64, 0.0f64);
            }
            let mut best = 0.0f64;
            let mut best_inv = 0.0f64;
            for j in (i + 1)..m {
                if failed[j] {
                    continue;
                }
                let dz = ((nodes[i].0 - nodes[j].0).powi(2) + (nodes[i].1 - nodes[j].1).powi(2))
                    .sqrt();
                let dc =
                    ((chi[i].0 - chi[j].0).powi(2) + (chi[i].1 - chi[j].1).powi(2)).sqrt();
                if dz > 0.0 && dc > 0.0 {
                    best = best.max(dc / dz);
                    best_inv = best_inv.max(dz / dc);
                }
            }
            (best, best_inv)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));

    Ok(FlowMapTable {
        lattice: lat.clone(),
        t,
        chi,
        psi,
        jac,
        failed,
        lipschitz: lip,
        inv_lipschitz: inv_lip,
    })
}

/// Consistency of dψ = ξᵗ dxᵗ − ξ dx: central differences of ψ over
/// re-integrated flows against the Jacobian expression. Returns the largest
/// relative error over the 2d seed coordinates.
pub fn phase_gradient_check(a: &SymbolModel, seed: &[f64], t: f64, steps: usize) -> Result<f64> {
    let d = a.dim();
    let base = integrate_flow(a, seed, t, steps)?;
    let jac = base.final_jac();
    let zt = base.final_point();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 0..2 * d {
        let mut sp = seed.to_vec();
        let mut sm = seed.to_vec();
        sp[i] += h;
        sm[i] -= h;
        let pp = integrate_flow(a, &sp, t, steps)?.final_psi();
        let pm = integrate_flow(a, &sm, t, steps)?.final_psi();
        let numeric = (pp - pm) / (2.0 * h);
        // Σ_m ξᵗ_m ∂xᵗ_m/∂(seed_i), minus ξ_i when differentiating in x_i
        let mut analytic = 0.0;
        for m in 0..d {
            analytic += zt[d + m] * jac[(m, i)];
        }
        if i < d {
            analytic -= seed[d + i];
        }
        let scale = numeric.abs().max(analytic.abs()).max(1.0);
        worst = worst.max((numeric - analytic).abs() / scale);
    }
    Ok(worst)
}
