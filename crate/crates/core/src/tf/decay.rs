//! Exponential decay fits over phase space and the membership report for the
//! Gelfand–Shilov class S¹₁ (analytic with exponential decay), which is
//! characterized by exponential STFT decay.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::field::{fourier_forward, SampledState};
use crate::tf::{auto_lattice, stft, StftTable, Window};

/// Fitted rates below this threshold count as "no decay" (flat/noise).
pub const DECAY_RATE_THRESHOLD: f64 = 0.01;

/// Result of a least-squares fit  log|v| ≈ log_amplitude − rate·d.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// log C of the fitted envelope C·e^{−rate·d}.
    pub log_amplitude: f64,
    /// Decay rate ε per unit phase-space distance.
    pub rate: f64,
    /// RMS of the log-residuals over the fitted samples.
    pub fit_residual: f64,
    /// Absolute floor below which samples were ignored.
    pub floor: f64,
}

impl DecayFit {
    pub fn is_flat(&self) -> bool {
        self.rate.abs() < DECAY_RATE_THRESHOLD
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Samples below `floor_rel · peak` are ignored (discretization noise).
    pub floor_rel: f64,
    /// Samples inside this distance are ignored; asymptotic estimates say
    /// nothing near the origin.
    pub core_radius: f64,
    /// Optional upper distance cut for a bounded fit window.
    pub d_max: Option<f64>,
    pub min_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { floor_rel: 1e-13, core_radius: 2.0, d_max: None, min_samples: 20 }
    }
}

/// Least-squares fit of log v against −d over `(d, v)` samples.
pub fn fit_log_decay(
    samples: impl IntoIterator<Item = (f64, f64)>,
    peak: f64,
    opts: &FitOptions,
) -> Result<DecayFit> {
    let floor = opts.floor_rel * peak;
    let mut n = 0usize;
    let (mut sd, mut sd2, mut sl, mut sdl) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for (d, v) in samples {
        if !(v.is_finite() && d.is_finite()) || v < floor || d <= opts.core_radius {
            continue;
        }
        if let Some(dm) = opts.d_max {
            if d > dm {
                continue;
            }
        }
        let l = v.ln();
        n += 1;
        sd += d;
        sd2 += d * d;
        sl += l;
        sdl += d * l;
        kept.push((d, l));
    }
    if n < opts.min_samples {
        return Err(CoreError::TooFewSamples { got: n, required: opts.min_samples });
    }
    let nf = n as f64;
    let var = sd2 / nf - (sd / nf) * (sd / nf);
    if var < 1e-12 {
        return Err(CoreError::DegenerateFit(format!(
            "distance spread too small (var = {var:.3e})"
        )));
    }
    let cov = sdl / nf - (sd / nf) * (sl / nf);
    let slope = cov / var; // of log v against d
    let rate = -slope;
    let log_amplitude = sl / nf + rate * (sd / nf);
    let mut ss = 0.0;
    for (d, l) in &kept {
        let r = l - (log_amplitude - rate * d);
        ss += r * r;
    }
    Ok(DecayFit { log_amplitude, rate, fit_residual: (ss / nf).sqrt(), floor })
}

/// Distance reference for a phase-space decay fit.
pub enum DecayCenter {
    Point(f64, f64),
    /// One center per lattice node, row-major.
    PerNode(Vec<(f64, f64)>),
}

/// Fit |V(z)| ≈ C e^{−ε |z − center(z)|} over the table.
pub fn fit_exponential_decay(
    tbl: &StftTable,
    center: &DecayCenter,
    opts: &FitOptions,
) -> Result<DecayFit> {
    if let DecayCenter::PerNode(cs) = center {
        if cs.len() != tbl.values.len() {
            return Err(CoreError::InvalidLattice(
                "per-node center table does not match lattice".into(),
            ));
        }
    }
    let peak = tbl.peak();
    let samples = tbl.values.iter().enumerate().map(|(i, v)| {
        let (x, xi) = tbl.lattice.node(i);
        let (cx, cxi) = match center {
            DecayCenter::Point(a, b) => (*a, *b),
            DecayCenter::PerNode(cs) => cs[i],
        };
        (((x - cx).powi(2) + (xi - cxi).powi(2)).sqrt(), v.norm())
    });
    fit_log_decay(samples, peak, opts)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MembershipReport {
    pub position_rate: f64,
    pub frequency_rate: f64,
    pub stft_rate: f64,
    pub pass: bool,
}

/// Fits exponential rates to |f(x)|, |f̂(ξ)| and |V_g f(z)| and flags whether
/// all three clear the decay threshold. A bounded-box proxy: rates are slopes
/// over the covered range, not true asymptotics.
pub fn s11_membership_report(f: &SampledState, g: &Window) -> Result<MembershipReport> {
    let bm = f.boundary_mass();
    if bm >= 1e-10 {
        return Err(CoreError::BoundaryMass { mass: bm, limit: 1e-10 });
    }
    let opts = FitOptions::default();
    let grid = *f.grid();

    let pos_peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pos = fit_log_decay(
        f.values().iter().enumerate().map(|(j, v)| (grid.x_node(j).abs(), v.norm())),
        pos_peak,
        &opts,
    )?;

    let ff = fourier_forward(f)?;
    let f_peak = ff.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let freq = fit_log_decay(
        ff.values().iter().enumerate().map(|(k, v)| (grid.xi_node(k).abs(), v.norm())),
        f_peak,
        &opts,
    )?;

    let lat = auto_lattice(&grid)?;
    let tbl = stft(f, g, &lat)?;
    let st = fit_exponential_decay(&tbl, &DecayCenter::Point(0.0, 0.0), &opts)?;

    let pass = pos.rate > DECAY_RATE_THRESHOLD
        && freq.rate > DECAY_RATE_THRESHOLD
        && st.rate > DECAY_RATE_THRESHOLD;
    Ok(MembershipReport {
        position_rate: pos.rate,
        frequency_rate: freq.rate,
        stft_rate: st.rate,
        pass,
    })
}
