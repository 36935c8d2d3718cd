//! Uniform grids, sampled complex states and the Fourier transform in the
//! angular-frequency convention
//!
//! ```text
//!     f̂(ξ) = ∫ e^{−i x ξ} f(x) dx,      ‖f̂‖² = (2π)^d ‖f‖².
//! ```
//!
//! All states live on a periodic torus `[−x_max, x_max)^d`; the induced
//! frequency grid covers `[−π/Δx, π/Δx)`. Periodization error is monitored
//! through the boundary-mass diagnostic, never hidden.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};

/// Uniform grid specification.
///
/// Nodes are `x_j = (j − n/2)·Δx` with `Δx = 2·x_max/n`, so `x = 0` is a
/// node and the grid covers `[−x_max, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    x_max: f64,
    d: usize,
}

impl GridSpec {
    /// One-dimensional grid with `n` points (power of two, ≥ 16) on `[−x_max, x_max)`.
    pub fn new(n: usize, x_max: f64) -> Result<Self> {
        Self::with_dim(n, x_max, 1)
    }

    /// Grid with dimension `d ∈ {1, 2}`; `d = 2` is only used by flow-level features.
    pub fn with_dim(n: usize, x_max: f64, d: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(CoreError::InvalidGrid(format!("x_max = {x_max} must be positive")));
        }
        if d == 0 || d > 2 {
            return Err(CoreError::InvalidGrid(format!("dimension {d} not supported")));
        }
        Ok(Self { n, x_max, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Spatial step Δx = 2·x_max/n.
    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.n as f64
    }

    /// Frequency step Δξ = 2π/(n·Δx) = π/x_max.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.x_max
    }

    /// Largest representable frequency magnitude, π/Δx.
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }

    pub fn x_node(&self, j: usize) -> f64 {
        (j as f64 - self.n as f64 / 2.0) * self.dx()
    }

    pub fn xi_node(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64 / 2.0) * self.dxi()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x_node(j)).collect()
    }

    pub fn xi_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.xi_node(k)).collect()
    }
}

/// Which variable a state is sampled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    Position,
    Frequency,
}

impl DomainTag {
    fn name(&self) -> &'static str {
        match self {
            DomainTag::Position => "position",
            DomainTag::Frequency => "frequency",
        }
    }
}

/// Complex-valued function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledState {
    grid: GridSpec,
    values: Vec<C64>,
    domain: DomainTag,
}

impl SampledState {
    pub fn new(grid: GridSpec, values: Vec<C64>, domain: DomainTag) -> Result<Self> {
        let expect = grid.n.pow(grid.d as u32);
        if values.len() != expect {
            return Err(CoreError::InvalidGrid(format!(
                "value length {} does not match grid ({} points)",
                values.len(),
                expect
            )));
        }
        Ok(Self { grid, values, domain })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.n.pow(grid.d as u32);
        Self { grid, values: vec![C64::new(0.0, 0.0); len], domain: DomainTag::Position }
    }

    /// Sample a function of the position variable on a 1-d grid.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Result<Self> {
        if grid.d != 1 {
            return Err(CoreError::Unsupported("from_fn requires a 1-d grid".into()));
        }
        let values = grid.x_nodes().into_iter().map(f).collect();
        Ok(Self { grid, values, domain: DomainTag::Position })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub(crate) fn with_domain(mut self, domain: DomainTag) -> Self {
        self.domain = domain;
        self
    }

    /// Step of the sampling variable (Δx in position, Δξ in frequency).
    pub fn step(&self) -> f64 {
        match self.domain {
            DomainTag::Position => self.grid.dx(),
            DomainTag::Frequency => self.grid.dxi(),
        }
    }

    /// Riemann-sum L² norm, `step^{d/2}·‖values‖₂`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.step().powi(self.grid.d as i32)).sqrt()
    }

    /// Riemann-sum inner product ⟨f, g⟩ = Σ f·conj(g)·step, linear in `self`.
    pub fn inner(&self, other: &SampledState) -> Result<C64> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch);
        }
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.step().powi(self.grid.d as i32))
    }

    /// Fraction of L² mass in the outer 10 % of the domain.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.n;
        let cut = match self.domain {
            DomainTag::Position => 0.9 * self.grid.x_max,
            DomainTag::Frequency => 0.9 * self.grid.xi_max(),
        };
        let mut outer = 0.0;
        let mut total = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let coord = (j as f64 - n as f64 / 2.0) * self.step();
            let m = v.norm_sqr();
            total += m;
            if coord.abs() >= cut {
                outer += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        Self { grid: self.grid, values, domain: self.domain }
    }

    pub fn add(&self, other: &SampledState) -> Result<Self> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(CoreError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { grid: self.grid, values, domain: self.domain })
    }

    pub fn sub(&self, other: &SampledState) -> Result<Self> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(CoreError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { grid: self.grid, values, domain: self.domain })
    }
}

/// ‖a − b‖ / ‖b‖ with the zero-denominator guard.
pub fn relative_l2_error(a: &SampledState, b: &SampledState) -> f64 {
    let db = b.l2_norm();
    let diff: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * a.step().powf(a.grid.d as f64 / 2.0);
    if db == 0.0 {
        diff
    } else {
        diff / db
    }
}

// Plan cache shared by every transform in the crate. Plans are Arc'ed and
// executed outside the lock, so concurrent callers only contend on lookup.
static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut guard = planner.lock().expect("fft planner poisoned");
    if inverse {
        guard.plan_fft_inverse(n)
    } else {
        guard.plan_fft_forward(n)
    }
}

/// Unnormalized DFT `Σ_j v_j e^{−2πi jk/n}` in place.
pub(crate) fn dft_forward(values: &mut [C64]) {
    plan(values.len(), false).process(values);
}

/// Unnormalized inverse DFT `Σ_k v_k e^{+2πi jk/n}` in place.
pub(crate) fn dft_inverse(values: &mut [C64]) {
    plan(values.len(), true).process(values);
}

/// Samples of f̂(ξ) = ∫ e^{−ixξ} f(x) dx on the induced frequency grid.
pub fn fourier_forward(f: &SampledState) -> Result<SampledState> {
    if f.domain != DomainTag::Position {
        return Err(CoreError::DomainMismatch { expected: "position", got: f.domain.name() });
    }
    if f.grid.d != 1 {
        return Err(CoreError::Unsupported("fourier_forward requires d = 1".into()));
    }
    let dx = f.grid.dx();
    // f̂_k = Δx·(−1)^k·DFT[(−1)^j f_j](k), valid because n ≡ 0 mod 4.
    let mut buf: Vec<C64> = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .collect();
    dft_forward(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= if k % 2 == 0 { dx } else { -dx };
    }
    Ok(SampledState { grid: f.grid, values: buf, domain: DomainTag::Frequency })
}

/// Inverse of [`fourier_forward`]: f(x) = (2π)^{−1} ∫ e^{ixξ} F(ξ) dξ.
pub fn fourier_inverse(ff: &SampledState) -> Result<SampledState> {
    if ff.domain != DomainTag::Frequency {
        return Err(CoreError::DomainMismatch { expected: "frequency", got: ff.domain.name() });
    }
    if ff.grid.d != 1 {
        return Err(CoreError::Unsupported("fourier_inverse requires d = 1".into()));
    }
    let n = ff.grid.n;
    let dx = ff.grid.dx();
    let mut buf: Vec<C64> = ff
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .collect();
    dft_inverse(&mut buf);
    let scale = 1.0 / (n as f64 * dx);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= if j % 2 == 0 { scale } else { -scale };
    }
    Ok(SampledState { grid: ff.grid, values: buf, domain: DomainTag::Position })
}
