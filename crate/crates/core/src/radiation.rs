//! Radiation emitted while Alice recombines a charged superposition.
//!
//! In the long-wavelength limit the current is q·v(t) localized at the
//! particle, so the field ends in the coherent state |f⟩ with
//! f(ω) ∝ q·v(ω)·√ω. After averaging the transverse projector over
//! directions (2/3), every overlap reduces to a one-dimensional ω-integral:
//!
//!   −ln|⟨0|f⟩|² = (2/(3π))·(q/q_P)²·∫₀^∞ |v(ω)|²·ω dω / c².

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::quad::{self, gauss_legendre};
use crate::table;
use crate::units::PhysicalConstants;

/// Hard form of "d ≪ c·t0".
pub const RELATIVISTIC_GATE: f64 = 1.0 / 3.0;

/// Minimum number of samples in a tabulated trajectory.
pub const MIN_SAMPLES: usize = 16;

/// Endpoint speeds of a tabulated path must be below this fraction of scale/t0.
pub const ENDPOINT_SPEED_TOL: f64 = 1e-6;

/// Half-width in ω·t0 of the series region around the removable singularity.
const SINGULAR_WINDOW: f64 = 1e-4;

const MODE_RTOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryShape {
    SinSquared,
    Tabulated,
}

/// Path x(t) on [0, t0] from rest at 0 to rest at d.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryProfile {
    d: f64,
    t0: f64,
    path: Motion,
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    SinSquared,
    /// Cubic Hermite pieces: knot times, positions and slopes, all shifted to start at 0.
    Tabulated { t: Vec<f64>, x: Vec<f64>, slope: Vec<f64> },
}

impl TrajectoryProfile {
    /// x(t) = d·sin²(πt/(2t0)).
    pub fn sin_squared(d: f64, t0: f64) -> Result<Self> {
        non_negative("d", d)?;
        positive("t0", t0)?;
        Ok(Self { d, t0, path: Motion::SinSquared })
    }

    /// Builds a smooth path through `(t, x)` samples.
    ///
    /// Slopes come from 5-point local polynomial fits. The endpoint slopes
    /// must already be negligible (the particle starts and ends at rest);
    /// they are then pinned to zero so the interpolant does not radiate
    /// from a spurious initial kick.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidTrajectory(format!(
                "{} samples given, at least {MIN_SAMPLES} required",
                samples.len()
            )));
        }
        if samples.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidTrajectory("sample times must be strictly increasing".into()));
        }
        let (t_start, x_start) = samples[0];
        let t: Vec<f64> = samples.iter().map(|s| s.0 - t_start).collect();
        let x: Vec<f64> = samples.iter().map(|s| s.1 - x_start).collect();
        let n = t.len();
        let t0 = t[n - 1];
        let d = x[n - 1];
        let mut slope: Vec<f64> = (0..n).map(|i| stencil_slope(&t, &x, i)).collect();

        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let allowed = ENDPOINT_SPEED_TOL * scale / t0;
        for &i in &[0, n - 1] {
            if slope[i].abs() > allowed {
                return Err(Error::InvalidTrajectory(format!(
                    "endpoint speed {:e} m/s at t = {:e} s exceeds {allowed:e} m/s; the path must start and end at rest",
                    slope[i], t[i]
                )));
            }
            slope[i] = 0.0;
        }
        Ok(Self { d, t0, path: Motion::Tabulated { t, x, slope } })
    }

    /// Loads a `t, x` CSV (seconds, metres) with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        Self::tabulated(&table::read_two_columns(path)?)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn shape(&self) -> TrajectoryShape {
        match self.path {
            Motion::SinSquared => TrajectoryShape::SinSquared,
            Motion::Tabulated { .. } => TrajectoryShape::Tabulated,
        }
    }

    /// Position at time `t`, clamped to the endpoints outside [0, t0].
    pub fn position(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t0);
        match &self.path {
            Motion::SinSquared => self.d * (PI * t / (2.0 * self.t0)).sin().powi(2),
            Motion::Tabulated { t: ts, x, slope } => {
                let i = segment(ts, t);
                let h = ts[i + 1] - ts[i];
                let s = (t - ts[i]) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * x[i]
                    + (s3 - 2.0 * s2 + s) * h * slope[i]
                    + (-2.0 * s3 + 3.0 * s2) * x[i + 1]
                    + (s3 - s2) * h * slope[i + 1]
            }
        }
    }

    /// Velocity at time `t`; zero outside [0, t0].
    pub fn velocity(&self, t: f64) -> f64 {
        if !(0.0..=self.t0).contains(&t) {
            return 0.0;
        }
        match &self.path {
            Motion::SinSquared => self.d * PI / (2.0 * self.t0) * (PI * t / self.t0).sin(),
            Motion::Tabulated { t: ts, x, slope } => {
                let i = segment(ts, t);
                let [a, b, c] = hermite_velocity(ts, x, slope, i);
                let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
                a + s * (b + s * c)
            }
        }
    }
}

fn segment(ts: &[f64], t: f64) -> usize {
    ts.partition_point(|&v| v <= t).clamp(1, ts.len() - 1) - 1
}

/// Coefficients of the velocity a + b·s + c·s² on segment `i`, s ∈ [0, 1].
fn hermite_velocity(ts: &[f64], x: &[f64], slope: &[f64], i: usize) -> [f64; 3] {
    let h = ts[i + 1] - ts[i];
    let dx = x[i + 1] - x[i];
    let (m0, m1) = (slope[i], slope[i + 1]);
    [m0, (6.0 * dx - 4.0 * h * m0 - 2.0 * h * m1) / h, (-6.0 * dx + 3.0 * h * m0 + 3.0 * h * m1) / h]
}

/// Derivative at node `i` of the polynomial through the 5 nearest nodes.
fn stencil_slope(t: &[f64], x: &[f64], i: usize) -> f64 {
    let n = t.len();
    let lo = i.saturating_sub(2).min(n - 5);
    let idx = lo..lo + 5;
    let ti = t[i];
    let mut sum = 0.0;
    for j in idx.clone() {
        let weight = if j == i {
            idx.clone().filter(|&k| k != i).map(|k| 1.0 / (ti - t[k])).sum::<f64>()
        } else {
            let num: f64 = idx.clone().filter(|&k| k != j && k != i).map(|k| ti - t[k]).product();
            let den: f64 = idx.clone().filter(|&k| k != j).map(|k| t[j] - t[k]).product();
            num / den
        };
        sum += weight * x[j];
    }
    sum
}

/// v(ω) = ∫₀^{t0} v(t)·e^{iωt} dt, in metres.
pub fn velocity_fourier(profile: &TrajectoryProfile, omega: f64) -> Complex64 {
    match &profile.path {
        Motion::SinSquared => sin_squared_fourier(profile.d, profile.t0, omega),
        Motion::Tabulated { t, x, slope } => {
            let mut total = Complex64::new(0.0, 0.0);
            for i in 0..t.len() - 1 {
                let h = t[i + 1] - t[i];
                let [a, b, c] = hermite_velocity(t, x, slope, i);
                let [j0, j1, j2] = quad::phase_moments(omega * h);
                total += Complex64::from_polar(h, omega * t[i]) * (a * j0 + b * j1 + c * j2);
            }
            total
        }
    }
}

fn sin_squared_fourier(d: f64, t0: f64, omega: f64) -> Complex64 {
    let u = omega * t0;
    let eps = u.abs() - PI;
    // cos(u/2)/(1−u²/π²) = π²·sin(ε/2)/(ε·(2π+ε)) with ε = |u| − π
    let ratio = if eps.abs() < SINGULAR_WINDOW {
        let sinc_half = 0.5 - eps * eps / 48.0;
        PI * PI * sinc_half / (2.0 * PI + eps)
    } else {
        (u / 2.0).cos() / (1.0 - u * u / (PI * PI))
    };
    Complex64::from_polar(d * ratio, u / 2.0)
}

fn check_gate(profile: &TrajectoryProfile, k: &PhysicalConstants) -> Result<()> {
    let ct0 = k.c() * profile.t0;
    if profile.d.abs() >= RELATIVISTIC_GATE * ct0 {
        return Err(Error::Relativistic { d: profile.d.abs(), ct0 });
    }
    Ok(())
}

fn charge_ratio(q: f64, k: &PhysicalConstants) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::NonPositive { name: "q", value: q });
    }
    Ok(q.abs() / k.planck_scales().charge)
}

/// ∫₀^∞ |v(ω)|²·ω dω in units of (d/t0)², evaluated in u = ω·t0.
fn dimensionless_mode_integral(profile: &TrajectoryProfile) -> Result<f64> {
    if profile.d == 0.0 && matches!(profile.path, Motion::SinSquared) {
        return Ok(0.0);
    }
    let t0 = profile.t0;
    let f = |u: f64| velocity_fourier(profile, u / t0).norm_sqr() * u;
    // panels of a quarter oscillation of cos²(u/2)
    let value = quad::integrate_to_infinity(f, 4.0 * PI, PI / 2.0, MODE_RTOL)?.value;
    let scale = if profile.d != 0.0 { profile.d } else { 1.0 };
    Ok(value / (scale * scale))
}

/// E such that |⟨0|f⟩|² = e^{−E}.
pub fn mode_integral(profile: &TrajectoryProfile, q: f64, k: &PhysicalConstants) -> Result<f64> {
    check_gate(profile, k)?;
    let ratio = charge_ratio(q, k)?;
    if ratio == 0.0 || profile.d == 0.0 {
        return Ok(0.0);
    }
    let beta = profile.d / (k.c() * profile.t0);
    Ok(2.0 / (3.0 * PI) * ratio * ratio * beta * beta * dimensionless_mode_integral(profile)?)
}

/// π·(π·Si(π) − 2)/4: the sin² mode integral ∫₀^∞ cos²(u/2)·u/(1 − u²/π²)² du.
pub fn sin_squared_mode_constant() -> f64 {
    PI * PI * (PI * quad::sine_integral(PI) - 2.0) / 4.0
}

/// Coefficient of (q/q_P)²·(d/(c·t0))² in the sin² exponent, just under 2.
pub fn sin_squared_exponent_constant() -> f64 {
    2.0 / (3.0 * PI) * sin_squared_mode_constant()
}

/// |⟨0|f⟩|²: probability that no photon was emitted.
pub fn vacuum_overlap(profile: &TrajectoryProfile, q: f64, k: &PhysicalConstants) -> Result<f64> {
    Ok((-mode_integral(profile, q, k)?).exp())
}

/// √2·(q/q_P)·(d/c).
pub fn min_radiationless_time(q: f64, d: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("q", q)?;
    positive("d", d)?;
    Ok(2f64.sqrt() * q / k.planck_scales().charge * d / k.c())
}

/// Quadrature nodes in ω with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    omega: Vec<f64>,
    weights: Vec<f64>,
}

impl ModeGrid {
    pub fn new(omega: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.len() != weights.len() {
            return Err(Error::InvalidTrajectory("mode grid needs matching, non-empty nodes and weights".into()));
        }
        if omega[0] <= 0.0 || omega.windows(2).any(|w| w[1] <= w[0]) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidTrajectory("mode nodes must be positive and strictly increasing".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidTrajectory("mode weights must be positive".into()));
        }
        Ok(Self { omega, weights })
    }

    /// Composite Gauss–Legendre on [0, panels·width].
    pub fn composite(width: f64, panels: usize, order: usize) -> Result<Self> {
        positive("panel width", width)?;
        if panels == 0 || order == 0 {
            return Err(Error::InvalidTrajectory("mode grid needs at least one panel and node".into()));
        }
        let (x, w) = gauss_legendre(order);
        let mut omega = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(&w) {
                omega.push(mid + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        Self::new(omega, weights)
    }

    /// 2048 nodes: 256 panels of width π/(2·t0), 8 nodes each.
    pub fn for_duration(t0: f64) -> Result<Self> {
        positive("t0", t0)?;
        Self::composite(PI / (2.0 * t0), 256, 8)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn max_omega(&self) -> f64 {
        *self.omega.last().expect("grid is non-empty")
    }
}

/// Coherent-state label on a mode grid, scaled so that Σ w·|f|² is the
/// mean photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementFunction {
    grid: ModeGrid,
    values: Vec<Complex64>,
    /// False when the grid reaches ω ≥ c/(3d), where the long-wavelength
    /// current no longer describes individual modes.
    pub long_wavelength: bool,
}

impl DisplacementFunction {
    pub fn new(grid: ModeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::MismatchedGrid);
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidTrajectory("non-finite displacement amplitude".into()));
        }
        Ok(Self { grid, values, long_wavelength: true })
    }

    pub fn zero(grid: &ModeGrid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid: grid.clone(), values, long_wavelength: true }
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Σ w·|f|².
    pub fn norm_sqr(&self) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, f)| w * f.norm_sqr()).sum()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::MismatchedGrid);
        }
        Ok(())
    }

    fn dot(&self, other: &Self) -> Complex64 {
        self.grid
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (f, g))| f.conj() * g * *w)
            .sum()
    }

    fn combine(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect(),
            long_wavelength: self.long_wavelength && other.long_wavelength,
        }
    }
}

/// f(ω) = i·(q/q_P)·√(4π)·v(ω)·√(ω/(6π²))/c on each grid node.
///
/// A grid extending past the long-wavelength limit is flagged on the
/// result rather than rejected; integrated quantities are dominated by
/// ω ~ 1/t0.
pub fn displacement_from_trajectory(
    profile: &TrajectoryProfile,
    q: f64,
    grid: &ModeGrid,
    k: &PhysicalConstants,
) -> Result<DisplacementFunction> {
    let ratio = charge_ratio(q, k)?;
    let prefactor = ratio * (4.0 * PI).sqrt() / k.c();
    let values = grid
        .omega
        .iter()
        .map(|&w| Complex64::new(0.0, prefactor * (w / (6.0 * PI * PI)).sqrt()) * velocity_fourier(profile, w))
        .collect();
    let mut f = DisplacementFunction::new(grid.clone(), values)?;
    f.long_wavelength = profile.d == 0.0 || grid.max_omega() < RELATIVISTIC_GATE * k.c() / profile.d.abs();
    Ok(f)
}

/// ⟨f|g⟩ = exp(−½‖f‖² − ½‖g‖² + Σ w·f*·g).
pub fn coherent_inner_product(f: &DisplacementFunction, g: &DisplacementFunction) -> Result<Complex64> {
    f.same_grid(g)?;
    Ok((f.dot(g) - 0.5 * (f.norm_sqr() + g.norm_sqr())).exp())
}

/// |⟨f|g⟩|² = exp(−Σ w·|f − g|²).
pub fn coherent_overlap(f: &DisplacementFunction, g: &DisplacementFunction) -> Result<f64> {
    f.same_grid(g)?;
    Ok((-f.combine(g, |a, b| a - b).norm_sqr()).exp())
}

/// D(f)·D(g) = e^{iθ}·D(f + g); returns (f + g, θ) with θ = Σ w·Im(f·g*).
pub fn compose(f: &DisplacementFunction, g: &DisplacementFunction) -> Result<(DisplacementFunction, f64)> {
    f.same_grid(g)?;
    let theta = g.dot(f).im;
    Ok((f.combine(g, |a, b| a + b), theta))
}
