//! Vacuum fluctuations of the vector potential seen by a momentum measurement.
//!
//! The instantaneous variance ⟨A²⟩ at a point diverges quadratically with
//! the frequency cutoff. Averaging the field against a window φ(t) gives
//!
//!   ⟨A_av²⟩ = (1/2π²)·∫₀^∞ |φ̃(ω)|²·ω dω,
//!
//! finite whenever |φ̃|² falls faster than 1/ω². For a Gaussian of width T
//! this is 1/(4π²T²), and one Cartesian component carries a third of it.
//! Variances are returned in s⁻² (the c = 1 form with time kept in seconds).

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::quad;
use crate::table;
use crate::units::PhysicalConstants;

/// Tolerance on ∫φ dt = 1 for tabulated windows.
pub const NORMALIZATION_TOL: f64 = 1e-8;

const VARIANCE_RTOL: f64 = 1e-11;

/// 1/√(3π³): T_min in units of (q/q_P)·(d/c).
pub fn min_time_prefactor() -> f64 {
    1.0 / (3.0 * PI.powi(3)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    Gaussian,
    Tabulated,
}

/// Normalized weight φ(t) with which the field is averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFunction {
    width: f64,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Gaussian,
    /// Piecewise linear through the samples and zero outside them, so
    /// nonzero end values are genuine jumps.
    Tabulated { t: Vec<f64>, phi: Vec<f64> },
}

impl WindowFunction {
    /// φ(t) = exp(−t²/(2T²))/(√(2π)·T).
    pub fn gaussian(width: f64) -> Result<Self> {
        positive("T", width)?;
        Ok(Self { width, kind: Kind::Gaussian })
    }

    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidWindow("at least 2 samples required".into()));
        }
        if samples.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidWindow("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidWindow("sample times must be strictly increasing".into()));
        }
        let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let phi: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let integral: f64 = t.windows(2).zip(phi.windows(2)).map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1])).sum();
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidWindow(format!("window integrates to {integral}, expected 1")));
        }
        let width = t[t.len() - 1] - t[0];
        Ok(Self { width, kind: Kind::Tabulated { t, phi } })
    }

    /// Loads a `t, phi` CSV (seconds, 1/seconds) with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        Self::tabulated(&table::read_two_columns(path)?)
    }

    /// Gaussian width T, or the support length of a tabulated window.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape(&self) -> WindowShape {
        match self.kind {
            Kind::Gaussian => WindowShape::Gaussian,
            Kind::Tabulated { .. } => WindowShape::Tabulated,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Gaussian => (-0.5 * (t / self.width).powi(2)).exp() / ((2.0 * PI).sqrt() * self.width),
            Kind::Tabulated { t: ts, phi } => {
                if t < ts[0] || t > ts[ts.len() - 1] {
                    return 0.0;
                }
                let i = ts.partition_point(|&v| v <= t).clamp(1, ts.len() - 1) - 1;
                let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
                phi[i] + s * (phi[i + 1] - phi[i])
            }
        }
    }

    /// φ(t/s)/s: the same shape stretched by `s`, still normalized.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        positive("dilation", s)?;
        Ok(match &self.kind {
            Kind::Gaussian => Self { width: self.width * s, kind: Kind::Gaussian },
            Kind::Tabulated { t, phi } => Self {
                width: self.width * s,
                kind: Kind::Tabulated {
                    t: t.iter().map(|v| v * s).collect(),
                    phi: phi.iter().map(|v| v / s).collect(),
                },
            },
        })
    }
}

/// φ̃(ω) = ∫φ(t)·e^{iωt} dt.
pub fn window_fourier(window: &WindowFunction, omega: f64) -> Complex64 {
    match &window.kind {
        Kind::Gaussian => Complex64::new((-0.5 * (omega * window.width).powi(2)).exp(), 0.0),
        Kind::Tabulated { t, phi } => {
            let mut total = Complex64::new(0.0, 0.0);
            for i in 0..t.len() - 1 {
                let h = t[i + 1] - t[i];
                let [j0, j1, _] = quad::phase_moments(omega * h);
                total += Complex64::from_polar(h, omega * t[i]) * (phi[i] * j0 + (phi[i + 1] - phi[i]) * j1);
            }
            total
        }
    }
}

/// ⟨A_av²⟩ by quadrature, in s⁻².
///
/// Fails with [`Error::Divergent`] when |φ̃|² decays like 1/ω² or slower,
/// as for windows with jumps.
pub fn averaged_variance(window: &WindowFunction) -> Result<f64> {
    let width = window.width;
    let f = |u: f64| window_fourier(window, u / width).norm_sqr() * u;
    let integral = quad::integrate_to_infinity(f, 4.0 * PI, PI / 2.0, VARIANCE_RTOL).map_err(|e| match e {
        Error::Divergent { omega, partial } => Error::Divergent {
            omega: omega / width,
            partial: partial / (2.0 * PI * PI * width * width),
        },
        other => other,
    })?;
    Ok(integral.value / (2.0 * PI * PI * width * width))
}

/// 1/(4π²T²).
pub fn gaussian_variance(width: f64) -> Result<f64> {
    positive("T", width)?;
    Ok(1.0 / (4.0 * PI * PI * width * width))
}

/// Λ²/(4π²): the unaveraged variance with a hard cutoff Λ (rad/s).
pub fn instantaneous_variance(cutoff: f64) -> Result<f64> {
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(Error::Negative { name: "cutoff", value: cutoff });
    }
    Ok(cutoff * cutoff / (4.0 * PI * PI))
}

/// Momentum uncertainty q·√(⟨A_av²⟩/3) along one axis, from a variance in s⁻².
pub fn momentum_error_from_variance(q: f64, variance: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("q", q)?;
    let q_natural = q / k.planck_scales().charge * (4.0 * PI).sqrt();
    Ok(q_natural * (variance / 3.0).sqrt() / k.c() * k.hbar())
}

/// q/(2π√3·T) for a Gaussian window of width T, in kg·m/s.
pub fn momentum_error(q: f64, width: f64, k: &PhysicalConstants) -> Result<f64> {
    momentum_error_from_variance(q, gaussian_variance(width)?, k)
}

pub fn momentum_error_for_window(q: f64, window: &WindowFunction, k: &PhysicalConstants) -> Result<f64> {
    momentum_error_from_variance(q, averaged_variance(window)?, k)
}

/// T at which the Gaussian-window error reaches πħ/d.
pub fn min_measurement_time(q: f64, d: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("q", q)?;
    positive("d", d)?;
    Ok(min_time_prefactor() * q / k.planck_scales().charge * d / k.c())
}
