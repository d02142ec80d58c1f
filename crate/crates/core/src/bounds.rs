//! Closed-form minimum discrimination times, localization limits and the
//! charge radius.
//!
//! The plain bounds carry no numerical prefactor; the sharp variants carry
//! the 2/27 that falls out of the causality optimization.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Result};
use crate::units::PhysicalConstants;

/// Constant of the sharp bound, max over η of (η² − η³)/2.
pub const SHARP_PREFACTOR: f64 = 2.0 / 27.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Mass,
    Charge,
}

/// Age of the universe in seconds, for scale.
pub const UNIVERSE_AGE_SECONDS: f64 = 4.3e17;

/// A particle of given mass or charge delocalized over two positions `d` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionSpec {
    pub kind: SourceKind,
    /// Mass in kg or charge in C, depending on `kind`.
    pub magnitude: f64,
    /// Separation of the two branches in metres.
    pub separation_d: f64,
}

impl SuperpositionSpec {
    pub fn new(kind: SourceKind, magnitude: f64, separation_d: f64) -> Result<Self> {
        let spec = Self { kind, magnitude, separation_d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mass(m: f64, d: f64) -> Result<Self> {
        Self::new(SourceKind::Mass, m, d)
    }

    pub fn charge(q: f64, d: f64) -> Result<Self> {
        Self::new(SourceKind::Charge, q, d)
    }

    pub fn validate(&self) -> Result<()> {
        positive("magnitude", self.magnitude)?;
        positive("separation_d", self.separation_d)?;
        Ok(())
    }

    /// m/m_P or q/q_P.
    pub fn planck_ratio(&self, k: &PhysicalConstants) -> f64 {
        let p = k.planck_scales();
        match self.kind {
            SourceKind::Mass => self.magnitude / p.mass,
            SourceKind::Charge => self.magnitude / p.charge,
        }
    }
}

/// (m/m_P)·(d/c).
pub fn min_time_mass(m: f64, d: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("mass", m)?;
    positive("separation", d)?;
    Ok(m / k.planck_scales().mass * d / k.c())
}

/// (q/q_P)·(d/c).
pub fn min_time_charge(q: f64, d: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("charge", q)?;
    positive("separation", d)?;
    Ok(q / k.planck_scales().charge * d / k.c())
}

pub fn min_time(spec: &SuperpositionSpec, k: &PhysicalConstants) -> Result<f64> {
    match spec.kind {
        SourceKind::Mass => min_time_mass(spec.magnitude, spec.separation_d, k),
        SourceKind::Charge => min_time_charge(spec.magnitude, spec.separation_d, k),
    }
}

/// (2/27)·ratio·(d/c).
pub fn sharp_min_time(spec: &SuperpositionSpec, k: &PhysicalConstants) -> Result<f64> {
    Ok(SHARP_PREFACTOR * min_time(spec, k)?)
}

/// Smallest width to which a mass can be localized: the Planck length.
pub fn min_localization_mass(k: &PhysicalConstants) -> f64 {
    k.planck_scales().length
}

/// Charge radius (q/q_P)·ħ/(mc).
///
/// This is a scaling limit, not a sharp threshold: the order-one constant in
/// front is not fixed by the radiation argument (see [`larmor_crossover_ratio`]).
pub fn charge_radius(q: f64, m: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("charge", q)?;
    positive("mass", m)?;
    Ok(q / k.planck_scales().charge * k.hbar() / (m * k.c()))
}

/// Order-of-magnitude radiated power q²ω⁴ΔX²/(ε₀c³) of a charge oscillating
/// with amplitude `dx` at angular frequency `omega`. No 2/3 Larmor prefactor.
pub fn larmor_power(q: f64, omega: f64, dx: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("charge", q)?;
    positive("dx", dx)?;
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(crate::error::Error::NonPositive { name: "omega", value: omega });
    }
    Ok(q * q * omega.powi(4) * dx * dx / (k.epsilon0() * k.c().powi(3)))
}

/// Width at which the energy radiated in one trap period 2π/ω equals ħω for
/// a ground state of width ΔX² = ħ/(mω), divided by [`charge_radius`].
///
/// Eliminating ω gives the constant 2√2·π, independent of q and m.
pub fn larmor_crossover_ratio() -> f64 {
    2.0 * std::f64::consts::SQRT_2 * std::f64::consts::PI
}
