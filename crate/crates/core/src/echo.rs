//! Dynamics of the distant test particle: force differences, the
//! Loschmidt-echo displacement, entanglement time and the trap condition.
//!
//! Geometry: the two branches of the superposed source sit at ±d/2 along an
//! axis perpendicular to the line joining the labs, and the test particle
//! moves along that axis. The force components along it are then equal and
//! opposite, so `f_left + f_right = 0` exactly and the difference reduces to
//! the dipole expression at leading order in d/R.

use num_complex::Complex64;

use crate::error::{non_negative, positive, Error, Result};
use crate::units::PhysicalConstants;

/// Default overlap below which two branch states count as orthogonal.
/// A convention, not derived: callers needing another cut should compare
/// [`echo_overlap`] against their own value.
pub const ORTHOGONALITY_THRESHOLD: f64 = 1.0 / std::f64::consts::E;

/// Largest d/R accepted by the dipole expansion.
pub const DIPOLE_GATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcePair {
    /// Force component on the test particle from the left branch (N).
    pub f_left: f64,
    /// Same for the right branch (N).
    pub f_right: f64,
    /// Leading-order dipole difference coupling·d/R³ (N).
    pub delta_f: f64,
}

impl ForcePair {
    /// `f_left - f_right`; agrees with `delta_f` up to a relative
    /// correction 3d²/(8R²).
    pub fn exact_difference(&self) -> f64 {
        self.f_left - self.f_right
    }

    pub fn sum(&self) -> f64 {
        self.f_left + self.f_right
    }
}

fn dipole_pair(coupling: f64, d: f64, r: f64) -> Result<ForcePair> {
    positive("d", d)?;
    positive("R", r)?;
    if d >= DIPOLE_GATE * r {
        return Err(Error::DipoleApproximation { d, r });
    }
    let half = 0.5 * d;
    let f = coupling * half / (r * r + half * half).powf(1.5);
    Ok(ForcePair {
        f_left: f,
        f_right: -f,
        delta_f: coupling * d / r.powi(3),
    })
}

/// ΔF ≃ G·mA·mB·d/R³.
pub fn force_difference_gravity(ma: f64, mb: f64, d: f64, r: f64, k: &PhysicalConstants) -> Result<ForcePair> {
    positive("mA", ma)?;
    positive("mB", mb)?;
    dipole_pair(k.g() * ma * mb, d, r)
}

/// ΔF ≃ qA·qB·d/(4πε₀R³); charges are signed.
pub fn force_difference_coulomb(qa: f64, qb: f64, d: f64, r: f64, k: &PhysicalConstants) -> Result<ForcePair> {
    if !(qa.is_finite() && qb.is_finite()) {
        return Err(Error::NonPositive { name: "charge", value: if qa.is_finite() { qb } else { qa } });
    }
    dipole_pair(k.coulomb() * qa * qb, d, r)
}

/// Minimum-uncertainty Gaussian wavepacket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub x0: f64,
    pub p0: f64,
    /// Position standard deviation.
    pub sigma: f64,
}

impl GaussianState {
    pub fn new(x0: f64, p0: f64, sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(Error::NonPositive { name: "x0/p0 (finite)", value: f64::NAN });
        }
        Ok(Self { x0, p0, sigma })
    }

    pub fn at_rest(sigma: f64) -> Result<Self> {
        Self::new(0.0, 0.0, sigma)
    }

    /// ħ/(2σ).
    pub fn momentum_spread(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoResult {
    pub time: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    /// ΔF·(F_L+F_R)·t³/(12·m·ħ), radians.
    pub cubic_phase: f64,
    pub overlap: Option<f64>,
}

/// Phase-space shifts generated by the echo operator after time `t`.
pub fn echo_displacements(delta_f: f64, mb: f64, f_sum: f64, t: f64, k: &PhysicalConstants) -> Result<EchoResult> {
    positive("mB", mb)?;
    non_negative("t", t)?;
    Ok(EchoResult {
        time: t,
        delta_x: delta_f * t * t / (2.0 * mb),
        delta_p: -delta_f * t,
        cubic_phase: delta_f * f_sum * t.powi(3) / (12.0 * mb * k.hbar()),
        overlap: None,
    })
}

/// |⟨φ|exp(i(δx·P − δp·X)/ħ)|φ⟩| for the minimum-uncertainty Gaussian.
/// The cubic phase drops out of the modulus.
pub fn echo_overlap(state: &GaussianState, echo: &EchoResult, k: &PhysicalConstants) -> f64 {
    let s = state.sigma;
    let hbar = k.hbar();
    (-echo.delta_x.powi(2) / (8.0 * s * s) - (echo.delta_p * s / hbar).powi(2) / 2.0).exp()
}

/// Full complex echo amplitude ⟨φ|U_R†(t)U_L(t)|φ⟩ including the cubic
/// phase and the displacement phase (δx·p0 − δp·x0)/ħ.
pub fn echo_amplitude(state: &GaussianState, echo: &EchoResult, k: &PhysicalConstants) -> Complex64 {
    let phase = echo.cubic_phase + (echo.delta_x * state.p0 - echo.delta_p * state.x0) / k.hbar();
    Complex64::from_polar(echo_overlap(state, echo, k), phase)
}

/// Convenience: displacements plus overlap in one record.
pub fn echo_at(
    state: &GaussianState,
    forces: &ForcePair,
    mb: f64,
    t: f64,
    k: &PhysicalConstants,
) -> Result<EchoResult> {
    let mut e = echo_displacements(forces.delta_f, mb, forces.sum(), t, k)?;
    e.overlap = Some(echo_overlap(state, &e, k));
    Ok(e)
}

/// T_B = sqrt(2·mB·σ/ΔF), from δx/σ = 1.
pub fn entanglement_time(delta_f: f64, mb: f64, sigma: f64) -> Result<f64> {
    positive("mB", mb)?;
    positive("sigma", sigma)?;
    let df = delta_f.abs();
    if df == 0.0 {
        return Err(Error::NoEntanglement);
    }
    positive("|delta_F|", df)?;
    Ok((2.0 * mb * sigma / df).sqrt())
}

/// T_B' = ħ/(ΔF·σ): time for the momentum kick to exceed the spread ħ/σ.
pub fn momentum_route_time(delta_f: f64, sigma: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("sigma", sigma)?;
    let df = delta_f.abs();
    if df == 0.0 {
        return Err(Error::NoEntanglement);
    }
    Ok(k.hbar() / (df * sigma))
}

/// (ħ²/(mB·ΔF))^(1/3): widest trap ground state still insensitive to ΔF.
pub fn trap_max_width(mb: f64, delta_f: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("mB", mb)?;
    let df = positive("|delta_F|", delta_f.abs())?;
    Ok((k.hbar().powi(2) / (mb * df)).cbrt())
}

/// Trap frequency whose ground state has width σ, from σ² = ħ/(mB·ω).
pub fn trap_frequency(mb: f64, sigma: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("mB", mb)?;
    positive("sigma", sigma)?;
    Ok(k.hbar() / (mb * sigma * sigma))
}

/// Whether the static displacement ΔF/(mB·ω²) of a trap with ground-state
/// width σ stays within σ.
pub fn trap_is_insensitive(mb: f64, delta_f: f64, sigma: f64, k: &PhysicalConstants) -> Result<bool> {
    let omega = trap_frequency(mb, sigma, k)?;
    Ok(delta_f.abs() / (mb * omega * omega) <= sigma)
}
