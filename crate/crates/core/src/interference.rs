//! Momentum-space test of whether a two-branch state is still coherent.
//!
//! Two Gaussian packets of width σ a distance d apart produce fringes
//! 1 + cos(k·d − φ) in the momentum distribution; a mixture does not.
//! Resolving the fringes needs momentum precision near πħ/d.
//!
//! Momenta here are wavenumbers k = p/ħ in m⁻¹, and so is the standard
//! deviation ν of the additive Gaussian measurement noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::radiation::{self, TrajectoryProfile};
use crate::units::PhysicalConstants;

/// Below this log-magnitude the fringe terms are handled to first order.
const LOG_UNDERFLOW: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperposedWavepacket {
    /// Single-packet position width (m).
    pub sigma: f64,
    /// Packet separation (m).
    pub d: f64,
    /// Relative phase of the two branches (rad).
    #[serde(default)]
    pub phi: f64,
}

impl SuperposedWavepacket {
    pub fn new(sigma: f64, d: f64, phi: f64) -> Result<Self> {
        let p = Self { sigma, d, phi };
        p.validate()?;
        Ok(p)
    }

    /// The coherent state must have nonzero norm: d = 0 with φ = π cancels exactly.
    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        non_negative("d", self.d)?;
        if !self.phi.is_finite() {
            return Err(Error::InvalidPacket(format!("phase must be finite, got {}", self.phi)));
        }
        if self.normalization() < 1e-12 {
            return Err(Error::InvalidPacket("the two branches cancel; the superposition has zero norm".into()));
        }
        Ok(())
    }

    /// Momentum-space standard deviation 1/(2σ) of one packet.
    pub fn momentum_width(&self) -> f64 {
        0.5 / self.sigma
    }

    /// Branch overlap e^{−d²/(8σ²)}.
    pub fn branch_overlap(&self) -> f64 {
        (-self.d * self.d / (8.0 * self.sigma * self.sigma)).exp()
    }

    /// Z = 1 + cos φ·e^{−d²/(8σ²)}, exact for any separation.
    fn normalization(&self) -> f64 {
        1.0 + self.phi.cos() * self.branch_overlap()
    }

    fn ln_normalization(&self) -> f64 {
        (self.phi.cos() * self.branch_overlap()).ln_1p()
    }
}

fn gaussian(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// |ψ(k)|² = (1 + cos(k·d − φ))·|φ(k)|²/Z.
pub fn momentum_density_coherent(k: f64, packet: &SuperposedWavepacket) -> f64 {
    let s = packet.momentum_width();
    gaussian(k, s * s) * (1.0 + (k * packet.d - packet.phi).cos()) / packet.normalization()
}

/// |φ(k)|²: the fringes averaged away.
pub fn momentum_density_mixed(k: f64, packet: &SuperposedWavepacket) -> f64 {
    let s = packet.momentum_width();
    gaussian(k, s * s)
}

/// Fringe factors after Gaussian noise ν: mean shrinkage μ/y, visibility V.
fn noisy_fringe(packet: &SuperposedWavepacket, noise: f64) -> (f64, f64) {
    let s2 = packet.momentum_width().powi(2);
    let n2 = noise * noise;
    let shrink = s2 / (s2 + n2);
    let tau2 = s2 * n2 / (s2 + n2);
    (shrink, -0.5 * tau2 * packet.d * packet.d)
}

/// Coherent density convolved with N(0, ν²).
pub fn noisy_density_coherent(y: f64, packet: &SuperposedWavepacket, noise: f64) -> f64 {
    let s = packet.momentum_width();
    let (shrink, ln_v) = noisy_fringe(packet, noise);
    gaussian(y, s * s + noise * noise) * (1.0 + ln_v.exp() * (shrink * y * packet.d - packet.phi).cos())
        / packet.normalization()
}

/// Mixed density convolved with N(0, ν²).
pub fn noisy_density_mixed(y: f64, packet: &SuperposedWavepacket, noise: f64) -> f64 {
    let s = packet.momentum_width();
    gaussian(y, s * s + noise * noise)
}

/// πħ/d in kg·m/s.
pub fn required_precision(d: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("d", d)?;
    Ok(PI * k.hbar() / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Coherent,
    Mixed,
}

/// Stream-splitting rule: trial `i` of a run seeded with `root` draws from
/// ChaCha8 seeded with `root` on stream `i`.
pub fn trial_rng(root: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(trial);
    rng
}

/// Noise-free momenta from the selected density; coherent draws by rejection.
fn draw_clean<R: Rng>(packet: &SuperposedWavepacket, hypothesis: Hypothesis, n: usize, rng: &mut R) -> Vec<f64> {
    let s = packet.momentum_width();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z: f64 = rng.sample(StandardNormal);
        let k = s * z;
        match hypothesis {
            Hypothesis::Mixed => out.push(k),
            Hypothesis::Coherent => {
                // accept with (1 + cos)/2; normalization Z comes out automatically
                let u: f64 = rng.random();
                if 2.0 * u <= 1.0 + (k * packet.d - packet.phi).cos() {
                    out.push(k);
                }
            }
        }
    }
    out
}

fn draw_normals<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// n i.i.d. measured momenta: a draw from the hypothesis density plus N(0, ν²).
pub fn sample_momenta(
    packet: &SuperposedWavepacket,
    hypothesis: Hypothesis,
    n: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    packet.validate()?;
    non_negative("noise", noise)?;
    if n == 0 {
        return Err(Error::InvalidPacket("at least one sample required".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let clean = draw_clean(packet, hypothesis, n, &mut rng);
    let z = draw_normals(n, &mut rng);
    Ok(clean.iter().zip(&z).map(|(k, z)| k + noise * z).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminationResult {
    pub n_samples: usize,
    /// ν in m⁻¹.
    pub noise: f64,
    /// ln L(coherent) − ln L(mixed); may underflow to 0 when the fringes are
    /// washed out, in which case the decision still uses the exact sign.
    pub log_likelihood_ratio: f64,
    pub decision: Hypothesis,
    /// Filled by [`power_curve`].
    pub power_estimate: Option<f64>,
}

/// Signed quantity stored as (sign, ln|value|).
#[derive(Clone, Copy)]
struct SignedLog(f64, f64);

impl SignedLog {
    fn value(self) -> f64 {
        self.0 * self.1.exp()
    }
}

/// Sign of a − b for values that may sit far below f64 range.
fn signed_log_difference_sign(a: SignedLog, b: SignedLog) -> f64 {
    if a.0 == 0.0 || b.0 == 0.0 || a.0 != b.0 {
        return if a.0 != 0.0 { a.0 } else { -b.0 };
    }
    if a.1 > b.1 {
        a.0
    } else if a.1 < b.1 {
        -a.0
    } else {
        0.0
    }
}

fn signed_log(x: f64) -> SignedLog {
    SignedLog(if x == 0.0 { 0.0 } else { x.signum() }, x.abs().ln())
}

/// Likelihood-ratio test between the two noise-convolved densities.
///
/// The Gaussian envelopes are common to both hypotheses and cancel, leaving
/// Σ ln(1 + V·cos(μᵢd − φ)) − n·ln Z. Ties go to the mixed hypothesis.
pub fn discriminate(samples: &[f64], packet: &SuperposedWavepacket, noise: f64) -> Result<DiscriminationResult> {
    packet.validate()?;
    non_negative("noise", noise)?;
    if samples.is_empty() {
        return Err(Error::InvalidPacket("at least one sample required".into()));
    }
    let n = samples.len();
    let (shrink, ln_v) = noisy_fringe(packet, noise);
    let phase = |y: f64| (shrink * y * packet.d - packet.phi).cos();

    // ln Z per sample, possibly far below f64 range
    let ln_eps = -packet.d * packet.d / (8.0 * packet.sigma * packet.sigma);
    let cos_phi = packet.phi.cos();
    let ln_z = if ln_eps > LOG_UNDERFLOW {
        signed_log(packet.ln_normalization())
    } else {
        SignedLog(if cos_phi == 0.0 { 0.0 } else { cos_phi.signum() }, cos_phi.abs().ln() + ln_eps)
    };
    let total_ln_z = SignedLog(ln_z.0, ln_z.1 + (n as f64).ln());

    let fringe = if ln_v > LOG_UNDERFLOW {
        let v = ln_v.exp();
        signed_log(samples.iter().map(|&y| (v * phase(y)).ln_1p()).sum())
    } else {
        // ln(1 + V·c) = V·c to working precision
        let c: f64 = samples.iter().map(|&y| phase(y)).sum();
        let s = signed_log(c);
        SignedLog(s.0, s.1 + ln_v)
    };

    let sign = signed_log_difference_sign(fringe, total_ln_z);
    let llr = fringe.value() - total_ln_z.value();
    Ok(DiscriminationResult {
        n_samples: n,
        noise,
        log_likelihood_ratio: if llr == 0.0 { 0.0 } else { llr },
        decision: if sign > 0.0 { Hypothesis::Coherent } else { Hypothesis::Mixed },
        power_estimate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    /// ν in m⁻¹.
    pub noise: f64,
    /// Fraction of coherent-drawn trials classified coherent.
    pub power: f64,
    /// Fraction of mixed-drawn trials classified coherent.
    pub false_alarm: f64,
    /// Binomial standard error of `power`.
    pub std_error: f64,
}

/// Power of the test at each noise level.
///
/// Common random numbers: each trial draws its clean momenta and unit
/// normals once, and every noise level reuses them as kᵢ + ν·zᵢ. Trials
/// run in parallel; the result is independent of scheduling.
pub fn power_curve(
    packet: &SuperposedWavepacket,
    noise_levels: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    packet.validate()?;
    for &nu in noise_levels {
        non_negative("noise", nu)?;
    }
    if n == 0 || trials == 0 {
        return Err(Error::InvalidPacket("samples and trials must be positive".into()));
    }
    let per_trial: Result<Vec<(Vec<bool>, Vec<bool>)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let coherent = draw_clean(packet, Hypothesis::Coherent, n, &mut rng);
            let mixed = draw_clean(packet, Hypothesis::Mixed, n, &mut rng);
            let z = draw_normals(n, &mut rng);
            let mut hits = Vec::with_capacity(noise_levels.len());
            let mut alarms = Vec::with_capacity(noise_levels.len());
            let mut buf = vec![0.0; n];
            for &nu in noise_levels {
                for (set, out) in [(&coherent, &mut hits), (&mixed, &mut alarms)] {
                    for ((b, k), z) in buf.iter_mut().zip(set.iter()).zip(&z) {
                        *b = k + nu * z;
                    }
                    out.push(discriminate(&buf, packet, nu)?.decision == Hypothesis::Coherent);
                }
            }
            Ok((hits, alarms))
        })
        .collect();
    let per_trial = per_trial?;
    Ok(noise_levels
        .iter()
        .enumerate()
        .map(|(j, &noise)| {
            let hits = per_trial.iter().filter(|t| t.0[j]).count() as f64;
            let alarms = per_trial.iter().filter(|t| t.1[j]).count() as f64;
            let power = hits / trials as f64;
            PowerPoint {
                noise,
                power,
                false_alarm: alarms / trials as f64,
                std_error: (power * (1.0 - power) / trials as f64).sqrt(),
            }
        })
        .collect())
}

/// Spin measurement statistics for Alice in the |±⟩ basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinOutcome {
    /// Off-diagonal element of the spin density matrix, times two.
    pub visibility: f64,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl SpinOutcome {
    /// ρ = ½·[[1, V], [V, 1]] measured in |±⟩ = (|↑⟩ ± |↓⟩)/√2.
    pub fn from_visibility(visibility: f64) -> Self {
        let p_plus = 0.5 * (1.0 + visibility);
        Self { visibility, p_plus, p_minus: 1.0 - p_plus }
    }

    /// Bob's measurement collapsed the superposition: ρ = ½·𝟙.
    pub fn collapsed() -> Self {
        Self::from_visibility(0.0)
    }
}

/// Exponent κ relating the spin visibility to the vacuum overlap |⟨0|f⟩|².
///
/// κ = 1 (default) takes the no-emission probability itself; κ = ½ is the
/// amplitude |⟨0|f⟩|. Any positive value is accepted.
pub const DEFAULT_KAPPA: f64 = 1.0;

/// Visibility after recombining the charge along a sin² path in time t0.
pub fn spin_protocol_visibility(q: f64, d: f64, t0: f64, kappa: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("q", q)?;
    positive("kappa", kappa)?;
    let profile = TrajectoryProfile::sin_squared(d, t0)?;
    Ok(radiation::vacuum_overlap(&profile, q, k)?.powf(kappa))
}

pub fn spin_protocol_outcome(q: f64, d: f64, t0: f64, kappa: f64, k: &PhysicalConstants) -> Result<SpinOutcome> {
    Ok(SpinOutcome::from_visibility(spin_protocol_visibility(q, d, t0, kappa, k)?))
}
