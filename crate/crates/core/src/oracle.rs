//! Brute-force Schrödinger propagation on a periodic grid (ħ = 1).
//!
//! Strang splitting: half a potential kick e^{iFx·dt/2}, a full kinetic
//! step e^{−ik²dt/(2m)} in Fourier space, another half kick. For a linear
//! potential the nested commutators beyond second order vanish or are
//! c-numbers, so the splitting only adds a global phase of order
//! F²·t·dt²/m; moments and |overlaps| are exact up to grid resolution.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::echo::GaussianState;
use crate::error::{positive, Error, Result};

/// Edge amplitude allowed relative to the peak.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Norm change allowed over one propagation.
pub const NORM_TOL: f64 = 1e-8;

/// Padding, in units of the relevant width, around the classical excursion.
const PAD_WIDTHS: f64 = 12.0;

const MAX_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Power of two.
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::GridTooNarrow(format!("empty interval [{x_min}, {x_max}]")));
        }
        if !n_points.is_power_of_two() || !(16..=MAX_POINTS).contains(&n_points) {
            return Err(Error::GridTooNarrow(format!(
                "{n_points} points; need a power of two between 16 and {MAX_POINTS}"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn k(&self, j: usize) -> f64 {
        let n = self.n_points as i64;
        let j = j as i64;
        let signed = if j < n / 2 { j } else { j - n };
        2.0 * PI * signed as f64 / (self.x_max - self.x_min)
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }
}

/// Grid covering the classical paths under every force in `forces` up to
/// time `t`, padded by 12 spread widths in both x and p.
pub fn auto_grid(state: &GaussianState, forces: &[f64], mass: f64, t: f64) -> Result<GridSpec> {
    positive("mass", mass)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Negative { name: "t", value: t });
    }
    let s = state.sigma;
    let sigma_t = (s * s + (t / (2.0 * mass * s)).powi(2)).sqrt();
    let mut lo = state.x0;
    let mut hi = state.x0;
    let mut p_abs = state.p0.abs();
    let path = |f: f64, tau: f64| state.x0 + state.p0 * tau / mass + f * tau * tau / (2.0 * mass);
    for &f in forces {
        let mut times = vec![0.0, t];
        if f != 0.0 {
            let turn = -state.p0 / f;
            if turn > 0.0 && turn < t {
                times.push(turn);
            }
        }
        for tau in times {
            lo = lo.min(path(f, tau));
            hi = hi.max(path(f, tau));
        }
        p_abs = p_abs.max((state.p0 + f * t).abs());
    }
    let x_min = lo - PAD_WIDTHS * sigma_t;
    let x_max = hi + PAD_WIDTHS * sigma_t;
    let k_needed = p_abs + PAD_WIDTHS * 0.5 / s;
    let n_min = ((x_max - x_min) * k_needed / PI).ceil() as usize;
    let n = n_min.max(64).checked_next_power_of_two().unwrap_or(usize::MAX);
    if n > MAX_POINTS {
        return Err(Error::GridTooNarrow(format!(
            "resolving x in [{x_min:e}, {x_max:e}] and |k| up to {k_needed:e} needs {n_min} points"
        )));
    }
    GridSpec::new(x_min, x_max, n)
}

#[derive(Debug, Clone)]
pub struct GridState {
    pub spec: GridSpec,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

impl GridState {
    /// Σ|ψ|²·dx.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.spec.dx()
    }

    /// ⟨self|other⟩ on the shared grid.
    pub fn inner(&self, other: &GridState) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::MismatchedGrid);
        }
        let sum: Complex64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        Ok(sum * self.spec.dx())
    }

    /// Largest edge amplitude relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.amplitudes.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        let n = self.amplitudes.len();
        let edge = self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm());
        edge / peak
    }

    pub fn check_boundary(&self) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio.is_nan() || ratio > BOUNDARY_TOL {
            return Err(Error::BoundaryContamination { ratio });
        }
        Ok(())
    }

    pub fn moments(&self) -> Moments {
        let dx = self.spec.dx();
        let density: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let norm = density.iter().sum::<f64>() * dx;
        let mean_x = (0..density.len()).map(|i| self.spec.x(i) * density[i]).sum::<f64>() * dx / norm;
        let var_x = (0..density.len()).map(|i| (self.spec.x(i) - mean_x).powi(2) * density[i]).sum::<f64>() * dx / norm;

        let mut spectrum = self.amplitudes.clone();
        Transforms::new(self.spec.n_points).forward.process(&mut spectrum);
        let weights: Vec<f64> = spectrum.iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        let mean_p = (0..weights.len()).map(|j| self.spec.k(j) * weights[j]).sum::<f64>() / total;
        let var_p = (0..weights.len()).map(|j| (self.spec.k(j) - mean_p).powi(2) * weights[j]).sum::<f64>() / total;
        Moments { norm, mean_x, mean_p, sigma_x: var_x.sqrt(), sigma_p: var_p.sqrt() }
    }
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

/// (2πσ²)^{−1/4}·exp(−(x−x0)²/(4σ²) + i·p0·(x−x0)), renormalized on the grid.
pub fn init_gaussian(spec: GridSpec, state: &GaussianState) -> Result<GridState> {
    let reach = 6.0 * state.sigma;
    if state.x0 - reach < spec.x_min || state.x0 + reach > spec.x_max {
        return Err(Error::GridTooNarrow(format!(
            "x0 ± 6σ = [{:e}, {:e}] leaves [{:e}, {:e}]",
            state.x0 - reach,
            state.x0 + reach,
            spec.x_min,
            spec.x_max
        )));
    }
    if state.p0.abs() + 6.0 * 0.5 / state.sigma > spec.k_max() {
        return Err(Error::GridTooNarrow(format!("momentum {:e} ± 6 widths exceeds the Nyquist limit {:e}", state.p0, spec.k_max())));
    }
    let norm = (2.0 * PI * state.sigma * state.sigma).powf(-0.25);
    let amplitudes: Vec<Complex64> = (0..spec.n_points)
        .map(|i| {
            let u = spec.x(i) - state.x0;
            Complex64::from_polar(norm * (-u * u / (4.0 * state.sigma * state.sigma)).exp(), state.p0 * u)
        })
        .collect();
    let mut out = GridState { spec, amplitudes };
    let scale = out.norm().sqrt().recip();
    out.amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(out)
}

/// Evolves under H = P²/(2m) − F·X for time `t` in `n_steps` Strang steps.
pub fn propagate_linear(state: &GridState, force: f64, mass: f64, t: f64, n_steps: usize) -> Result<GridState> {
    positive("mass", mass)?;
    if n_steps == 0 {
        return Err(Error::NonPositive { name: "n_steps", value: 0.0 });
    }
    let spec = state.spec;
    let n = spec.n_points;
    let dt = t / n_steps as f64;
    let kick: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, 0.5 * force * spec.x(i) * dt)).collect();
    let inv_n = 1.0 / n as f64;
    let drift: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(inv_n, -spec.k(j).powi(2) * dt / (2.0 * mass)))
        .collect();
    let fft = Transforms::new(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.forward.get_inplace_scratch_len().max(fft.inverse.get_inplace_scratch_len())];

    let norm0 = state.norm();
    let mut psi = state.amplitudes.clone();
    for _ in 0..n_steps {
        psi.iter_mut().zip(&kick).for_each(|(a, k)| *a *= k);
        fft.forward.process_with_scratch(&mut psi, &mut scratch);
        psi.iter_mut().zip(&drift).for_each(|(a, k)| *a *= k);
        fft.inverse.process_with_scratch(&mut psi, &mut scratch);
        psi.iter_mut().zip(&kick).for_each(|(a, k)| *a *= k);
    }
    let out = GridState { spec, amplitudes: psi };
    let drift = (out.norm() - norm0).abs();
    if drift.is_nan() || drift > NORM_TOL {
        return Err(Error::NormDrift { drift });
    }
    out.check_boundary()?;
    Ok(out)
}

/// ⟨ψ_R(t)|ψ_L(t)⟩ from two independent propagations of `state0`.
pub fn echo_overlap_numeric(
    state0: &GridState,
    f_left: f64,
    f_right: f64,
    mass: f64,
    t: f64,
    n_steps: usize,
) -> Result<Complex64> {
    let (left, right) = rayon::join(
        || propagate_linear(state0, f_left, mass, t, n_steps),
        || propagate_linear(state0, f_right, mass, t, n_steps),
    );
    right?.inner(&left?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::{echo_amplitude, echo_displacements};
    use crate::units::PhysicalConstants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: PhysicalConstants = PhysicalConstants::UNIT;

    fn setup(state: GaussianState, forces: &[f64], mass: f64, t: f64) -> GridState {
        init_gaussian(auto_grid(&state, forces, mass, t).unwrap(), &state).unwrap()
    }

    #[test]
    fn initial_moments() {
        let g = GaussianState::new(0.7, -1.3, 0.8).unwrap();
        let psi = setup(g, &[0.0], 1.0, 0.0);
        let m = psi.moments();
        assert!((m.norm - 1.0).abs() < 1e-10);
        assert!((m.mean_x - 0.7).abs() < 1e-8);
        assert!((m.mean_p + 1.3).abs() < 1e-8);
        assert!((m.sigma_x / 0.8 - 1.0).abs() < 1e-8);
        assert!((m.sigma_x * m.sigma_p / 0.5 - 1.0).abs() < 1e-6);
        assert!(psi.boundary_ratio() < BOUNDARY_TOL);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 1.0, 100).is_err());
        assert!(GridSpec::new(1.0, 0.0, 128).is_err());
        let g = GaussianState::at_rest(1.0).unwrap();
        let narrow = GridSpec::new(-3.0, 3.0, 128).unwrap();
        assert!(matches!(init_gaussian(narrow, &g), Err(Error::GridTooNarrow(_))));
    }

    #[test]
    fn free_spreading() {
        let (s, m, t) = (0.6, 1.7, 3.0);
        let g = GaussianState::at_rest(s).unwrap();
        let psi = setup(g, &[0.0], m, t);
        let out = propagate_linear(&psi, 0.0, m, t, 50).unwrap();
        let expect = (s * s + (t / (2.0 * m * s)).powi(2)).sqrt();
        assert!((out.moments().sigma_x / expect - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ehrenfest_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = GaussianState::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)).unwrap();
            let (f, m, t) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
            let psi = setup(g, &[f], m, t);
            // exact for any step count
            for steps in [7, 200] {
                let mo = propagate_linear(&psi, f, m, t, steps).unwrap().moments();
                assert!((mo.mean_x - (g.x0 + g.p0 * t / m + f * t * t / (2.0 * m))).abs() < 1e-6);
                assert!((mo.mean_p - (g.p0 + f * t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn unitarity() {
        let g = GaussianState::at_rest(1.0).unwrap();
        let psi = setup(g, &[0.5], 1.0, 2.0);
        let out = propagate_linear(&psi, 0.5, 1.0, 2.0, 1000).unwrap();
        assert!((out.norm() - psi.norm()).abs() < 1e-10);
    }

    #[test]
    fn identical_forces_give_unit_overlap() {
        let g = GaussianState::new(0.2, 0.4, 1.0).unwrap();
        let psi = setup(g, &[0.3], 1.0, 1.5);
        let o = echo_overlap_numeric(&psi, 0.3, 0.3, 1.0, 1.5, 100).unwrap();
        assert!((o - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    fn analytic(g: &GaussianState, fl: f64, fr: f64, m: f64, t: f64) -> Complex64 {
        let e = echo_displacements(fl - fr, m, fl + fr, t, &UNIT).unwrap();
        echo_amplitude(g, &e, &UNIT)
    }

    #[test]
    fn matches_analytic_echo() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let g = GaussianState::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)).unwrap();
            let (fl, fr) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (m, t) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
            let psi = setup(g, &[fl, fr], m, t);
            let numeric = echo_overlap_numeric(&psi, fl, fr, m, t, 2000).unwrap();
            let exact = analytic(&g, fl, fr, m, t);
            assert!((numeric.norm() - exact.norm()).abs() < 1e-6, "{numeric} vs {exact}");
            let dphase = (numeric / exact).arg();
            assert!(dphase.abs() < 1e-5, "phase off by {dphase}");
        }
    }

    #[test]
    fn second_order_phase_convergence() {
        let g = GaussianState::new(0.3, 0.2, 1.0).unwrap();
        let (fl, fr, m, t) = (1.5, -0.5, 1.0, 2.0);
        let psi = setup(g, &[fl, fr], m, t);
        let exact = analytic(&g, fl, fr, m, t);
        let err = |steps| (echo_overlap_numeric(&psi, fl, fr, m, t, steps).unwrap() / exact).arg().abs();
        let (coarse, fine) = (err(20), err(40));
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.2, "{coarse} {fine} {ratio}");
    }

    #[test]
    fn boundary_contamination_detected() {
        let g = GaussianState::at_rest(1.0).unwrap();
        let psi = setup(g, &[0.0], 1.0, 0.0);
        // a force the grid was not sized for pushes the packet off the edge
        let r = propagate_linear(&psi, 2.0, 1.0, 3.0, 300);
        assert!(matches!(r, Err(Error::BoundaryContamination { .. })), "{r:?}");
    }
}
