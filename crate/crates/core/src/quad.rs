//! Numerical integration and the sine integral.
//!
//! Finite intervals use globally adaptive Gauss–Kronrod (10/21 points).
//! Semi-infinite integrals march outward one octave at a time and
//! extrapolate the remaining tail from the octave-to-octave decay ratio,
//! which also exposes logarithmic (or worse) divergence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_SEGMENTS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Round-off floor included in `error`.
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();

    // QUADPACK error rescaling
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Segment { a, b, value, error, floor }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut heap = BinaryHeap::new();
    let first = gk21(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut floor = first.floor;
    heap.push(first);
    // a request below the round-off floor is met once only the floor remains
    while error > abs_tol.max(rel_tol * value.abs()).max(1.5 * floor) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature(format!(
                "segment limit reached on [{a:e}, {b:e}] (estimate {value:e} +/- {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed accumulated rounding in the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate { value, error })
}

/// Integrates over `[a, b]` split into panels no longer than `max_panel`,
/// each refined adaptively. Panels are evaluated in parallel.
pub fn integrate_panels<F>(f: &F, a: f64, b: f64, max_panel: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_panels_abs(f, a, b, max_panel, 0.0, rel_tol)
}

/// As [`integrate_panels`], with `abs_tol` shared evenly among the panels.
pub fn integrate_panels_abs<F>(f: &F, a: f64, b: f64, max_panel: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let parts: Result<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == n { b } else { lo + h };
            integrate(f, lo, hi, abs_tol / n as f64, rel_tol).map(|e| e.value)
        })
        .collect();
    Ok(parts?.iter().sum())
}

/// Outcome of a semi-infinite integration.
#[derive(Debug, Clone, Copy)]
pub struct TailIntegral {
    pub value: f64,
    /// Extrapolated contribution beyond `upper`, already included in `value`.
    pub tail: f64,
    /// Last frequency actually integrated.
    pub upper: f64,
}

/// Integrates a non-negative `f` over `[0, ∞)`.
///
/// `[0, start]` is integrated first, then successive octaves `[a, 2a]`.
/// `max_panel` bounds the panel width, so it should be a fraction of the
/// integrand's oscillation period. Once the octave contributions decay
/// geometrically with ratio `r`, the tail is summed as `c·r/(1-r)`.
/// A ratio that stays near one (integrand ~ 1/ω or slower) is reported as
/// divergence.
pub fn integrate_to_infinity<F>(f: F, start: f64, max_panel: f64, rel_tol: f64) -> Result<TailIntegral>
where
    F: Fn(f64) -> f64 + Sync,
{
    const MAX_OCTAVES: usize = 48;
    const DIVERGENT_RATIO: f64 = 0.75;
    const DIVERGENT_RUN: usize = 4;

    let panel_tol = 0.1 * rel_tol;
    let mut total = integrate_panels(&f, 0.0, start, max_panel, panel_tol)?;
    let mut lo = start;
    let mut prev: Option<f64> = None;
    let mut prev_extrapolated: Option<f64> = None;
    let mut slow_run = 0;

    for _ in 0..MAX_OCTAVES {
        let hi = 2.0 * lo;
        let c = integrate_panels_abs(&f, lo, hi, max_panel, panel_tol * total.abs(), panel_tol)?;
        total += c;
        lo = hi;
        if c == 0.0 || c.abs() <= f64::EPSILON * total.abs() {
            return Ok(TailIntegral { value: total, tail: 0.0, upper: hi });
        }
        if let Some(p) = prev {
            let r = c / p;
            if r >= DIVERGENT_RATIO {
                slow_run += 1;
                if slow_run >= DIVERGENT_RUN {
                    return Err(Error::Divergent { omega: hi, partial: total });
                }
            } else {
                slow_run = 0;
            }
            if r > 0.0 && r < 0.5 {
                let tail = c * r / (1.0 - r);
                let extrapolated = total + tail;
                if tail.abs() <= rel_tol * extrapolated.abs() {
                    return Ok(TailIntegral { value: extrapolated, tail, upper: hi });
                }
                if let Some(pe) = prev_extrapolated {
                    if (extrapolated - pe).abs() <= 0.1 * rel_tol * extrapolated.abs() {
                        return Ok(TailIntegral { value: extrapolated, tail, upper: hi });
                    }
                }
                prev_extrapolated = Some(extrapolated);
            }
        }
        prev = Some(c);
    }
    Err(Error::Quadrature(format!(
        "tail did not settle after {MAX_OCTAVES} octaves (partial {total:e})"
    )))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Moments Jₙ(θ) = ∫₀¹ sⁿ·e^{iθs} ds for n = 0, 1, 2.
///
/// Integrals of a polynomial piece against e^{iωt} reduce to these, exactly.
pub fn phase_moments(theta: f64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    if theta.abs() < 1.0 {
        // Σₖ (iθ)ᵏ / (k!·(n+k+1)), converged well before k = 30 for |θ| < 1
        for (n, slot) in out.iter_mut().enumerate() {
            let mut power = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..30 {
                sum += power / (n + k + 1) as f64;
                power *= Complex64::new(0.0, theta) / (k + 1) as f64;
            }
            *slot = sum;
        }
        return out;
    }
    let e = Complex64::from_polar(1.0, theta);
    let it = Complex64::new(0.0, theta);
    out[0] = (e - 1.0) / it;
    out[1] = (e - out[0]) / it;
    out[2] = (e - 2.0 * out[1]) / it;
    out
}

/// Sine integral Si(x) = ∫₀ˣ sin(y)/y dy.
///
/// Power series for |x| ≤ 8; beyond that the remainder past 8 is added by
/// adaptive quadrature.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 8.0 {
        return sine_integral_series(x);
    }
    let rest = integrate(|y| y.sin() / y, 8.0, x, 1e-15, 1e-14)
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
    sine_integral_series(8.0) + rest
}

fn sine_integral_series(x: f64) -> f64 {
    // Σ (-1)^n x^(2n+1) / ((2n+1) (2n+1)!)
    let x2 = x * x;
    let mut term = x; // x^(2n+1)/(2n+1)!
    let mut sum = x;
    for n in 1..200 {
        let k = (2 * n) as f64;
        term *= -x2 / (k * (k + 1.0));
        let contribution = term / (k + 1.0);
        sum += contribution;
        if contribution.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_exp() {
        let e = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((e.value - (64.0 / 6.0 - 6.0)).abs() < 1e-12);
        let e = integrate(f64::exp, 0.0, 1.0, 0.0, 1e-13).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let e = integrate(f64::sqrt, 0.0, 1.0, 0.0, 1e-10).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn sine_integral_at_pi() {
        // reference value of Si(π)
        assert!((sine_integral(PI) - 1.851_937_051_982_466_2).abs() < 1e-14);
        let q = integrate(|y| if y == 0.0 { 1.0 } else { y.sin() / y }, 0.0, PI, 0.0, 1e-14).unwrap();
        assert!((sine_integral(PI) - q.value).abs() < 1e-9);
    }

    #[test]
    fn sine_integral_large_argument() {
        // Si(x) → π/2 with oscillating O(1/x) corrections
        let x: f64 = 50.0;
        let asymptotic = PI / 2.0 - x.cos() / x - x.sin() / (x * x);
        assert!((sine_integral(x) - asymptotic).abs() < 1e-4);
        assert!((sine_integral(-2.0) + sine_integral(2.0)).abs() < 1e-15);
    }

    #[test]
    fn legendre_rule_is_exact() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn phase_moments_match_quadrature() {
        for &theta in &[0.0, 1e-3, 0.7, 0.999, 1.001, 3.0, 40.0, -5.0] {
            let m = phase_moments(theta);
            for (n, got) in m.iter().enumerate() {
                let re = integrate(|s: f64| s.powi(n as i32) * (theta * s).cos(), 0.0, 1.0, 1e-15, 1e-14).unwrap().value;
                let im = integrate(|s: f64| s.powi(n as i32) * (theta * s).sin(), 0.0, 1.0, 1e-15, 1e-14).unwrap().value;
                assert!((got.re - re).abs() < 1e-13 && (got.im - im).abs() < 1e-13, "θ={theta} n={n}");
            }
        }
    }

    #[test]
    fn tail_of_power_law() {
        // ∫₀^∞ ω/(1+ω²)^2 dω = 1/2, integrand ~ ω^-3
        let t = integrate_to_infinity(|w| w / (1.0 + w * w).powi(2), 1.0, 1.0, 1e-10).unwrap();
        assert!((t.value - 0.5).abs() < 1e-9, "{t:?}");
    }

    #[test]
    fn tail_of_gaussian() {
        let t = integrate_to_infinity(|w| (-w * w).exp() * w, 1.0, 1.0, 1e-12).unwrap();
        assert!((t.value - 0.5).abs() < 1e-12, "{t:?}");
        assert!(t.tail.abs() < 1e-12);
    }

    #[test]
    fn logarithmic_divergence_detected() {
        let r = integrate_to_infinity(|w| (w / 2.0).sin().powi(2) / (w + 1e-300), 1.0, 1.0, 1e-8);
        assert!(matches!(r, Err(Error::Divergent { .. })), "{r:?}");
    }
}
