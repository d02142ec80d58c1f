//! No-signaling audit of the two-lab protocol.
//!
//! Bob entangles his test particle with Alice's superposition after T_B;
//! Alice's discrimination takes T_A; causality demands T_A + T_B ≥ R/c.
//! Writing η = c·T_B/R and taking Bob's localization at its limit gives
//! T_A ≥ ½·ratio·(d/c)·(η² − η³), maximized over η ∈ [0, 1].

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, SourceKind, SuperpositionSpec};
use crate::echo::{self, ForcePair};
use crate::error::{non_negative, positive, Error, Result};
use crate::units::PhysicalConstants;

/// Relative slack allowed when comparing T_A + T_B against R/c.
pub const CAUSALITY_RTOL: f64 = 1e-9;

const ETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub alice: SuperpositionSpec,
    /// Bob's test mass (kg).
    pub bob_mass: f64,
    /// Bob's test charge (C); only used when Alice's source is a charge.
    pub bob_charge: f64,
    /// Lab separation R (m).
    pub distance: f64,
    /// Bob's localization width (m).
    pub sigma: f64,
}

impl Scenario {
    /// Validates the parameters; `sigma = None` selects the localization limit.
    pub fn new(
        alice: SuperpositionSpec,
        bob_mass: f64,
        bob_charge: f64,
        distance: f64,
        sigma: Option<f64>,
        k: &PhysicalConstants,
    ) -> Result<Self> {
        alice.validate()?;
        positive("bob_mass", bob_mass)?;
        positive("R", distance)?;
        if alice.kind == SourceKind::Charge {
            positive("bob_charge", bob_charge)?;
        } else {
            non_negative("bob_charge", bob_charge)?;
        }
        let mut s = Self { alice, bob_mass, bob_charge, distance, sigma: 0.0 };
        let limit = s.min_localization(k)?;
        s.sigma = match sigma {
            None => limit,
            Some(v) => {
                positive("sigma", v)?;
                if v < limit * (1.0 - 1e-12) {
                    return Err(Error::BelowLocalizationLimit { sigma: v, limit });
                }
                v
            }
        };
        Ok(s)
    }

    /// l_P for a massive source, Bob's charge radius for a charged one.
    pub fn min_localization(&self, k: &PhysicalConstants) -> Result<f64> {
        match self.alice.kind {
            SourceKind::Mass => Ok(bounds::min_localization_mass(k)),
            SourceKind::Charge => bounds::charge_radius(self.bob_charge, self.bob_mass, k),
        }
    }

    pub fn forces(&self, k: &PhysicalConstants) -> Result<ForcePair> {
        let d = self.alice.separation_d;
        match self.alice.kind {
            SourceKind::Mass => echo::force_difference_gravity(self.alice.magnitude, self.bob_mass, d, self.distance, k),
            SourceKind::Charge => echo::force_difference_coulomb(self.alice.magnitude, self.bob_charge, d, self.distance, k),
        }
    }
}

/// T_B from ΔF·T_B²/(2·m_B·ΔX_min) = 1, with the order-one "≃ 1" taken as
/// an equality.
pub fn tb_at_localization_limit(s: &Scenario, k: &PhysicalConstants) -> Result<f64> {
    let forces = s.forces(k)?;
    echo::entanglement_time(forces.delta_f, s.bob_mass, s.min_localization(k)?)
}

/// Same as [`tb_at_localization_limit`] but at the scenario's own σ.
pub fn tb_at_sigma(s: &Scenario, k: &PhysicalConstants) -> Result<f64> {
    let forces = s.forces(k)?;
    echo::entanglement_time(forces.delta_f, s.bob_mass, s.sigma)
}

/// η² − η³.
pub fn eta_objective(eta: f64) -> f64 {
    eta * eta * (1.0 - eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaOptimum {
    pub eta: f64,
    pub objective: f64,
    /// ½·ratio·(d/c)·(η*² − η*³), seconds.
    pub bound: f64,
}

/// Maximizes a unimodal `f` on `[lo, hi]`.
///
/// Golden-section search narrows the bracket while function values still
/// discriminate, then the sign of a central-difference slope is bisected
/// down to `tol`, below the ~√ε resolution of value comparisons.
pub fn maximize_bracketed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-5 * (hi - lo) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let h = 1e-6 * (hi - lo);
    let slope = |x: f64| f(x + h) - f(x - h);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if slope(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

pub fn optimize_eta(alice: &SuperpositionSpec, k: &PhysicalConstants) -> Result<EtaOptimum> {
    alice.validate()?;
    let (eta, objective) = maximize_bracketed(eta_objective, 0.0, 1.0, ETA_TOL);
    let bound = 0.5 * alice.planck_ratio(k) * alice.separation_d / k.c() * objective;
    Ok(EtaOptimum { eta, objective, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimelineReport {
    pub distance: f64,
    pub t_b: f64,
    pub t_a: f64,
    /// max(R/c − T_B, 0): the least T_A this configuration forces.
    pub t_a_bound: f64,
    /// c·T_B/R; values above one mean Bob is too slow to constrain Alice.
    pub eta: f64,
    pub satisfied: bool,
}

pub fn audit_timeline(s: &Scenario, t_a: f64, k: &PhysicalConstants) -> Result<TimelineReport> {
    non_negative("T_A", t_a)?;
    let t_b = tb_at_localization_limit(s, k)?;
    let light = s.distance / k.c();
    Ok(TimelineReport {
        distance: s.distance,
        t_b,
        t_a,
        t_a_bound: (light - t_b).max(0.0),
        eta: t_b / light,
        satisfied: t_a + t_b >= light * (1.0 - CAUSALITY_RTOL),
    })
}

/// Audits independent scenarios in parallel; results keep the input order.
pub fn audit_sweep(scenarios: &[Scenario], t_a: f64, k: &PhysicalConstants) -> Vec<Result<TimelineReport>> {
    scenarios.par_iter().map(|s| audit_timeline(s, t_a, k)).collect()
}

/// R at which η = 2/3 for the given source, where the constraint on T_A is tightest.
pub fn critical_distance(alice: &SuperpositionSpec, k: &PhysicalConstants) -> f64 {
    // η² = c²T_B²/R² = 2R/(ratio·d)  ⇒  R* = (2/9)·ratio·d
    2.0 / 9.0 * alice.planck_ratio(k) * alice.separation_d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const K: PhysicalConstants = PhysicalConstants::SI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn mass_scenario(ratio: f64, d: f64, mb: f64, r: f64) -> Scenario {
        let alice = SuperpositionSpec::mass(ratio * K.planck_scales().mass, d).unwrap();
        Scenario::new(alice, mb, 0.0, r, None, &K).unwrap()
    }

    fn charge_scenario(ratio: f64, d: f64, mb: f64, qb: f64, r: f64) -> Scenario {
        let alice = SuperpositionSpec::charge(ratio * K.planck_scales().charge, d).unwrap();
        Scenario::new(alice, mb, qb, r, None, &K).unwrap()
    }

    #[test]
    fn optimizer_finds_two_thirds() {
        let spec = SuperpositionSpec::mass(K.planck_scales().mass, 1.0).unwrap();
        let opt = optimize_eta(&spec, &K).unwrap();
        assert!((opt.eta - 2.0 / 3.0).abs() < 1e-9, "{}", opt.eta);
        assert!((opt.objective - 4.0 / 27.0).abs() < 1e-15);
        assert!(rel(opt.bound, 2.0 / 27.0 / K.c()) < 1e-12);
        assert_eq!(eta_objective(0.0), 0.0);
        assert_eq!(eta_objective(1.0), 0.0);
    }

    #[test]
    fn maximizer_on_other_shapes() {
        let (x, _) = maximize_bracketed(|x| -(x - 0.3141).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3141).abs() < 1e-10);
        let (x, _) = maximize_bracketed(|x: f64| (x * 2.0).sin(), 0.0, 2.0, 1e-12);
        assert!((x - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn tb_mass_case_independent_of_bob() {
        let d = 1e-6;
        let r: f64 = 1.0;
        let ratio = 1e9;
        let ma = ratio * K.planck_scales().mass;
        let expected = (2.0 * K.planck_scales().length * r.powi(3) / (K.g() * ma * d)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mb = 10f64.powf(rng.random_range(-20.0..5.0));
            let tb = tb_at_localization_limit(&mass_scenario(ratio, d, mb, r), &K).unwrap();
            assert!(rel(tb, expected) < 1e-9);
        }
    }

    #[test]
    fn tb_charge_case_independent_of_bob() {
        let d = 1e-6;
        let r: f64 = 0.5;
        let ratio = 1e4;
        let qa = ratio * K.planck_scales().charge;
        // T_B² = 2·(q_P/q_A)·R³/(d·c²)
        let expected = (2.0 / ratio * r.powi(3) / (d * K.c().powi(2))).sqrt();
        let direct = |mb: f64, qb: f64| {
            let dx = bounds::charge_radius(qb, mb, &K).unwrap();
            let df = K.coulomb() * qa * qb * d / r.powi(3);
            (2.0 * mb * dx / df).sqrt()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let mb = 10f64.powf(rng.random_range(-25.0..3.0));
            let qb = 10f64.powf(rng.random_range(-19.0..-10.0));
            let tb = tb_at_localization_limit(&charge_scenario(ratio, d, mb, qb, r), &K).unwrap();
            assert!(rel(tb, expected) < 1e-9);
            assert!(rel(tb, direct(mb, qb)) < 1e-9);
        }
    }

    #[test]
    fn tb_scales_as_three_halves_power() {
        let a = tb_at_localization_limit(&mass_scenario(1e6, 1e-6, 1.0, 1.0), &K).unwrap();
        let b = tb_at_localization_limit(&mass_scenario(1e6, 1e-6, 1.0, 4.0), &K).unwrap();
        assert!(rel(b / a, 8.0) < 1e-12);
    }

    #[test]
    fn dipole_gate_propagates() {
        let s = mass_scenario(1e6, 1e-6, 1.0, 5e-6);
        assert!(matches!(tb_at_localization_limit(&s, &K), Err(Error::DipoleApproximation { .. })));
    }

    #[test]
    fn sigma_validation() {
        let alice = SuperpositionSpec::mass(1.0, 1e-6).unwrap();
        let lp = K.planck_scales().length;
        assert!(Scenario::new(alice, 1.0, 0.0, 1.0, Some(lp / 2.0), &K).is_err());
        let s = Scenario::new(alice, 1.0, 0.0, 1.0, Some(1e-9), &K).unwrap();
        assert_eq!(s.sigma, 1e-9);
        let q = SuperpositionSpec::charge(1e-15, 1e-6).unwrap();
        assert!(Scenario::new(q, 1.0, 0.0, 1.0, None, &K).is_err());
    }

    #[test]
    fn light_time_always_suffices() {
        let s = mass_scenario(1e8, 1e-6, 1.0, 10.0);
        let rep = audit_timeline(&s, s.distance / K.c(), &K).unwrap();
        assert!(rep.satisfied);
        assert!(rel(rep.eta, rep.t_b * K.c() / s.distance) < 1e-15);
    }

    fn sweep(alice: SuperpositionSpec, make: impl Fn(f64) -> Scenario) -> Vec<Scenario> {
        let rc = critical_distance(&alice, &K);
        (0..=200)
            .map(|i| rc * 10f64.powf(-5.0 + 10.0 * i as f64 / 200.0))
            .map(make)
            .collect()
    }

    #[test]
    fn sharp_bound_survives_sweep_and_is_tight() {
        let ratio = 1e12;
        let d = 1e-6;
        let alice = SuperpositionSpec::mass(ratio * K.planck_scales().mass, d).unwrap();
        let scenarios = sweep(alice, |r| mass_scenario(ratio, d, 1.0, r));
        let sharp = bounds::sharp_min_time(&alice, &K).unwrap();
        let ok = audit_sweep(&scenarios, sharp, &K);
        assert!(ok.iter().all(|r| r.as_ref().unwrap().satisfied));
        let short = audit_sweep(&scenarios, 0.9 * sharp, &K);
        assert!(short.iter().any(|r| !r.as_ref().unwrap().satisfied));
        let worst = ok.iter().map(|r| r.as_ref().unwrap().t_a_bound).fold(0.0, f64::max);
        assert!(worst <= sharp * (1.0 + 1e-9) && worst > 0.99 * sharp);
    }

    #[test]
    fn charge_sweep() {
        let ratio = 1e9;
        let d = 1e-5;
        let alice = SuperpositionSpec::charge(ratio * K.planck_scales().charge, d).unwrap();
        let scenarios = sweep(alice, |r| charge_scenario(ratio, d, 1e-3, 1e-12, r));
        let sharp = bounds::sharp_min_time(&alice, &K).unwrap();
        assert!(audit_sweep(&scenarios, sharp, &K).iter().all(|r| r.as_ref().unwrap().satisfied));
        assert!(audit_sweep(&scenarios, 0.9 * sharp, &K).iter().any(|r| !r.as_ref().unwrap().satisfied));
    }

    #[test]
    fn optimizer_matches_sharp_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let kind = if rng.random_bool(0.5) { SourceKind::Mass } else { SourceKind::Charge };
            let spec = SuperpositionSpec::new(kind, 10f64.powf(rng.random_range(-20.0..25.0)), 10f64.powf(rng.random_range(-9.0..1.0))).unwrap();
            let opt = optimize_eta(&spec, &K).unwrap();
            assert!(rel(opt.bound, bounds::sharp_min_time(&spec, &K).unwrap()) < 1e-9);
        }
    }
}
