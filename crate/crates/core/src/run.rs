//! Subcommand execution: sweep points in parallel, rows in sweep order.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, SourceKind, SuperpositionSpec};
use crate::causality::{self, Scenario};
use crate::config::{RunConfig, ScenarioConfig};
use crate::echo::{self, GaussianState};
use crate::error::{Error, Result};
use crate::interference::{self, SuperposedWavepacket};
use crate::oracle;
use crate::radiation::{self, ModeGrid, TrajectoryProfile};
use crate::units::PhysicalConstants;
use crate::vacuum::{self, WindowFunction, WindowShape};

const DEFAULT_ORACLE_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Bound,
    Echo,
    Causality,
    Radiation,
    Vacuum,
    Interference,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Subcommand::Bound => "bound",
            Subcommand::Echo => "echo",
            Subcommand::Causality => "causality",
            Subcommand::Radiation => "radiation",
            Subcommand::Vacuum => "vacuum",
            Subcommand::Interference => "interference",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub oracle: bool,
    /// Directory against which relative table paths are resolved.
    pub base_dir: PathBuf,
}

/// A finished run: table contents plus per-row failures.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<String>,
    /// Largest exit code among failed rows; 0 when every row succeeded.
    pub exit_code: u8,
    pub summary: serde_json::Value,
}

impl RunOutput {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Enough to reproduce the run; deliberately free of timestamps and hosts.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: Subcommand,
    pub oracle: bool,
    pub seed: u64,
    pub constants: PhysicalConstants,
    pub config: &'a RunConfig,
    pub rows: usize,
    pub failures: &'a [String],
    pub summary: &'a serde_json::Value,
}

pub fn metadata<'a>(sub: Subcommand, cfg: &'a RunConfig, opts: &RunOptions, out: &'a RunOutput) -> Result<Metadata<'a>> {
    Ok(Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: sub,
        oracle: opts.oracle,
        seed: cfg.seed,
        constants: cfg.constants()?,
        config: cfg,
        rows: out.rows.len(),
        failures: &out.failures,
        summary: &out.summary,
    })
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

type Row = Result<Vec<String>>;

/// Evaluates every sweep point concurrently and assembles the table.
fn tabulate<F>(cfg: &RunConfig, columns: &[&str], point: F) -> RunOutput
where
    F: Fn(&ScenarioConfig) -> Row + Sync,
{
    let scenarios = cfg.scenarios();
    let results: Vec<Row> = scenarios.par_iter().map(|(_, s)| point(s)).collect();
    let mut header = vec!["sweep_index".to_string(), "sweep_value".to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    header.push("error".into());
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut exit_code = 0u8;
    for (i, ((value, _), result)) in scenarios.iter().zip(results).enumerate() {
        let mut row = vec![i.to_string(), opt(*value)];
        match result {
            Ok(cells) => {
                row.extend(cells);
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), columns.len()));
                row.push(e.to_string());
                failures.push(format!("row {i}: {e}"));
                exit_code = exit_code.max(e.exit_code() as u8);
            }
        }
        rows.push(row);
    }
    RunOutput { header, rows, failures, exit_code, summary: serde_json::Value::Null }
}

fn require_charge(spec: &SuperpositionSpec, sub: Subcommand) -> Result<()> {
    if spec.kind != SourceKind::Charge {
        return Err(Error::Config(format!("`{sub}` needs scenario.alice.kind = \"charge\"")));
    }
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn scenario(s: &ScenarioConfig, sub: Subcommand, k: &PhysicalConstants) -> Result<Scenario> {
    let bob_mass = ScenarioConfig::require(s.bob_mass, "bob_mass", &sub.to_string())?;
    let bob_charge = match s.alice.kind {
        SourceKind::Charge => ScenarioConfig::require(s.bob_charge, "bob_charge", &sub.to_string())?,
        SourceKind::Mass => s.bob_charge.unwrap_or(0.0),
    };
    let r = ScenarioConfig::require(s.distance, "R", &sub.to_string())?;
    Scenario::new(s.alice, bob_mass, bob_charge, r, s.sigma, k)
}

pub fn run(sub: Subcommand, cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let k = cfg.constants()?;
    match sub {
        Subcommand::Bound => Ok(run_bound(cfg, &k)),
        Subcommand::Echo => run_echo(cfg, opts, &k),
        Subcommand::Causality => Ok(run_causality(cfg, &k)),
        Subcommand::Radiation => run_radiation(cfg, opts, &k),
        Subcommand::Vacuum => run_vacuum(cfg, opts, &k),
        Subcommand::Interference => run_interference(cfg, &k),
    }
}

fn run_bound(cfg: &RunConfig, k: &PhysicalConstants) -> RunOutput {
    let columns = [
        "kind",
        "magnitude_kg_or_C",
        "separation_d_m",
        "planck_ratio",
        "T_seconds",
        "T_sharp_seconds",
        "T_over_universe_age",
    ];
    tabulate(cfg, &columns, |s| {
        let spec = s.alice;
        let t = bounds::min_time(&spec, k)?;
        Ok(vec![
            match spec.kind {
                SourceKind::Mass => "mass".into(),
                SourceKind::Charge => "charge".into(),
            },
            num(spec.magnitude),
            num(spec.separation_d),
            num(spec.planck_ratio(k)),
            num(t),
            num(bounds::sharp_min_time(&spec, k)?),
            num(t / bounds::UNIVERSE_AGE_SECONDS),
        ])
    })
}

fn run_echo(cfg: &RunConfig, opts: &RunOptions, k: &PhysicalConstants) -> Result<RunOutput> {
    let mut columns = vec![
        "R_m",
        "sigma_m",
        "delta_F_N",
        "T_B_seconds",
        "T_B_momentum_route_seconds",
        "time_seconds",
        "delta_x_m",
        "delta_p_kg_m_per_s",
        "cubic_phase_rad",
        "overlap_abs",
        "overlap_phase_rad",
        "trap_max_width_m",
    ];
    if opts.oracle {
        columns.extend(["oracle_overlap_abs", "oracle_phase_rad", "oracle_grid_points"]);
    }
    let steps = cfg.echo.oracle_steps.unwrap_or(DEFAULT_ORACLE_STEPS);
    Ok(tabulate(cfg, &columns, |s| {
        let sc = scenario(s, Subcommand::Echo, k)?;
        let forces = sc.forces(k)?;
        let t_b = echo::entanglement_time(forces.delta_f, sc.bob_mass, sc.sigma)?;
        let t = cfg.echo.time.unwrap_or(t_b);
        let state = GaussianState::new(cfg.echo.x0, cfg.echo.p0, sc.sigma)?;
        let result = echo::echo_at(&state, &forces, sc.bob_mass, t, k)?;
        let amp = echo::echo_amplitude(&state, &result, k);
        let mut row = vec![
            num(sc.distance),
            num(sc.sigma),
            num(forces.delta_f),
            num(t_b),
            num(echo::momentum_route_time(forces.delta_f, sc.sigma, k)?),
            num(t),
            num(result.delta_x),
            num(result.delta_p),
            num(result.cubic_phase),
            num(amp.norm()),
            num(amp.arg()),
            num(echo::trap_max_width(sc.bob_mass, forces.delta_f, k)?),
        ];
        if opts.oracle {
            // units of σ, τ = mσ²/ħ and ħ²/(mσ³)
            let (m, sg, hb) = (sc.bob_mass, sc.sigma, k.hbar());
            let force_unit = hb * hb / (m * sg.powi(3));
            let tau = m * sg * sg / hb;
            let scaled = GaussianState::new(state.x0 / sg, state.p0 * sg / hb, 1.0)?;
            // same dipole-order pair the closed form uses
            let half_sum = 0.5 * forces.sum();
            let fl = (half_sum + 0.5 * forces.delta_f) / force_unit;
            let fr = (half_sum - 0.5 * forces.delta_f) / force_unit;
            let grid = oracle::auto_grid(&scaled, &[fl, fr], 1.0, t / tau)?;
            let psi = oracle::init_gaussian(grid, &scaled)?;
            let numeric = oracle::echo_overlap_numeric(&psi, fl, fr, 1.0, t / tau, steps)?;
            row.extend([num(numeric.norm()), num(numeric.arg()), grid.n_points.to_string()]);
        }
        Ok(row)
    }))
}

fn run_causality(cfg: &RunConfig, k: &PhysicalConstants) -> RunOutput {
    let columns = ["R_m", "T_B_seconds", "T_A_seconds", "T_A_bound_seconds", "eta", "light_time_seconds", "satisfied"];
    let mut out = tabulate(cfg, &columns, |s| {
        let sc = scenario(s, Subcommand::Causality, k)?;
        let t_a = match cfg.causality.t_a {
            Some(t) => t,
            None => bounds::sharp_min_time(&sc.alice, k)?,
        };
        let r = causality::audit_timeline(&sc, t_a, k)?;
        Ok(vec![
            num(sc.distance),
            num(r.t_b),
            num(r.t_a),
            num(r.t_a_bound),
            num(r.eta),
            num(sc.distance / k.c()),
            r.satisfied.to_string(),
        ])
    });
    if let Ok(opt) = causality::optimize_eta(&cfg.scenario.alice, k) {
        out.summary = serde_json::json!({
            "eta_star": opt.eta,
            "sharp_bound_seconds": opt.bound,
            "critical_R_m": causality::critical_distance(&cfg.scenario.alice, k),
        });
    }
    out
}

fn run_radiation(cfg: &RunConfig, opts: &RunOptions, k: &PhysicalConstants) -> Result<RunOutput> {
    let rc = cfg
        .radiation
        .as_ref()
        .ok_or_else(|| Error::Config("`radiation` needs a `radiation` section".into()))?;
    let table = match &rc.trajectory_csv {
        Some(p) => Some(TrajectoryProfile::from_csv(&resolve(&opts.base_dir, p))?),
        None => None,
    };
    let columns = [
        "charge_C",
        "d_m",
        "t0_seconds",
        "min_radiationless_time_seconds",
        "exponent",
        "vacuum_overlap",
        "grid_exponent",
        "long_wavelength_ok",
        "spin_visibility",
        "p_plus",
    ];
    let mut out = tabulate(cfg, &columns, |s| {
        require_charge(&s.alice, Subcommand::Radiation)?;
        let q = s.alice.magnitude;
        let profile = match &table {
            Some(p) => p.clone(),
            None => TrajectoryProfile::sin_squared(s.alice.separation_d, rc.t0.expect("validated"))?,
        };
        let (d, t0) = (profile.d().abs(), profile.t0());
        let exponent = radiation::mode_integral(&profile, q, k)?;
        let overlap = (-exponent).exp();
        let f = radiation::displacement_from_trajectory(&profile, q, &ModeGrid::for_duration(t0)?, k)?;
        let visibility = overlap.powf(rc.kappa);
        if !(rc.kappa > 0.0 && rc.kappa.is_finite()) {
            return Err(Error::NonPositive { name: "kappa", value: rc.kappa });
        }
        let spin = interference::SpinOutcome::from_visibility(visibility);
        Ok(vec![
            num(q),
            num(d),
            num(t0),
            opt(radiation::min_radiationless_time(q, d, k).ok()),
            num(exponent),
            num(overlap),
            num(f.norm_sqr()),
            f.long_wavelength.to_string(),
            num(spin.visibility),
            num(spin.p_plus),
        ])
    });
    let flag = out.header.iter().position(|h| h == "long_wavelength_ok").expect("column present");
    let warnings: Vec<String> = out
        .rows
        .iter()
        .filter(|r| r[flag] == "false")
        .map(|r| format!("row {}: mode grid reaches wavelengths comparable to d; grid_exponent is indicative only", r[0]))
        .collect();
    out.summary = serde_json::json!({ "warnings": warnings });
    Ok(out)
}

fn run_vacuum(cfg: &RunConfig, opts: &RunOptions, k: &PhysicalConstants) -> Result<RunOutput> {
    let vc = cfg
        .vacuum
        .as_ref()
        .ok_or_else(|| Error::Config("`vacuum` needs a `vacuum` section".into()))?;
    let window = match (&vc.window_csv, vc.width_t) {
        (Some(p), _) => WindowFunction::from_csv(&resolve(&opts.base_dir, p))?,
        (None, Some(t)) => WindowFunction::gaussian(t)?,
        (None, None) => unreachable!("validated"),
    };
    let variance = vacuum::averaged_variance(&window)?;
    let closed = match window.shape() {
        WindowShape::Gaussian => Some(vacuum::gaussian_variance(window.width())?),
        WindowShape::Tabulated => None,
    };
    let instantaneous = vc.cutoff.map(vacuum::instantaneous_variance).transpose()?;
    let columns = [
        "charge_C",
        "d_m",
        "window_width_seconds",
        "averaged_variance_per_s2",
        "closed_form_variance_per_s2",
        "instantaneous_variance_per_s2",
        "momentum_error_kg_m_per_s",
        "required_precision_kg_m_per_s",
        "min_measurement_time_seconds",
    ];
    Ok(tabulate(cfg, &columns, |s| {
        require_charge(&s.alice, Subcommand::Vacuum)?;
        let (q, d) = (s.alice.magnitude, s.alice.separation_d);
        Ok(vec![
            num(q),
            num(d),
            num(window.width()),
            num(variance),
            opt(closed),
            opt(instantaneous),
            num(vacuum::momentum_error_from_variance(q, variance, k)?),
            num(interference::required_precision(d, k)?),
            num(vacuum::min_measurement_time(q, d, k)?),
        ])
    }))
}

fn run_interference(cfg: &RunConfig, k: &PhysicalConstants) -> Result<RunOutput> {
    let ic = cfg
        .interference
        .as_ref()
        .ok_or_else(|| Error::Config("`interference` needs an `interference` section".into()))?;
    if cfg.sweep.is_some() {
        return Err(Error::Config("`interference` sweeps noise itself; remove `sweep`".into()));
    }
    if ic.levels == 0 || !(ic.noise_min >= 0.0 && ic.noise_max >= ic.noise_min) {
        return Err(Error::Config("interference: need levels ≥ 1 and 0 ≤ noise_min ≤ noise_max".into()));
    }
    let d = ic.d.unwrap_or(cfg.scenario.alice.separation_d);
    let packet = SuperposedWavepacket::new(ic.sigma, d, ic.phi)?;
    let multiples: Vec<f64> = if ic.levels == 1 {
        vec![ic.noise_min]
    } else if ic.noise_min > 0.0 {
        let r = (ic.noise_max / ic.noise_min).ln();
        (0..ic.levels).map(|i| ic.noise_min * (r * i as f64 / (ic.levels - 1) as f64).exp()).collect()
    } else {
        (0..ic.levels).map(|i| ic.noise_max * i as f64 / (ic.levels - 1) as f64).collect()
    };
    let unit = PI / d;
    let levels: Vec<f64> = multiples.iter().map(|m| m * unit).collect();
    let curve = interference::power_curve(&packet, &levels, ic.n_samples, ic.trials, cfg.seed)?;
    let header = [
        "noise_index",
        "noise_over_pi_over_d",
        "noise_per_m",
        "noise_kg_m_per_s",
        "power",
        "false_alarm",
        "power_std_error",
    ]
    .map(String::from)
    .to_vec();
    let rows = curve
        .iter()
        .zip(&multiples)
        .enumerate()
        .map(|(i, (p, m))| {
            vec![
                i.to_string(),
                num(*m),
                num(p.noise),
                num(p.noise * k.hbar()),
                num(p.power),
                num(p.false_alarm),
                num(p.std_error),
            ]
        })
        .collect();
    Ok(RunOutput {
        header,
        rows,
        failures: Vec::new(),
        exit_code: 0,
        summary: serde_json::json!({ "required_precision_kg_m_per_s": interference::required_precision(d, k)? }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(sub: Subcommand, text: &str) -> RunOutput {
        run(sub, &parse_config(text).unwrap(), &RunOptions::default()).unwrap()
    }

    #[test]
    fn earth_bound_row() {
        let out = run_text(Subcommand::Bound, r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 5.97e24, "separation_d": 1e-6}}}"#);
        let col = out.header.iter().position(|h| h == "T_seconds").unwrap();
        let t: f64 = out.rows[0][col].parse().unwrap();
        assert!(t > 8e17 && t < 1e18, "{t}");
        assert!(out.failures.is_empty());
    }

    #[test]
    fn causality_sweep_all_satisfied() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 2.18e4, "separation_d": 1e-6}, "bob_mass": 1.0, "R": 1.0},
            "sweep": {"parameter": "R", "min": 2e-5, "max": 1e12, "points": 41, "scale": "log"}}"#;
        let out = run_text(Subcommand::Causality, text);
        let col = out.header.iter().position(|h| h == "satisfied").unwrap();
        assert_eq!(out.rows.len(), 41);
        assert!(out.rows.iter().all(|r| r[col] == "true"), "{:?}", out.failures);
        assert!((out.summary["eta_star"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn failures_become_rows() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-3}, "bob_mass": 1.0},
            "sweep": {"parameter": "R", "min": 1e-3, "max": 1.0, "points": 3}}"#;
        let out = run_text(Subcommand::Echo, text);
        assert_eq!(out.rows.len(), 3);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.exit_code, 1);
        assert!(out.rows[0].last().unwrap().contains("dipole"));
    }

    #[test]
    fn echo_oracle_columns_agree() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1e-3, "separation_d": 1e-6}, "bob_mass": 1e-20, "R": 1e-4, "sigma": 1e-9}}"#;
        let cfg = parse_config(text).unwrap();
        let out = run(Subcommand::Echo, &cfg, &RunOptions { oracle: true, ..Default::default() }).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        let get = |name: &str| -> f64 { out.rows[0][out.header.iter().position(|h| h == name).unwrap()].parse().unwrap() };
        assert!((get("overlap_abs") - get("oracle_overlap_abs")).abs() < 1e-6);
        assert!((get("overlap_abs") - (-0.125f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn radiation_needs_charge() {
        let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-3}}, "radiation": {"t0": 1.0}}"#;
        let out = run_text(Subcommand::Radiation, text);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.exit_code, 2);
    }

    #[test]
    fn csv_is_deterministic() {
        let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-16, "separation_d": 1e-3}},
            "radiation": {"t0": 1e-9}, "sweep": {"parameter": "alice.magnitude", "min": 1e-17, "max": 1e-15, "points": 8, "scale": "log"}}"#;
        let a = run_text(Subcommand::Radiation, text).to_csv().unwrap();
        let b = run_text(Subcommand::Radiation, text).to_csv().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("sweep_index,sweep_value,charge_C,"));
    }
}
