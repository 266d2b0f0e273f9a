//! Scenario runner behind the command-line tool: the three hydrogen drop
//! scenarios, the delay-versus-quantumness sweep, and scenario files.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{delta_quantum, semiclassical_moments};
use crate::distribution::{pdf_freefall, ToaDensity, ToaMoments};
use crate::error::{require, Result};
use crate::output::{Cell, Table};
use crate::params::{classical_toa, quantumness, PhysicalParams, HBAR_CODATA};
use crate::quadrature::IntegrationConfig;
use crate::sampling::{
    estimate_stats, sample_toa_longtof_with, sample_toa_with, Execution, SampleStats, SamplerConfig,
};
use crate::trajectory::GaussianTrajectory;

/// Hydrogen-1 atomic mass, 1.00782503 u. Table values quoted to three
/// digits drift from results with this constant by well under 1%.
pub const HYDROGEN_1_MASS: f64 = 1.673_557_5e-27;
/// Rubidium-87 atomic mass, 86.909180527 u.
pub const RUBIDIUM_87_MASS: f64 = 1.443_160_648e-25;
/// Ground-state width in a 3.16 MHz harmonic trap for hydrogen-1.
pub const TABLE_SIGMA0: f64 = 1e-7;
/// Standard gravity.
pub const EARTH_G: f64 = 9.81;
/// Below this t_c/τ the long time-of-flight formulas are not expected to hold.
pub const LONG_TOF_MIN_RATIO: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    McExact,
    McLongtof,
    Semiclassical,
    Quantum,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::McExact => "mc_exact",
            Method::McLongtof => "mc_longtof",
            Method::Semiclassical => "semiclassical",
            Method::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub label: String,
    pub params: PhysicalParams,
    pub x: f64,
    pub methods: Vec<Method>,
}

impl ScenarioSpec {
    pub fn new(
        label: impl Into<String>,
        params: PhysicalParams,
        x: f64,
        methods: &[Method],
    ) -> Result<Self> {
        require(
            !methods.is_empty(),
            "methods",
            0.0,
            "at least one method is required",
        )?;
        params.check_detector(x)?;
        let mut methods = methods.to_vec();
        methods.sort();
        methods.dedup();
        Ok(Self {
            label: label.into(),
            params,
            x,
            methods,
        })
    }

    /// The first available method in the order quadrature, exact Monte
    /// Carlo, long time-of-flight Monte Carlo, semiclassical, quantum.
    pub fn primary_method(&self) -> Method {
        self.methods[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub integration: IntegrationConfig,
    pub sampler: SamplerConfig,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    pub x: f64,
    pub g: f64,
    pub t_c: f64,
    pub q: f64,
    pub tc_over_tau: f64,
    pub primary_method: Method,
    pub delta: f64,
    /// `delta · t_c` for the primary method.
    pub delta_t: f64,
    pub delta_quadrature: Option<f64>,
    pub delta_mc_exact: Option<f64>,
    pub delta_mc_longtof: Option<f64>,
    pub delta_semiclassical: Option<f64>,
    pub delta_quantum: Option<f64>,
    pub normalization: Option<f64>,
    pub mc_failure_rate: Option<f64>,
    pub converged: bool,
}

pub fn evaluate_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<ResultRow> {
    let p = &spec.params;
    let x = spec.x;
    let t_c = classical_toa(p, x)?;
    let q = quantumness(p, x)?;
    let mut row = ResultRow {
        label: spec.label.clone(),
        x,
        g: p.g(),
        t_c,
        q,
        tc_over_tau: t_c / p.tau(),
        primary_method: spec.primary_method(),
        delta: f64::NAN,
        delta_t: f64::NAN,
        delta_quadrature: None,
        delta_mc_exact: None,
        delta_mc_longtof: None,
        delta_semiclassical: None,
        delta_quantum: None,
        normalization: None,
        mc_failure_rate: None,
        converged: true,
    };
    let mean_delta = |toas: &[f64]| (toas.iter().sum::<f64>() / toas.len() as f64 - t_c) / t_c;
    for method in &spec.methods {
        match method {
            Method::Quadrature => {
                let density = ToaDensity::new(GaussianTrajectory::new(*p), x)?;
                let m = density.compute_moments(&opts.integration)?;
                row.delta_quadrature = Some(m.delta);
                row.normalization = Some(m.normalization);
                row.converged &= m.normalization_ok;
            }
            Method::McExact => {
                let batch = sample_toa_with(p, x, &opts.sampler, opts.execution)?;
                row.mc_failure_rate = Some(batch.failure_rate());
                row.delta_mc_exact = Some(mean_delta(&batch.toas));
            }
            Method::McLongtof => {
                let batch = sample_toa_longtof_with(p, x, &opts.sampler, opts.execution)?;
                row.delta_mc_longtof = Some(mean_delta(&batch.toas));
            }
            Method::Semiclassical => {
                row.delta_semiclassical = Some(semiclassical_moments(p, x)?.delta)
            }
            Method::Quantum => row.delta_quantum = delta_quantum(p, x).ok(),
        }
    }
    let primary = match row.primary_method {
        Method::Quadrature => row.delta_quadrature,
        Method::McExact => row.delta_mc_exact,
        Method::McLongtof => row.delta_mc_longtof,
        Method::Semiclassical => row.delta_semiclassical,
        Method::Quantum => row.delta_quantum,
    };
    row.delta = primary.unwrap_or(f64::NAN);
    row.delta_t = row.delta * t_c;
    Ok(row)
}

pub fn table1_scenarios() -> Vec<ScenarioSpec> {
    let methods = [Method::Quadrature, Method::Semiclassical, Method::Quantum];
    [(0.1, EARTH_G), (0.01, EARTH_G), (0.1, 1e-5)]
        .iter()
        .enumerate()
        .map(|(i, &(x, g))| {
            let p = PhysicalParams::new(HYDROGEN_1_MASS, TABLE_SIGMA0, 0.0, g)
                .expect("table parameters are valid");
            ScenarioSpec::new(format!("hydrogen-1 row {}", i + 1), p, x, &methods)
                .expect("table scenarios are valid")
        })
        .collect()
}

pub fn table1(opts: &RunOptions) -> Result<Vec<ResultRow>> {
    table1_scenarios()
        .iter()
        .map(|s| evaluate_scenario(s, opts))
        .collect()
}

pub fn rows_table(rows: &[ResultRow]) -> Table {
    let mut t = Table::new([
        "label",
        "x_m",
        "g_mps2",
        "t_c_s",
        "delta_t_s",
        "q",
        "delta",
        "delta_percent",
        "delta_method",
        "delta_quadrature",
        "delta_mc_exact",
        "delta_mc_longtof",
        "delta_semiclassical",
        "delta_quantum",
        "normalization",
        "mc_failure_rate",
        "tc_over_tau",
        "converged",
    ]);
    for r in rows {
        t.push(vec![
            r.label.clone().into(),
            r.x.into(),
            r.g.into(),
            r.t_c.into(),
            r.delta_t.into(),
            r.q.into(),
            r.delta.into(),
            (100.0 * r.delta).into(),
            r.primary_method.as_str().into(),
            r.delta_quadrature.into(),
            r.delta_mc_exact.into(),
            r.delta_mc_longtof.into(),
            r.delta_semiclassical.into(),
            r.delta_quantum.into(),
            r.normalization.into(),
            r.mc_failure_rate.into(),
            r.tc_over_tau.into(),
            r.converged.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Point {
    pub q: f64,
    pub sigma0: f64,
    /// NaN when the quadrature failed for this point.
    pub delta_numeric: f64,
    pub delta_semiclassical: f64,
    pub delta_quantum: f64,
    pub tc_over_tau: f64,
    pub converged: bool,
}

impl Fig1Point {
    pub fn long_tof(&self) -> bool {
        self.tc_over_tau >= LONG_TOF_MIN_RATIO
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Config {
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
    pub mass: f64,
    pub g: f64,
    pub x: f64,
    pub hbar: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            q_min: 1e-3,
            q_max: 1e3,
            points: 20,
            mass: HYDROGEN_1_MASS,
            g: EARTH_G,
            x: 0.1,
            hbar: HBAR_CODATA,
        }
    }
}

fn fig1_point(cfg: &Fig1Config, q: f64, integration: &IntegrationConfig) -> Result<Fig1Point> {
    let speed = (2.0 * cfg.g * cfg.x).sqrt();
    let sigma0 = cfg.hbar / (2.0 * cfg.mass * q * speed);
    let p = PhysicalParams::with_hbar(cfg.mass, sigma0, 0.0, cfg.g, cfg.hbar)?;
    let q = quantumness(&p, cfg.x)?;
    let t_c = classical_toa(&p, cfg.x)?;
    let numeric = ToaDensity::new(GaussianTrajectory::new(p), cfg.x)
        .and_then(|d| d.compute_moments(integration));
    let (delta_numeric, converged) = match numeric {
        Ok(m) => (m.delta, m.normalization_ok),
        Err(_) => (f64::NAN, false),
    };
    Ok(Fig1Point {
        q,
        sigma0,
        delta_numeric,
        delta_semiclassical: 0.5 * q * q,
        delta_quantum: delta_quantum(&p, cfg.x)?,
        tc_over_tau: t_c / p.tau(),
        converged,
    })
}

/// Log-spaced quantumness sweep obtained by varying the initial width with
/// mass, gravity and drop height fixed. Points come back in ascending `q`.
pub fn fig1_sweep(
    cfg: &Fig1Config,
    integration: &IntegrationConfig,
    exec: Execution,
) -> Result<Vec<Fig1Point>> {
    require(
        cfg.q_min.is_finite() && cfg.q_min > 0.0,
        "q_min",
        cfg.q_min,
        "must be > 0",
    )?;
    require(
        cfg.q_max.is_finite() && cfg.q_max > cfg.q_min,
        "q_max",
        cfg.q_max,
        "must exceed q_min",
    )?;
    require(cfg.points >= 2, "points", cfg.points as f64, "must be >= 2")?;
    let (lo, hi) = (cfg.q_min.ln(), cfg.q_max.ln());
    let qs: Vec<f64> = (0..cfg.points)
        .map(|i| (lo + (hi - lo) * i as f64 / (cfg.points - 1) as f64).exp())
        .collect();
    let run = |&q: &f64| fig1_point(cfg, q, integration);
    let points: Vec<Result<Fig1Point>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => qs.par_iter().map(run).collect(),
        _ => qs.iter().map(run).collect(),
    };
    points.into_iter().collect()
}

pub fn fig1_table(cfg: &Fig1Config, points: &[Fig1Point]) -> Table {
    let mut t = Table::new([
        "q",
        "delta_numeric",
        "delta_semiclassical",
        "delta_quantum",
        "tc_over_tau",
        "sigma0_m",
        "long_tof",
        "converged",
    ]);
    t.note(
        "sweep_variable",
        "sigma0 (q ~ 1/sigma0, tau ~ sigma0^2); mass, g, x fixed; v0 = 0",
    );
    t.note("mass_kg", crate::output::format_float(cfg.mass));
    t.note("g_mps2", crate::output::format_float(cfg.g));
    t.note("x_m", crate::output::format_float(cfg.x));
    t.note(
        "delta_numeric",
        "adaptive quadrature of the mean over t >= 0",
    );
    for p in points {
        t.push(vec![
            p.q.into(),
            p.delta_numeric.into(),
            p.delta_semiclassical.into(),
            p.delta_quantum.into(),
            p.tc_over_tau.into(),
            p.sigma0.into(),
            p.long_tof().into(),
            p.converged.into(),
        ]);
    }
    t
}

/// Log-log plot of the sweep as a standalone SVG document.
pub fn fig1_svg(points: &[Fig1Point]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    let finite: Vec<f64> = points
        .iter()
        .flat_map(|p| [p.delta_numeric, p.delta_semiclassical, p.delta_quantum])
        .filter(|v| v.is_finite() && *v > 0.0)
        .map(f64::log10)
        .collect();
    let (ymin, ymax) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let xs: Vec<f64> = points.iter().map(|p| p.q.log10()).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let sx = |v: f64| PAD + (v - xmin) / (xmax - xmin).max(1e-12) * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - (v - ymin) / (ymax - ymin).max(1e-12) * (H - 2.0 * PAD);
    let line = |get: fn(&Fig1Point) -> f64, style: &str| {
        let pts: Vec<String> = points
            .iter()
            .filter(|p| get(p).is_finite() && get(p) > 0.0)
            .map(|p| format!("{:.2},{:.2}", sx(p.q.log10()), sy(get(p).log10())))
            .collect();
        format!(
            "<polyline fill=\"none\" {style} points=\"{}\"/>\n",
            pts.join(" ")
        )
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    svg.push_str(&format!(
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    ));
    svg.push_str(&line(
        |p| p.delta_numeric,
        "stroke=\"red\" stroke-width=\"2\"",
    ));
    svg.push_str(&line(
        |p| p.delta_semiclassical,
        "stroke=\"blue\" stroke-dasharray=\"6,4\"",
    ));
    svg.push_str(&line(
        |p| p.delta_quantum,
        "stroke=\"green\" stroke-dasharray=\"8,3,2,3\"",
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 q  [{:.1}, {:.1}]</text>\n",
        W / 2.0,
        H - 20.0,
        xmin,
        xmax
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" transform=\"rotate(-90 20 {})\" text-anchor=\"middle\">log10 delta  [{:.1}, {:.1}]</text>\n",
        H / 2.0,
        H / 2.0,
        ymin,
        ymax
    ));
    svg.push_str("</svg>\n");
    svg
}

/// `(t, Π_x(t))` on an evenly spaced grid, from the closed-form density.
pub fn tabulate_pdf(
    params: &PhysicalParams,
    x: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    params.check_detector(x)?;
    require(
        t_min.is_finite() && t_min >= 0.0,
        "t_min",
        t_min,
        "must be >= 0",
    )?;
    require(
        t_max.is_finite() && t_max > t_min,
        "t_max",
        t_max,
        "must exceed t_min",
    )?;
    require(points >= 2, "points", points as f64, "must be >= 2")?;
    let step = (t_max - t_min) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let t = if i + 1 == points {
                t_max
            } else {
                t_min + step * i as f64
            };
            Ok((t, pdf_freefall(params, x, t)?))
        })
        .collect()
}

pub fn pdf_table(grid: &[(f64, f64)]) -> Table {
    let mut t = Table::new(["t_s", "pdf_per_s"]);
    for &(time, v) in grid {
        t.push(vec![time.into(), v.into()]);
    }
    t
}

pub fn moments_table(params: &PhysicalParams, x: f64, m: &ToaMoments) -> Result<Table> {
    let t_c = classical_toa(params, x)?;
    let sc = semiclassical_moments(params, x)?;
    let mut t = Table::new(["quantity", "value", "error_estimate"]);
    let rows: [(&str, f64, Option<f64>); 11] = [
        ("t_c_s", t_c, None),
        ("q", quantumness(params, x)?, None),
        ("tau_s", params.tau(), None),
        ("mean_s", m.mean, Some(m.mean_error)),
        ("std_s", m.std, Some(m.std_error)),
        ("delta", m.delta, Some(m.delta_error)),
        ("delta_t_s", m.delta * t_c, Some(m.delta_error * t_c)),
        (
            "normalization",
            m.normalization,
            Some(m.normalization_error),
        ),
        ("semiclassical_mean_s", sc.mean, None),
        ("semiclassical_std_s", sc.std, None),
        (
            "delta_quantum",
            delta_quantum(params, x).unwrap_or(f64::NAN),
            None,
        ),
    ];
    for (name, v, e) in rows {
        t.push(vec![name.into(), v.into(), e.into()]);
    }
    t.push(vec![
        "far_field".into(),
        Cell::Bool(m.far_field),
        Cell::Missing,
    ]);
    t.push(vec![
        "normalization_ok".into(),
        Cell::Bool(m.normalization_ok),
        Cell::Missing,
    ]);
    Ok(t)
}

pub fn draws_table(toas: &[f64]) -> Table {
    let mut t = Table::new(["index", "toa_s"]);
    for (i, &v) in toas.iter().enumerate() {
        t.push(vec![i.into(), v.into()]);
    }
    t
}

pub fn sample_summary_table(stats: &SampleStats, quadrature_mean: f64, seed: u64) -> Table {
    let mut t = Table::new(["quantity", "value"]);
    t.push(vec!["seed".into(), seed.into()]);
    t.push(vec!["n".into(), stats.n.into()]);
    t.push(vec!["mean_s".into(), stats.mean.into()]);
    t.push(vec!["std_s".into(), stats.std.into()]);
    t.push(vec!["stderr_mean_s".into(), stats.stderr_mean.into()]);
    t.push(vec!["ks_statistic".into(), stats.ks_statistic.into()]);
    t.push(vec![
        "ks_critical_1pct".into(),
        crate::sampling::ks_critical_1pct(stats.n).into(),
    ]);
    t.push(vec!["failure_rate".into(), stats.failure_rate.into()]);
    t.push(vec!["quadrature_mean_s".into(), quadrature_mean.into()]);
    t
}

pub fn sample_stats(
    params: &PhysicalParams,
    x: f64,
    integration: &IntegrationConfig,
    toas: &crate::sampling::SampleBatch,
) -> Result<(SampleStats, f64)> {
    let density = ToaDensity::new(GaussianTrajectory::new(*params), x)?;
    let stats = estimate_stats(toas, &density, integration)?;
    let mean = density.compute_moments(integration)?.mean;
    Ok((stats, mean))
}

/// Scenario file: every key is optional; missing keys fall back to the
/// hydrogen-1 drop from 0.1 m.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mass_kg: Option<f64>,
    pub sigma0_m: Option<f64>,
    pub v0_mps: Option<f64>,
    pub g_mps2: Option<f64>,
    pub x_m: Option<f64>,
    #[serde(rename = "hbar_Js")]
    pub hbar_js: Option<f64>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Values from `overrides` win over values from `self`.
    pub fn merged(&self, overrides: &ScenarioFile) -> ScenarioFile {
        ScenarioFile {
            mass_kg: overrides.mass_kg.or(self.mass_kg),
            sigma0_m: overrides.sigma0_m.or(self.sigma0_m),
            v0_mps: overrides.v0_mps.or(self.v0_mps),
            g_mps2: overrides.g_mps2.or(self.g_mps2),
            x_m: overrides.x_m.or(self.x_m),
            hbar_js: overrides.hbar_js.or(self.hbar_js),
        }
    }

    pub fn resolve(&self) -> Result<(PhysicalParams, f64)> {
        let params = PhysicalParams::with_hbar(
            self.mass_kg.unwrap_or(HYDROGEN_1_MASS),
            self.sigma0_m.unwrap_or(TABLE_SIGMA0),
            self.v0_mps.unwrap_or(0.0),
            self.g_mps2.unwrap_or(EARTH_G),
            self.hbar_js.unwrap_or(HBAR_CODATA),
        )?;
        let x = self.x_m.unwrap_or(0.1);
        params.check_detector(x)?;
        Ok((params, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_needs_a_method() {
        let p = PhysicalParams::new(HYDROGEN_1_MASS, 1e-7, 0.0, 9.81).unwrap();
        assert!(ScenarioSpec::new("x", p, 0.1, &[]).is_err());
        let s = ScenarioSpec::new("x", p, 0.1, &[Method::Quantum, Method::Semiclassical]).unwrap();
        assert_eq!(s.primary_method(), Method::Semiclassical);
    }

    #[test]
    fn delta_t_is_delta_times_tc() {
        let opts = RunOptions::default();
        for row in table1(&opts).unwrap() {
            assert_eq!(row.primary_method, Method::Quadrature);
            assert!((row.delta_t - row.delta * row.t_c).abs() <= 1e-12 * row.delta_t.abs());
            assert!(row.delta > 0.0);
            assert!(row.converged);
        }
    }

    #[test]
    fn monte_carlo_methods_fill_their_columns() {
        let p = PhysicalParams::new(HYDROGEN_1_MASS, 1e-7, 0.0, 9.81).unwrap();
        let s = ScenarioSpec::new("mc", p, 0.1, &[Method::McExact, Method::McLongtof]).unwrap();
        let opts = RunOptions {
            sampler: SamplerConfig::new(1, 20_000),
            ..RunOptions::default()
        };
        let row = evaluate_scenario(&s, &opts).unwrap();
        assert_eq!(row.primary_method, Method::McExact);
        let (a, b) = (row.delta_mc_exact.unwrap(), row.delta_mc_longtof.unwrap());
        assert!((a - b).abs() < 1e-3 * a.abs().max(1e-3));
        assert_eq!(row.mc_failure_rate, Some(0.0));
        assert_eq!(row.delta, a);
    }

    #[test]
    fn sweep_is_ordered_and_validated() {
        let cfg = Fig1Config {
            points: 5,
            ..Fig1Config::default()
        };
        let pts = fig1_sweep(&cfg, &IntegrationConfig::default(), Execution::Parallel).unwrap();
        assert_eq!(pts.len(), 5);
        assert!(pts.windows(2).all(|w| w[0].q < w[1].q));
        assert!((pts[0].q - 1e-3).abs() < 1e-12);
        assert!((pts[4].q - 1e3).abs() < 1e-9);
        let seq = fig1_sweep(&cfg, &IntegrationConfig::default(), Execution::Sequential).unwrap();
        assert_eq!(pts, seq);
        let bad = Fig1Config { points: 1, ..cfg };
        assert!(fig1_sweep(&bad, &IntegrationConfig::default(), Execution::Sequential).is_err());
        let svg = fig1_svg(&pts);
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }

    #[test]
    fn pdf_grid_endpoints() {
        let p = PhysicalParams::new(HYDROGEN_1_MASS, 1e-7, 0.0, 9.81).unwrap();
        let grid = tabulate_pdf(&p, 0.1, 0.0, 0.3, 31).unwrap();
        assert_eq!(grid[0], (0.0, pdf_freefall(&p, 0.1, 0.0).unwrap()));
        assert_eq!(grid[30].0, 0.3);
        assert!(tabulate_pdf(&p, 0.1, 0.3, 0.1, 3).is_err());
    }

    #[test]
    fn scenario_file_merging() {
        let file =
            ScenarioFile::from_json(r#"{"mass_kg": 2.0, "x_m": 0.5, "hbar_Js": 1.0}"#).unwrap();
        let flags = ScenarioFile {
            x_m: Some(0.25),
            ..ScenarioFile::default()
        };
        let (p, x) = file.merged(&flags).resolve().unwrap();
        assert_eq!(p.mass(), 2.0);
        assert_eq!(p.hbar(), 1.0);
        assert_eq!(p.sigma0(), TABLE_SIGMA0);
        assert_eq!(x, 0.25);
        assert!(ScenarioFile::from_json(r#"{"massKg": 1}"#).is_err());
        let bad = ScenarioFile {
            v0_mps: Some(-1.0),
            ..ScenarioFile::default()
        };
        assert!(bad.resolve().is_err());
    }
}
