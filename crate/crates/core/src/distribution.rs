//! Arrival-time density of a Gaussian state at a fixed detector, and the
//! quantities obtained from it by quadrature.
//!
//! For a state `X_t = center(t) + ξ·width(t)` with `ξ ~ N(0, 1)`, the
//! arrival time at `x` is the `t` solving `ξ = (x − center(t)) / width(t)`,
//! and its density is
//!
//! ```text
//! Π_x(t) = |v(t)·w(t) + (x − c(t))·w'(t)| / w(t)² · φ((x − c(t)) / w(t))
//! ```
//!
//! Moments are integrated over `t ≥ 0` only. The normalization is reported
//! alongside instead of being divided out, so near-field losses stay visible.

use serde::{Deserialize, Serialize};

use crate::error::{require, Result, ToaError};
use crate::params::PhysicalParams;
use crate::quadrature::{
    integrate_full_line, integrate_semi_infinite_with_breakpoints, integrate_with_breakpoints,
    IntegrationConfig, IntegrationResult,
};
use crate::roots::{brent, first_crossing_of, Crossing, CrossingSearch};
use crate::trajectory::{GaussianTrajectory, Trajectory};

/// Detectors closer than this many initial widths are flagged as near field.
pub const FAR_FIELD_WIDTHS: f64 = 5.0;

/// Accepted deviation of the `[0, ∞)` normalization from 1 in the far field.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Slack allowed above 1 when clamping CDF values.
const CDF_CEILING: f64 = 1.0 + 1e-9;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_9;

/// Latent-variable values whose arrival times seed the quadrature grid.
const XI_GRID: [f64; 21] = [
    0.0, 0.01, 0.03, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0,
    10.0, 11.0, 12.0,
];

/// Closed-form free-fall density, evaluated without the absolute value.
///
/// Agrees with [`ToaDensity::pdf_general`] for `v0, g, x, t ≥ 0`. For
/// `t < 0` the prefactor can be negative, which is what makes signed
/// whole-line integrals of this expression meaningful as diagnostics.
pub fn pdf_freefall(params: &PhysicalParams, x: f64, t: f64) -> Result<f64> {
    let tau = params.tau();
    let (v0, g, sigma) = (params.v0(), params.g(), params.sigma0());
    let a = t / tau;
    let spread = a.hypot(1.0);
    let prefactor = (v0 + g * t + (x + 0.5 * g * t * t) * a / tau) / (spread * spread);
    let width = sigma * spread;
    let z = (x - (v0 * t + 0.5 * g * t * t)) / width;
    let gaussian = (-0.5 * z * z).exp() * INV_SQRT_2PI / width;
    let value = prefactor * gaussian;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ToaError::NonFiniteEvaluation { at: t })
    }
}

/// Signed integral of [`pdf_freefall`] over the whole real line.
pub fn freefall_full_line_integral(
    params: &PhysicalParams,
    x: f64,
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult> {
    let density = ToaDensity::new(GaussianTrajectory::new(*params), x)?;
    let cfg = density.config(cfg);
    let breaks = density.full_line_breakpoints();
    integrate_full_line(
        |t| pdf_freefall(params, x, t).unwrap_or(f64::NAN),
        0.0,
        &breaks,
        &cfg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToaMoments {
    /// `∫ t Π dt` over `t ≥ 0`.
    pub mean: f64,
    /// Standard deviation of the density renormalized on `t ≥ 0`.
    pub std: f64,
    /// Relative excess of the mean over the classical arrival time.
    pub delta: f64,
    pub normalization: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub delta_error: f64,
    pub normalization_error: f64,
    /// Detector at least [`FAR_FIELD_WIDTHS`] initial widths away.
    pub far_field: bool,
    /// Normalization within [`NORMALIZATION_TOLERANCE`] of 1.
    pub normalization_ok: bool,
}

/// Arrival-time density of `trajectory` at the detector position `x`.
#[derive(Debug, Clone)]
pub struct ToaDensity<T: Trajectory = GaussianTrajectory> {
    trajectory: T,
    x: f64,
    t_c: f64,
    breakpoints: Vec<f64>,
}

impl<T: Trajectory> ToaDensity<T> {
    pub fn new(trajectory: T, x: f64) -> Result<Self> {
        require(
            x.is_finite() && x > 0.0,
            "x",
            x,
            "detector position must be finite and > 0",
        )?;
        let t_c = trajectory.classical_arrival(x)?;
        let search = CrossingSearch {
            start: 2.0 * t_c,
            abs_tol: 0.0,
            max_expansions: 64,
            max_iter: 200,
        };
        let mut breakpoints: Vec<f64> = XI_GRID
            .iter()
            .flat_map(|&xi| [xi, -xi])
            .filter_map(|xi| match first_crossing_of(&trajectory, x, xi, &search) {
                Crossing::At(t) if t > 0.0 => Some(t),
                _ => None,
            })
            .collect();
        breakpoints.push(t_c);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Self {
            trajectory,
            x,
            t_c,
            breakpoints,
        })
    }

    pub fn trajectory(&self) -> &T {
        &self.trajectory
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn params(&self) -> &PhysicalParams {
        self.trajectory.params()
    }

    pub fn classical_time(&self) -> f64 {
        self.t_c
    }

    pub fn is_far_field(&self) -> bool {
        self.x >= FAR_FIELD_WIDTHS * self.params().sigma0()
    }

    /// Arrival times of a fixed set of latent quantiles, used to seed the
    /// adaptive quadrature.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn density(&self, t: f64) -> f64 {
        let tr = &self.trajectory;
        let w = tr.width(t);
        let offset = self.x - tr.center(t);
        let prefactor = (tr.velocity(t) * w + offset * tr.width_rate(t)).abs() / (w * w);
        let z = offset / w;
        prefactor * (-0.5 * z * z).exp() * INV_SQRT_2PI
    }

    pub fn pdf_general(&self, t: f64) -> Result<f64> {
        let v = self.density(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ToaError::NonFiniteEvaluation { at: t })
        }
    }

    fn config(&self, cfg: &IntegrationConfig) -> IntegrationConfig {
        IntegrationConfig {
            scale: Some(cfg.scale.unwrap_or(self.t_c)),
            ..*cfg
        }
    }

    fn integrate_positive<F: Fn(f64) -> f64>(
        &self,
        weight: F,
        cfg: &IntegrationConfig,
    ) -> Result<IntegrationResult> {
        integrate_semi_infinite_with_breakpoints(
            |t| weight(t) * self.density(t),
            0.0,
            &self.breakpoints,
            &self.config(cfg),
        )?
        .require_converged()
    }

    /// `∫₀^∞ Π_x(t) dt`.
    pub fn normalization(&self, cfg: &IntegrationConfig) -> Result<IntegrationResult> {
        self.integrate_positive(|_| 1.0, cfg)
    }

    /// `∫ |Π_x(t)| dt` over the whole real line.
    pub fn full_line_mass(&self, cfg: &IntegrationConfig) -> Result<IntegrationResult> {
        let breaks = self.full_line_breakpoints();
        let r = integrate_full_line(|t| self.density(t), 0.0, &breaks, &self.config(cfg))?;
        r.require_converged()
    }

    /// Forward breakpoints, their negatives, and the times before the
    /// turning point at which the latent quantiles sit on the detector. The
    /// packet is much wider there than near `t_c`, so the latter are not a
    /// reflection of the forward ones.
    fn full_line_breakpoints(&self) -> Vec<f64> {
        let mut breaks = self.breakpoints.clone();
        breaks.extend(self.breakpoints.iter().map(|t| -t));
        let p = self.params();
        let tr = &self.trajectory;
        let turn = if p.g() > 0.0 {
            -p.v0() / p.g()
        } else {
            f64::NAN
        };
        if turn.is_finite() && tr.velocity(turn).abs() <= 1e-12 * (p.v0() + 1.0) {
            let x = self.x;
            let scale = 2.0 * (p.arrival_speed_sq(x).sqrt() / p.g()).max(p.tau());
            let hi = turn.min(0.0);
            for xi in XI_GRID.iter().flat_map(|&xi| [xi, -xi]) {
                let h = |t: f64| x - tr.center(t) - xi * tr.width(t);
                if h(hi) <= 0.0 {
                    continue;
                }
                let mut lo = hi - scale;
                for _ in 0..64 {
                    if h(lo) < 0.0 {
                        breaks.extend(brent(h, lo, hi, 0.0, 200));
                        break;
                    }
                    lo = hi - 2.0 * (hi - lo);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    /// Raw moment `∫₀^∞ tⁿ Π_x(t) dt`.
    pub fn moment(&self, n: u32, cfg: &IntegrationConfig) -> Result<IntegrationResult> {
        require(n >= 1, "n", n as f64, "moment order must be >= 1")?;
        self.integrate_positive(|t| t.powi(n as i32), cfg)
    }

    pub fn compute_moments(&self, cfg: &IntegrationConfig) -> Result<ToaMoments> {
        let t_c = self.t_c;
        // Moments about t_c keep the small delay out of a cancellation.
        let norm = self.normalization(cfg)?;
        let c1 = self.integrate_positive(|t| t - t_c, cfg)?;
        let c2 = self.integrate_positive(|t| (t - t_c) * (t - t_c), cfg)?;

        let mean = t_c * norm.value + c1.value;
        let mean_error = t_c * norm.error_estimate + c1.error_estimate;
        let delta = (norm.value - 1.0) + c1.value / t_c;
        let delta_error = norm.error_estimate + c1.error_estimate / t_c;

        let m1 = c1.value / norm.value;
        let variance = (c2.value / norm.value - m1 * m1).max(0.0);
        let std = variance.sqrt();
        let variance_error = c2.error_estimate / norm.value
            + 2.0 * m1.abs() * c1.error_estimate / norm.value
            + (c2.value / norm.value) * norm.error_estimate / norm.value;
        let std_error = if std > 0.0 {
            variance_error / (2.0 * std)
        } else {
            variance_error.sqrt()
        };

        Ok(ToaMoments {
            mean,
            std,
            delta,
            normalization: norm.value,
            mean_error,
            std_error,
            delta_error,
            normalization_error: norm.error_estimate,
            far_field: self.is_far_field(),
            normalization_ok: (norm.value - 1.0).abs() <= NORMALIZATION_TOLERANCE,
        })
    }

    fn integrate_between(
        &self,
        a: f64,
        b: f64,
        cfg: &IntegrationConfig,
    ) -> Result<IntegrationResult> {
        let mut points = vec![a];
        points.extend(self.breakpoints.iter().copied().filter(|&t| t > a && t < b));
        points.push(b);
        integrate_with_breakpoints(|t| self.density(t), &points, cfg)?.require_converged()
    }

    /// `∫₀^t Π_x(s) ds`, clamped to `[0, 1 + 1e-9]`.
    pub fn cdf(&self, t: f64, cfg: &IntegrationConfig) -> Result<f64> {
        require(t.is_finite() && t >= 0.0, "t", t, "must be finite and >= 0")?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let r = self.integrate_between(0.0, t, cfg)?;
        Ok(r.value.clamp(0.0, CDF_CEILING))
    }

    /// CDF at every point of an ascending slice, accumulated piecewise.
    pub fn cdf_sorted(&self, ts: &[f64], cfg: &IntegrationConfig) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ts.len());
        let mut previous = 0.0;
        let mut acc = 0.0;
        for &t in ts {
            require(
                t.is_finite() && t >= previous,
                "t",
                t,
                "points must be ascending and >= 0",
            )?;
            if t > previous {
                acc += self.integrate_between(previous, t, cfg)?.value;
                previous = t;
            }
            out.push(acc.clamp(0.0, CDF_CEILING));
        }
        Ok(out)
    }
}
