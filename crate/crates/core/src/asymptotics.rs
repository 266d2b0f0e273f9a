//! Closed-form limits of the arrival time in the long time-of-flight regime.
//!
//! With `t ≫ τ` the crossing equation becomes classical motion with launch
//! speed `v0 + ξσ/τ`. Expanding its root to second order in `σ/τ` gives the
//! semiclassical formulas; for a dropped particle with `q ≫ 1` the root
//! tends to `q·t_c·(|ξ| − ξ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ToaError};
use crate::params::{classical_toa, quantumness, PhysicalParams};

/// E|ξ| for a standard normal ξ.
pub const MEAN_ABS_NORMAL: f64 = 0.797_884_560_802_865_355_879_892_119_868_763_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    SemiClassical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticMoments {
    pub mean: f64,
    pub std: f64,
    pub delta: f64,
    pub regime: AsymptoticRegime,
}

struct Kinematics {
    t_c: f64,
    speed: f64,
    spread: f64,
}

fn kinematics(params: &PhysicalParams, x: f64) -> Result<Kinematics> {
    let t_c = classical_toa(params, x)?;
    let speed_sq = params.arrival_speed_sq(x);
    if speed_sq <= 0.0 {
        return Err(ToaError::DegenerateKinematics("v0^2 + 2 g x vanishes"));
    }
    Ok(Kinematics {
        t_c,
        speed: speed_sq.sqrt(),
        spread: params.velocity_spread(),
    })
}

fn require_dropped(params: &PhysicalParams) -> Result<()> {
    if params.v0() == 0.0 {
        Ok(())
    } else {
        Err(ToaError::InvalidForNonzeroV0 { v0: params.v0() })
    }
}

/// Second-order expansion of the arrival time in `σξ/τ`:
/// `t_c − t_c·(σξ/τ)/v + x·(σξ/τ)²/v³` with `v = sqrt(v0² + 2gx)`.
pub fn toa_semiclassical(params: &PhysicalParams, x: f64, xi: f64) -> Result<f64> {
    let k = kinematics(params, x)?;
    let kick = k.spread * xi;
    Ok(k.t_c - k.t_c * kick / k.speed + x * kick * kick / k.speed.powi(3))
}

/// Leading-order mean and spread from [`toa_semiclassical`].
///
/// The variance keeps only the `E[ξ²]` term; the `ξ²` term's own
/// variance is higher order in `q` and dropped.
pub fn semiclassical_moments(params: &PhysicalParams, x: f64) -> Result<AsymptoticMoments> {
    let k = kinematics(params, x)?;
    let shift = x * k.spread * k.spread / k.speed.powi(3);
    let std = k.t_c * k.spread / k.speed;
    Ok(AsymptoticMoments {
        mean: k.t_c + shift,
        std,
        delta: shift / k.t_c,
        regime: AsymptoticRegime::SemiClassical,
    })
}

/// `q²/2 = ħ²/(16 g x m² σ²)` for a dropped particle.
pub fn delta_semiclassical(params: &PhysicalParams, x: f64) -> Result<f64> {
    require_dropped(params)?;
    let q = quantumness(params, x)?;
    Ok(0.5 * q * q)
}

/// `√(2/π)·q` for a dropped particle.
pub fn delta_quantum(params: &PhysicalParams, x: f64) -> Result<f64> {
    require_dropped(params)?;
    Ok(MEAN_ABS_NORMAL * quantumness(params, x)?)
}

/// Long time-of-flight root rewritten as `q·t_c·(sqrt(ξ² + 1/q²) − ξ)`.
pub fn toa_quantum_regime(params: &PhysicalParams, x: f64, xi: f64) -> Result<f64> {
    require_dropped(params)?;
    let q = quantumness(params, x)?;
    let t_c = classical_toa(params, x)?;
    let eps_sq = 1.0 / (q * q);
    let root = (xi * xi + eps_sq).sqrt();
    let bracket = if xi > 0.0 {
        eps_sq / (root + xi)
    } else {
        root - xi
    };
    Ok(q * t_c * bracket)
}

/// The `q → ∞` form `q·t_c·(|ξ| − ξ)`. Vanishes for every `ξ ≥ 0`; only
/// its average over ξ is meaningful.
pub fn toa_quantum_regime_approx(params: &PhysicalParams, x: f64, xi: f64) -> Result<f64> {
    require_dropped(params)?;
    let q = quantumness(params, x)?;
    let t_c = classical_toa(params, x)?;
    Ok(q * t_c * (xi.abs() - xi))
}

/// Moments of `q·t_c·(|ξ| − ξ)`, with the mean reported as `t_c·(1 + √(2/π)q)`
/// so that `delta` is the quantum-regime estimate.
pub fn quantum_moments(params: &PhysicalParams, x: f64) -> Result<AsymptoticMoments> {
    let delta = delta_quantum(params, x)?;
    let q = quantumness(params, x)?;
    let t_c = classical_toa(params, x)?;
    // E(|ξ| − ξ)² = 2, E(|ξ| − ξ) = √(2/π)
    let std = q * t_c * (2.0 - 2.0 / PI).sqrt();
    Ok(AsymptoticMoments {
        mean: t_c * (1.0 + delta),
        std,
        delta,
        regime: AsymptoticRegime::Quantum,
    })
}
