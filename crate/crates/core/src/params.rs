//! Experiment configuration and the classical quantities derived from it.

use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::error::{require, Result, ToaError};

/// Reduced Planck constant, CODATA 2018 (exact since the SI redefinition).
pub const HBAR_CODATA: f64 = 1.054_571_817e-34;

/// Below this quantumness a scenario is labelled semiclassical.
pub const SEMICLASSICAL_Q_MAX: f64 = 0.1;
/// Above this quantumness a scenario is labelled quantum.
pub const QUANTUM_Q_MIN: f64 = 10.0;

/// Mass, initial packet width, mean initial velocity, gravity and ħ (SI).
///
/// The mean initial position is always 0; detector positions are measured
/// from it along the direction of fall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    mass: f64,
    sigma0: f64,
    v0: f64,
    g: f64,
    hbar: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, sigma0: f64, v0: f64, g: f64) -> Result<Self> {
        Self::with_hbar(mass, sigma0, v0, g, HBAR_CODATA)
    }

    pub fn with_hbar(mass: f64, sigma0: f64, v0: f64, g: f64, hbar: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        require(positive(mass), "mass", mass, "must be finite and > 0")?;
        require(positive(sigma0), "sigma0", sigma0, "must be finite and > 0")?;
        require(
            non_negative(v0),
            "v0",
            v0,
            "must be finite and >= 0 (upward launches are not supported)",
        )?;
        require(non_negative(g), "g", g, "must be finite and >= 0")?;
        require(positive(hbar), "hbar", hbar, "must be finite and > 0")?;
        let params = Self {
            mass,
            sigma0,
            v0,
            g,
            hbar,
        };
        let tau = params.tau();
        require(
            tau.is_finite() && tau > 0.0,
            "sigma0",
            sigma0,
            "characteristic time 2 m sigma0^2 / hbar must be finite and > 0",
        )?;
        Ok(params)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Mean initial position; fixed at the origin.
    pub fn x0(&self) -> f64 {
        0.0
    }

    /// Spreading time τ = 2mσ²/ħ.
    pub fn tau(&self) -> f64 {
        2.0 * self.mass * self.sigma0 * self.sigma0 / self.hbar
    }

    /// Velocity spread σ/τ = ħ/(2mσ).
    pub fn velocity_spread(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.sigma0)
    }

    pub fn with_sigma0(&self, sigma0: f64) -> Result<Self> {
        Self::with_hbar(self.mass, sigma0, self.v0, self.g, self.hbar)
    }

    /// Squared classical speed at the detector, v0² + 2gx.
    pub(crate) fn arrival_speed_sq(&self, x: f64) -> f64 {
        self.v0 * self.v0 + 2.0 * self.g * x
    }

    pub(crate) fn check_detector(&self, x: f64) -> Result<()> {
        require(
            x.is_finite() && x > 0.0,
            "x",
            x,
            "detector position must be finite and > 0",
        )
    }
}

pub fn characteristic_time(params: &PhysicalParams) -> f64 {
    params.tau()
}

/// Newtonian arrival time at `x`.
///
/// Evaluated as `2x / (sqrt(v0² + 2gx) + v0)`, which equals
/// `(sqrt(v0² + 2gx) - v0) / g` without the cancellation at small `g`
/// and reduces to `x / v0` at `g = 0`.
pub fn classical_toa(params: &PhysicalParams, x: f64) -> Result<f64> {
    params.check_detector(x)?;
    if params.g == 0.0 && params.v0 == 0.0 {
        return Err(ToaError::DegenerateKinematics(
            "particle at rest with no gravity never arrives",
        ));
    }
    let speed = params.arrival_speed_sq(x).sqrt();
    Ok(2.0 * x / (speed + params.v0))
}

/// Ratio of the local de Broglie wavelength (over 2π) to the packet width.
pub fn quantumness(params: &PhysicalParams, x: f64) -> Result<f64> {
    params.check_detector(x)?;
    let speed_sq = params.arrival_speed_sq(x);
    if speed_sq <= 0.0 {
        return Err(ToaError::DegenerateKinematics("v0^2 + 2 g x vanishes"));
    }
    Ok(params.hbar / (2.0 * params.mass * params.sigma0 * speed_sq.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SemiClassical,
    Transition,
    Quantum,
}

impl Regime {
    pub fn from_quantumness(q: f64) -> Self {
        if q < SEMICLASSICAL_Q_MAX {
            Regime::SemiClassical
        } else if q > QUANTUM_Q_MIN {
            Regime::Quantum
        } else {
            Regime::Transition
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SemiClassical => "semiclassical",
            Regime::Transition => "transition",
            Regime::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub q: f64,
    pub t_c: f64,
    pub regime: Regime,
    /// Relative delay from the semiclassical mean (q²/2 when v0 = 0).
    pub delta_semiclassical: f64,
    /// √(2/π)·q; only defined for a dropped particle.
    pub delta_quantum: Option<f64>,
}

pub fn classify_regime(params: &PhysicalParams, x: f64) -> Result<RegimeReport> {
    let q = quantumness(params, x)?;
    let t_c = classical_toa(params, x)?;
    let delta_semiclassical = asymptotics::semiclassical_moments(params, x)?.delta;
    let delta_quantum = match asymptotics::delta_quantum(params, x) {
        Ok(d) => Some(d),
        Err(ToaError::InvalidForNonzeroV0 { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RegimeReport {
        q,
        t_c,
        regime: Regime::from_quantumness(q),
        delta_semiclassical,
        delta_quantum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const M_H: f64 = 1.673_557_5e-27;

    fn hydrogen(g: f64) -> PhysicalParams {
        PhysicalParams::new(M_H, 1e-7, 0.0, g).unwrap()
    }

    #[test]
    fn tau_hydrogen() {
        // 2 * 1.6735575e-27 * 1e-14 / 1.054571817e-34, evaluated at 30 digits
        let tau = characteristic_time(&hydrogen(9.81));
        assert!((tau - 3.173_909_017_900_485e-7).abs() < 1e-20);
    }

    #[test]
    fn tau_natural_units_and_scaling() {
        let p = PhysicalParams::with_hbar(1.0, 1.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(p.tau(), 1.0);
        let p2 = p.with_sigma0(2.0).unwrap();
        assert_eq!(p2.tau(), 4.0 * p.tau());
    }

    #[test]
    fn rejects_invalid() {
        assert!(PhysicalParams::new(0.0, 1e-7, 0.0, 9.81).is_err());
        assert!(PhysicalParams::new(M_H, -1.0, 0.0, 9.81).is_err());
        assert!(PhysicalParams::new(M_H, 1e-7, -0.1, 9.81).is_err());
        assert!(PhysicalParams::new(M_H, 1e-7, 0.0, -1.0).is_err());
        assert!(PhysicalParams::with_hbar(M_H, 1e-7, 0.0, 9.81, 0.0).is_err());
        assert!(PhysicalParams::new(M_H, 1e-7, f64::NAN, 9.81).is_err());
        let err = PhysicalParams::new(M_H, 1e-7, -1.0, 9.81).unwrap_err();
        assert!(matches!(err, ToaError::InvalidParameter { name: "v0", .. }));
    }

    #[test]
    fn classical_times() {
        let t1 = classical_toa(&hydrogen(9.81), 0.1).unwrap();
        assert!((t1 - 0.143).abs() / 0.143 < 1.5e-2);
        let t3 = classical_toa(&hydrogen(1e-5), 0.1).unwrap();
        assert!((t3 - 141.0).abs() / 141.0 < 1.5e-2);
        let free = PhysicalParams::with_hbar(1.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(classical_toa(&free, 1.0).unwrap(), 0.5);
        let still = PhysicalParams::with_hbar(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            classical_toa(&still, 1.0),
            Err(ToaError::DegenerateKinematics(_))
        ));
        assert!(classical_toa(&hydrogen(9.81), 0.0).is_err());
    }

    #[test]
    fn quantumness_values() {
        let q1 = quantumness(&hydrogen(9.81), 0.1).unwrap();
        assert!((q1 - 0.225).abs() / 0.225 < 1e-2);
        let q3 = quantumness(&hydrogen(1e-5), 0.1).unwrap();
        assert!((q3 - 223.0).abs() / 223.0 < 1e-2);
        // hbar = 2 m sigma sqrt(2 g x) with m = sigma = 1, g = 2, x = 1
        let p = PhysicalParams::with_hbar(1.0, 1.0, 0.0, 2.0, 4.0).unwrap();
        assert_eq!(quantumness(&p, 1.0).unwrap(), 1.0);
        let still = PhysicalParams::with_hbar(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(quantumness(&still, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        let r = classify_regime(&hydrogen(9.81), 0.1).unwrap();
        assert_eq!(r.regime, Regime::Transition);
        let r = classify_regime(&hydrogen(1e-5), 0.1).unwrap();
        assert_eq!(r.regime, Regime::Quantum);
        // q = 0.05 in natural units: hbar / (2 sqrt(2 g x)) with g = 2, x = 1
        let p = PhysicalParams::with_hbar(1.0, 1.0, 0.0, 2.0, 0.2).unwrap();
        let r = classify_regime(&p, 1.0).unwrap();
        assert!((r.q - 0.05).abs() < 1e-15);
        assert_eq!(r.regime, Regime::SemiClassical);
        assert!((r.delta_semiclassical - 1.25e-3).abs() < 1e-15);
        let moving = PhysicalParams::with_hbar(1.0, 1.0, 1.0, 2.0, 0.2).unwrap();
        assert_eq!(classify_regime(&moving, 1.0).unwrap().delta_quantum, None);
    }

    proptest! {
        #[test]
        fn quantumness_decreases_in_mass_sigma_x(
            m in 0.1f64..10.0, s in 0.1f64..10.0, x in 0.1f64..10.0, f in 1.01f64..3.0,
        ) {
            let p = PhysicalParams::with_hbar(m, s, 0.0, 1.0, 1.0).unwrap();
            let q = quantumness(&p, x).unwrap();
            let heavier = PhysicalParams::with_hbar(m * f, s, 0.0, 1.0, 1.0).unwrap();
            prop_assert!(quantumness(&heavier, x).unwrap() < q);
            prop_assert!(quantumness(&p.with_sigma0(s * f).unwrap(), x).unwrap() < q);
            prop_assert!(quantumness(&p, x * f).unwrap() < q);
        }

        #[test]
        fn classical_toa_free_limit(v0 in 0.1f64..10.0, x in 0.1f64..10.0, k in 0.0f64..1.0) {
            let g = k * 1e-12 * v0 * v0 / x;
            let p = PhysicalParams::with_hbar(1.0, 1.0, v0, g, 1.0).unwrap();
            let t = classical_toa(&p, x).unwrap();
            prop_assert!((t - x / v0).abs() < 1e-9 * (x / v0));
        }
    }
}
