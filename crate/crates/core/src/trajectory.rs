//! Centre and width of a Gaussian position distribution as functions of time.

use crate::error::{Result, ToaError};
use crate::params::{classical_toa, PhysicalParams};

/// A Gaussian state whose position density at time `t` is centred at
/// `center(t)` with standard deviation `width(t)`.
pub trait Trajectory: Send + Sync {
    fn params(&self) -> &PhysicalParams;
    fn center(&self, t: f64) -> f64;
    fn velocity(&self, t: f64) -> f64;
    fn width(&self, t: f64) -> f64;
    /// Exact time derivative of [`Trajectory::width`].
    fn width_rate(&self, t: f64) -> f64;
    /// Time at which the centre reaches `x`.
    fn classical_arrival(&self, x: f64) -> Result<f64>;
}

/// Free fall from the origin under uniform gravity. `g = 0` gives free motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTrajectory {
    params: PhysicalParams,
}

impl GaussianTrajectory {
    pub fn new(params: PhysicalParams) -> Self {
        Self { params }
    }
}

/// σ(t)/σ = sqrt(1 + (t/τ)²), written with `hypot` to stay finite for t ≫ τ.
#[inline]
fn spread_factor(t: f64, tau: f64) -> f64 {
    1.0_f64.hypot(t / tau)
}

#[inline]
fn spread_rate(sigma0: f64, t: f64, tau: f64) -> f64 {
    let r = t / tau;
    sigma0 * r / (tau * spread_factor(t, tau))
}

impl Trajectory for GaussianTrajectory {
    fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn center(&self, t: f64) -> f64 {
        self.params.v0() * t + 0.5 * self.params.g() * t * t
    }

    fn velocity(&self, t: f64) -> f64 {
        self.params.v0() + self.params.g() * t
    }

    fn width(&self, t: f64) -> f64 {
        self.params.sigma0() * spread_factor(t, self.params.tau())
    }

    fn width_rate(&self, t: f64) -> f64 {
        spread_rate(self.params.sigma0(), t, self.params.tau())
    }

    fn classical_arrival(&self, x: f64) -> Result<f64> {
        classical_toa(&self.params, x)
    }
}

/// Force-free motion; `g` in the parameters is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeMotion {
    params: PhysicalParams,
}

impl FreeMotion {
    pub fn new(params: PhysicalParams) -> Self {
        Self { params }
    }
}

impl Trajectory for FreeMotion {
    fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn center(&self, t: f64) -> f64 {
        self.params.v0() * t
    }

    fn velocity(&self, _t: f64) -> f64 {
        self.params.v0()
    }

    fn width(&self, t: f64) -> f64 {
        self.params.sigma0() * spread_factor(t, self.params.tau())
    }

    fn width_rate(&self, t: f64) -> f64 {
        spread_rate(self.params.sigma0(), t, self.params.tau())
    }

    fn classical_arrival(&self, x: f64) -> Result<f64> {
        if self.params.v0() > 0.0 && x > 0.0 {
            Ok(x / self.params.v0())
        } else {
            Err(ToaError::DegenerateKinematics(
                "free motion needs v0 > 0 and x > 0 to arrive",
            ))
        }
    }
}
