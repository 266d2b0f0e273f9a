//! Arrival-time statistics of a freely falling Gaussian wave packet.
//!
//! The packet starts at rest or moving downward with width `σ`, and the
//! arrival time at a detector a distance `x` below is the time at which a
//! fixed quantile of the packet crosses the detector. The crate provides
//! the quadrature of the resulting density, Monte Carlo sampling of the
//! arrival time, and the semiclassical and quantum-regime closed forms.

pub mod asymptotics;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod sampling;
pub mod trajectory;

pub use distribution::{pdf_freefall, ToaDensity, ToaMoments};
pub use error::{Result, ToaError};
pub use params::{classical_toa, classify_regime, quantumness, PhysicalParams, Regime};
pub use quadrature::{IntegrationConfig, IntegrationResult};
pub use sampling::{Execution, SampleBatch, SamplerConfig};
pub use trajectory::{FreeMotion, GaussianTrajectory, Trajectory};
