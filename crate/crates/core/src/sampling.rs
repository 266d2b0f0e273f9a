//! Seeded Monte Carlo draws of the arrival time.
//!
//! Each draw takes a standard normal `ξ` and solves
//! `x = v0·t + g·t²/2 + ξ·σ·sqrt(1 + t²/τ²)` for its smallest positive
//! root. Draws without a positive root are counted, not redrawn.
//!
//! The latent stream is split into fixed-size chunks; chunk `k` is drawn
//! from ChaCha8 seeded with `seed` on stream `k`. Batches are therefore
//! identical for any number of worker threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::distribution::ToaDensity;
use crate::error::{require, Result, ToaError};
use crate::params::{classical_toa, PhysicalParams};
use crate::quadrature::IntegrationConfig;
use crate::roots::{first_crossing_of, Crossing, CrossingSearch};
use crate::trajectory::{GaussianTrajectory, Trajectory};

/// Draws per substream.
pub const CHUNK_SIZE: usize = 4096;

/// Two-sided 1% critical value of the one-sample KS statistic, `1.63/√n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Chunks run on the rayon pool; sequential without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Absolute root tolerance in seconds; `None` means `t_c · 1e-12`.
    pub root_abs_tol: Option<f64>,
    pub max_bracket_expansions: u32,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self {
            seed,
            n_samples,
            root_abs_tol: None,
            max_bracket_expansions: 64,
        }
    }

    fn validate(&self) -> Result<()> {
        require(
            self.n_samples >= 1,
            "n_samples",
            self.n_samples as f64,
            "must be >= 1",
        )?;
        if let Some(tol) = self.root_abs_tol {
            require(
                tol.is_finite() && tol >= 0.0,
                "root_abs_tol",
                tol,
                "must be finite and >= 0",
            )?;
        }
        Ok(())
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self::new(0, 10_000)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// First positive crossings, in draw order.
    pub toas: Vec<f64>,
    /// Draws with no positive crossing.
    pub failures: usize,
    pub seed: u64,
}

impl SampleBatch {
    pub fn n_draws(&self) -> usize {
        self.toas.len() + self.failures
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.n_draws() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample standard deviation.
    pub std: f64,
    pub stderr_mean: f64,
    /// One-sample Kolmogorov–Smirnov distance to the quadrature CDF.
    pub ks_statistic: f64,
    pub failure_rate: f64,
}

/// Standard normal deviate by inversion of one 53-bit uniform in (0, 1).
pub fn draw_xi<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_len(n: usize, chunk: usize) -> usize {
    CHUNK_SIZE.min(n - chunk * CHUNK_SIZE)
}

fn map_chunks<T, F>(seed: u64, n: usize, exec: Execution, per_draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let run = |chunk: usize| -> Vec<T> {
        let mut rng = chunk_rng(seed, chunk);
        (0..chunk_len(n, chunk))
            .map(|_| per_draw(draw_xi(&mut rng)))
            .collect()
    };
    let chunks: Vec<Vec<T>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n_chunks).into_par_iter().map(run).collect(),
        _ => (0..n_chunks).map(run).collect(),
    };
    chunks.into_iter().flatten().collect()
}

/// The first `n` latent deviates for `seed`, in draw order.
pub fn xi_stream(seed: u64, n: usize, exec: Execution) -> Vec<f64> {
    map_chunks(seed, n, exec, |xi| xi)
}

fn crossing_search(params: &PhysicalParams, x: f64, cfg: &SamplerConfig) -> Result<CrossingSearch> {
    let t_c = classical_toa(params, x)?;
    Ok(CrossingSearch {
        start: 2.0 * t_c,
        abs_tol: cfg.root_abs_tol.unwrap_or(t_c * 1e-12),
        max_expansions: cfg.max_bracket_expansions,
        max_iter: 500,
    })
}

fn solve_crossing(
    traj: &GaussianTrajectory,
    x: f64,
    xi: f64,
    search: &CrossingSearch,
) -> Result<Option<f64>> {
    match first_crossing_of(traj, x, xi, search) {
        Crossing::At(t) if t > 0.0 => Ok(Some(t)),
        Crossing::At(_) | Crossing::Never => Ok(None),
        Crossing::Unbracketed => {
            let p = traj.params();
            // Below x/σ a crossing exists under gravity, or without
            // gravity whenever the drift v0 + ξσ/τ points at the detector.
            let guaranteed = p.g() > 0.0 || p.v0() + xi * p.velocity_spread() > 0.0;
            if guaranteed {
                Err(ToaError::BracketFailure { xi })
            } else {
                Ok(None)
            }
        }
    }
}

/// Smallest `t > 0` at which the realization labelled `xi` reaches `x`,
/// or `None` if it never does.
pub fn first_crossing(
    params: &PhysicalParams,
    x: f64,
    xi: f64,
    cfg: &SamplerConfig,
) -> Result<Option<f64>> {
    let search = crossing_search(params, x, cfg)?;
    solve_crossing(&GaussianTrajectory::new(*params), x, xi, &search)
}

pub fn sample_toa(params: &PhysicalParams, x: f64, cfg: &SamplerConfig) -> Result<SampleBatch> {
    sample_toa_with(params, x, cfg, Execution::default())
}

pub fn sample_toa_with(
    params: &PhysicalParams,
    x: f64,
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<SampleBatch> {
    cfg.validate()?;
    let search = crossing_search(params, x, cfg)?;
    let traj = GaussianTrajectory::new(*params);
    let outcomes = map_chunks(cfg.seed, cfg.n_samples, exec, |xi| {
        solve_crossing(&traj, x, xi, &search)
    });
    let mut toas = Vec::with_capacity(outcomes.len());
    let mut failures = 0;
    for outcome in outcomes {
        match outcome? {
            Some(t) => toas.push(t),
            None => failures += 1,
        }
    }
    Ok(SampleBatch {
        toas,
        failures,
        seed: cfg.seed,
    })
}

/// Arrival time of a classical particle launched from the origin with
/// speed `v0 + spread·xi`; the long time-of-flight limit of the crossing
/// equation.
pub fn longtof_toa(v0: f64, g: f64, x: f64, spread: f64, xi: f64) -> Result<f64> {
    if g <= 0.0 {
        return Err(ToaError::DegenerateKinematics(
            "long time-of-flight map needs g > 0",
        ));
    }
    let w = v0 + spread * xi;
    let root = (w * w + 2.0 * g * x).sqrt();
    // Pick the branch of the quadratic formula without cancellation.
    Ok(if w >= 0.0 {
        2.0 * x / (root + w)
    } else {
        (root - w) / g
    })
}

pub fn sample_toa_longtof(
    params: &PhysicalParams,
    x: f64,
    cfg: &SamplerConfig,
) -> Result<SampleBatch> {
    sample_toa_longtof_with(params, x, cfg, Execution::default())
}

pub fn sample_toa_longtof_with(
    params: &PhysicalParams,
    x: f64,
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<SampleBatch> {
    cfg.validate()?;
    params.check_detector(x)?;
    let (v0, g, spread) = (params.v0(), params.g(), params.velocity_spread());
    longtof_toa(v0, g, x, spread, 0.0)?;
    let toas = map_chunks(cfg.seed, cfg.n_samples, exec, |xi| {
        longtof_toa(v0, g, x, spread, xi).expect("g > 0 checked above")
    });
    Ok(SampleBatch {
        toas,
        failures: 0,
        seed: cfg.seed,
    })
}

/// One-sample KS distance between `sorted` data and CDF values at the data.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let below = f - i as f64 / n;
            let above = (i + 1) as f64 / n - f;
            below.max(above)
        })
        .fold(0.0, f64::max)
}

pub fn estimate_stats<T: Trajectory>(
    batch: &SampleBatch,
    density: &ToaDensity<T>,
    cfg: &IntegrationConfig,
) -> Result<SampleStats> {
    let n = batch.toas.len();
    if n < 2 {
        return Err(ToaError::InsufficientSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = batch.toas.iter().sum::<f64>() / nf;
    let ss: f64 = batch.toas.iter().map(|t| (t - mean) * (t - mean)).sum();
    let std = (ss / (nf - 1.0)).sqrt();

    let mut sorted = batch.toas.clone();
    sorted.sort_by(f64::total_cmp);
    let cdf = density.cdf_sorted(&sorted, cfg)?;

    Ok(SampleStats {
        n,
        mean,
        std,
        stderr_mean: std / nf.sqrt(),
        ks_statistic: ks_statistic(&cdf),
        failure_rate: batch.failure_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::quantumness;

    const M_H: f64 = 1.673_557_5e-27;

    fn hydrogen(g: f64) -> PhysicalParams {
        PhysicalParams::new(M_H, 1e-7, 0.0, g).unwrap()
    }

    #[test]
    fn xi_stream_deterministic_and_order_stable() {
        let a = xi_stream(7, 100, Execution::Sequential);
        let b = xi_stream(7, 100, Execution::Parallel);
        assert_eq!(a, b);
        let long = xi_stream(7, 3 * CHUNK_SIZE + 5, Execution::Parallel);
        assert_eq!(&long[..100], &a[..]);
        assert_ne!(xi_stream(8, 100, Execution::Sequential), a);
        let mut rng = chunk_rng(7, 0);
        assert_eq!(draw_xi(&mut rng), a[0]);
    }

    #[test]
    fn xi_moments() {
        let n = 1_000_000;
        let xs = xi_stream(12345, n, Execution::Parallel);
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        assert!(mean.abs() < 4.0 / nf.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        assert!(xs.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn zero_xi_gives_classical_time() {
        let p = hydrogen(9.81);
        let tc = classical_toa(&p, 0.1).unwrap();
        let t = first_crossing(&p, 0.1, 0.0, &SamplerConfig::default())
            .unwrap()
            .unwrap();
        assert!((t - tc).abs() <= 1e-12 * tc);
    }

    #[test]
    fn start_beyond_detector_never_crosses() {
        let p = PhysicalParams::with_hbar(1.0, 0.1, 0.0, 1e-3, 1.0).unwrap();
        let cfg = SamplerConfig::default();
        assert_eq!(first_crossing(&p, 1.0, 10.0, &cfg).unwrap(), None);
        assert_eq!(first_crossing(&p, 1.0, 10.5, &cfg).unwrap(), None);
        assert!(first_crossing(&p, 1.0, 9.99, &cfg).unwrap().is_some());
    }

    #[test]
    fn free_motion_backward_realizations_fail_quietly() {
        let p = PhysicalParams::with_hbar(1.0, 0.1, 0.5, 0.0, 1.0).unwrap();
        // drift v0 + ξσ/τ < 0: the packet branch never reaches x
        let xi = -2.0 * p.v0() / p.velocity_spread();
        assert_eq!(
            first_crossing(&p, 1.0, xi, &SamplerConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn bracket_failure_when_budget_too_small() {
        let p = hydrogen(9.81);
        let cfg = SamplerConfig {
            max_bracket_expansions: 0,
            ..SamplerConfig::default()
        };
        // ξ = −5 lands beyond 2·t_c
        assert!(matches!(
            first_crossing(&p, 0.01, -5.0, &cfg),
            Err(ToaError::BracketFailure { .. })
        ));
    }

    #[test]
    fn crossing_matches_longtof_for_row1() {
        let p = hydrogen(9.81);
        let cfg = SamplerConfig::default();
        for xi in [-3.0, -1.0, 1.0, 2.0, 3.0] {
            let exact = first_crossing(&p, 0.1, xi, &cfg).unwrap().unwrap();
            let approx = longtof_toa(0.0, 9.81, 0.1, p.velocity_spread(), xi).unwrap();
            assert!((exact - approx).abs() < 1e-3 * exact);
        }
    }

    #[test]
    fn crossing_nonincreasing_in_xi() {
        let p = PhysicalParams::with_hbar(1.0, 0.05, 0.3, 2.0, 0.02).unwrap();
        let cfg = SamplerConfig::default();
        let mut prev = f64::INFINITY;
        for k in -60..40 {
            let xi = 0.1 * k as f64;
            let t = first_crossing(&p, 1.0, xi, &cfg).unwrap().unwrap();
            assert!(t <= prev * (1.0 + 1e-12), "xi = {xi}");
            prev = t;
        }
    }

    #[test]
    fn longtof_map_limits() {
        // no velocity spread: every draw arrives at the classical time
        let tc = (2.0 * 0.1 / 9.81f64).sqrt();
        for xi in [-2.0, 0.0, 3.0] {
            assert!((longtof_toa(0.0, 9.81, 0.1, 0.0, xi).unwrap() - tc).abs() < 1e-15);
        }
        assert!(longtof_toa(1.0, 0.0, 1.0, 0.1, 0.0).is_err());
        let p = hydrogen(9.81);
        let t0 = longtof_toa(p.v0(), p.g(), 0.1, p.velocity_spread(), 0.0).unwrap();
        assert!((t0 - classical_toa(&p, 0.1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn batches_reproducible_and_accounted() {
        let p = PhysicalParams::with_hbar(1.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let cfg = SamplerConfig::new(99, 5000);
        let a = sample_toa(&p, 1.0, &cfg).unwrap();
        let b = sample_toa_with(&p, 1.0, &cfg, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_draws(), 5000);
        // detector 2σ away: about Φ(−2) = 2.3% of draws start past it
        assert!(a.failures > 0);
        assert!((a.failure_rate() - 0.02275).abs() < 0.01);
        assert!(a.toas.iter().all(|&t| t > 0.0));
        assert!(sample_toa(&p, 1.0, &SamplerConfig::new(1, 0)).is_err());
    }

    #[test]
    fn free_particle_far_field_has_no_failures() {
        let p = PhysicalParams::with_hbar(1.0, 0.05, 1.0, 0.0, 1e-3).unwrap();
        let batch = sample_toa(&p, 1.0, &SamplerConfig::new(3, 100_000)).unwrap();
        assert_eq!(batch.failures, 0);
    }

    #[test]
    fn quantum_regime_longtof_delay() {
        let p = hydrogen(1e-5);
        let q = quantumness(&p, 0.1).unwrap();
        let tc = classical_toa(&p, 0.1).unwrap();
        let batch = sample_toa_longtof(&p, 0.1, &SamplerConfig::new(5, 1_000_000)).unwrap();
        let mean = batch.toas.iter().sum::<f64>() / batch.toas.len() as f64;
        let delta = (mean - tc) / tc;
        let predicted = (2.0 / std::f64::consts::PI).sqrt() * q;
        assert!(
            (delta - predicted).abs() < 0.02 * predicted,
            "{delta} vs {predicted}"
        );
    }

    #[test]
    fn stats_of_constant_batch() {
        let p = hydrogen(9.81);
        let d = ToaDensity::new(GaussianTrajectory::new(p), 0.1).unwrap();
        let t = d.classical_time() * 1.1;
        let batch = SampleBatch {
            toas: vec![t; 10],
            failures: 0,
            seed: 0,
        };
        let cfg = IntegrationConfig::default();
        let s = estimate_stats(&batch, &d, &cfg).unwrap();
        assert_eq!(s.std, 0.0);
        let f = d.cdf(t, &cfg).unwrap();
        assert!((s.ks_statistic - f.max(1.0 - f)).abs() < 1e-12);
        let single = SampleBatch {
            toas: vec![t],
            failures: 0,
            seed: 0,
        };
        assert!(matches!(
            estimate_stats(&single, &d, &cfg),
            Err(ToaError::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn stderr_is_std_over_root_n() {
        let p = hydrogen(9.81);
        let d = ToaDensity::new(GaussianTrajectory::new(p), 0.1).unwrap();
        let batch = sample_toa_longtof(&p, 0.1, &SamplerConfig::new(1, 2000)).unwrap();
        let s = estimate_stats(&batch, &d, &IntegrationConfig::default()).unwrap();
        assert!((s.stderr_mean - s.std / 2000f64.sqrt()).abs() <= 1e-15 * s.std);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn identical_across_thread_counts() {
        let p = hydrogen(9.81);
        let cfg = SamplerConfig::new(42, 3 * CHUNK_SIZE + 17);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_toa(&p, 0.1, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(7));
    }
}
