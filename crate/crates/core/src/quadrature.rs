//! Globally adaptive Gauss–Kronrod (10/21) integration.
//!
//! Finite intervals are bisected where the embedded Gauss/Kronrod error
//! estimate is largest until the summed estimate meets the tolerance.
//! `[a, ∞)` is mapped onto `[0, 1)` with `t = a + s·u/(1−u)`; the mapped
//! integrand is handled by the same finite-interval driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{require, Result, ToaError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
    /// Length scale of the `[a, ∞)` map. `None` lets the caller pick one
    /// (the density routines use the classical arrival time); plain
    /// quadrature calls fall back to 1.
    pub scale: Option<f64>,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_evaluations: 1_000_000,
            scale: None,
        }
    }
}

impl IntegrationConfig {
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn validate(&self) -> Result<()> {
        require(self.abs_tol > 0.0, "abs_tol", self.abs_tol, "must be > 0")?;
        require(self.rel_tol > 0.0, "rel_tol", self.rel_tol, "must be > 0")?;
        require(
            self.max_evaluations >= 100,
            "max_evaluations",
            self.max_evaluations as f64,
            "must be >= 100",
        )?;
        if let Some(s) = self.scale {
            require(
                s.is_finite() && s > 0.0,
                "scale",
                s,
                "must be finite and > 0",
            )?;
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegrationResult {
    /// Turns an unconverged result into [`ToaError::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(ToaError::NotConverged {
                value: self.value,
                error_estimate: self.error_estimate,
            })
        }
    }

    /// Sum of independent pieces; converged only if every piece is.
    pub fn combine(parts: &[IntegrationResult]) -> Self {
        parts.iter().fold(
            IntegrationResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 0,
                converged: true,
            },
            |acc, p| IntegrationResult {
                value: acc.value + p.value,
                error_estimate: acc.error_estimate + p.error_estimate,
                evaluations: acc.evaluations + p.evaluations,
                converged: acc.converged && p.converged,
            },
        )
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
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

const RULE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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

/// QUADPACK's rescaling of the raw |K − G| difference.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = raw.abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod21<F, M>(f: &F, to_t: &M, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> f64,
    M: Fn(f64) -> f64,
{
    let eval = |u: f64| -> Result<f64> {
        let v = f(u);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ToaError::NonFiniteEvaluation { at: to_t(u) })
        }
    };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut lo = [0.0; 10];
    let mut hi = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        lo[j] = f1;
        hi[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((lo[j] - mean).abs() + (hi[j] - mean).abs());
    }
    let width = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * width, res_asc * width),
    })
}

fn splittable(s: &Segment) -> bool {
    let mid = 0.5 * (s.a + s.b);
    mid > s.a && mid < s.b && (s.b - s.a) > 8.0 * f64::EPSILON * s.a.abs().max(s.b.abs())
}

fn adaptive<F, M>(
    f: F,
    to_t: M,
    points: &[f64],
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
    M: Fn(f64) -> f64,
{
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    let mut evaluations = 0;
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let s = kronrod21(&f, &to_t, w[0], w[1])?;
            evaluations += RULE_POINTS;
            value += s.value;
            error += s.error;
            heap.push(s);
        }
    }

    let mut converged = error <= cfg.tolerance(value);
    while !converged {
        if evaluations + 2 * RULE_POINTS > cfg.max_evaluations {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if !splittable(&worst) {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod21(&f, &to_t, worst.a, mid)?;
        let right = kronrod21(&f, &to_t, mid, worst.b)?;
        evaluations += 2 * RULE_POINTS;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        converged = error <= cfg.tolerance(value);
    }

    // Re-sum to drop the drift of the running totals.
    let (value, error) = heap
        .iter()
        .chain(frozen.iter())
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(IntegrationResult {
        value,
        error_estimate: error,
        evaluations,
        converged: error <= cfg.tolerance(value),
    })
}

fn check_points(points: &[f64]) -> Result<()> {
    require(
        points.len() >= 2,
        "points",
        points.len() as f64,
        "need at least two points",
    )?;
    for &p in points {
        require(p.is_finite(), "points", p, "breakpoints must be finite")?;
    }
    for w in points.windows(2) {
        require(
            w[1] > w[0],
            "points",
            w[1],
            "breakpoints must be strictly increasing",
        )?;
    }
    Ok(())
}

pub fn integrate_finite<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breakpoints(f, &[a, b], cfg)
}

/// Integrates over `[points[0], points[last]]`, starting the bisection from
/// the given subintervals.
pub fn integrate_with_breakpoints<F>(
    f: F,
    points: &[f64],
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    check_points(points)?;
    adaptive(f, |t| t, points, cfg)
}

pub fn integrate_semi_infinite<F>(
    f: F,
    a: f64,
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    integrate_semi_infinite_with_breakpoints(f, a, &[], cfg)
}

/// Integrates over `[a, ∞)`. Interior breakpoints (> `a`) are carried
/// through the rational map so the bisection starts from them.
pub fn integrate_semi_infinite_with_breakpoints<F>(
    f: F,
    a: f64,
    breakpoints: &[f64],
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    require(a.is_finite(), "a", a, "lower limit must be finite")?;
    cfg.validate()?;
    let scale = cfg.scale.unwrap_or(1.0);
    let to_t = move |u: f64| a + scale * u / (1.0 - u);
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        f(to_t(u)) * scale / (one_minus * one_minus)
    };
    let mut points = vec![0.0];
    for &t in breakpoints {
        require(
            t.is_finite(),
            "breakpoints",
            t,
            "breakpoints must be finite",
        )?;
        if t > a {
            points.push((t - a) / (t - a + scale));
        }
    }
    points.push(1.0);
    points.sort_by(f64::total_cmp);
    points.dedup();
    adaptive(mapped, to_t, &points, cfg)
}

/// Integrates over the whole real line as `(-∞, split] ∪ [split, ∞)`.
pub fn integrate_full_line<F>(
    f: F,
    split: f64,
    breakpoints: &[f64],
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    let mirrored: Vec<f64> = breakpoints.iter().map(|t| -t).collect();
    let left = integrate_semi_infinite_with_breakpoints(|s| f(-s), -split, &mirrored, cfg)
        .map_err(|e| match e {
            ToaError::NonFiniteEvaluation { at } => ToaError::NonFiniteEvaluation { at: -at },
            other => other,
        })?;
    let right = integrate_semi_infinite_with_breakpoints(&f, split, breakpoints, cfg)?;
    let mut total = IntegrationResult::combine(&[left, right]);
    total.converged = total.error_estimate <= cfg.tolerance(total.value);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::erf::erf;
    use std::f64::consts::PI;

    fn cfg() -> IntegrationConfig {
        IntegrationConfig::default()
    }

    fn gauss(t: f64) -> f64 {
        (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn constant() {
        let r = integrate_finite(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_normalization() {
        let r = integrate_finite(gauss, -8.0, 8.0, &cfg()).unwrap();
        // mass beyond |t| = 8 is erfc(8/sqrt2) = 1.2e-15
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn gamma_two() {
        let r = integrate_finite(|t| t * (-t).exp(), 0.0, 50.0, &cfg()).unwrap();
        // exact: 1 - 51 e^-50
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_semi_infinite(|t| (-t).exp(), 0.0, &cfg().with_scale(1.0)).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_rayleigh() {
        let r = integrate_semi_infinite(|t| 2.0 * t * (-t * t).exp(), 0.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_far_gaussian() {
        let r = integrate_semi_infinite(|t| gauss(t - 10.0), 0.0, &cfg().with_scale(10.0)).unwrap();
        let exact = 0.5 * (1.0 + erf(10.0 / 2f64.sqrt()));
        assert!((exact - 1.0).abs() < 1e-20);
        assert!((r.value - exact).abs() < 1e-9);
    }

    #[test]
    fn full_line_gaussian() {
        let r = integrate_full_line(|t| gauss(t - 3.0), 0.0, &[3.0], &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_help_with_narrow_peaks() {
        let w = 1e-6;
        let narrow = |t: f64| gauss((t - 0.37) / w) / w;
        let r = integrate_semi_infinite_with_breakpoints(
            narrow,
            0.0,
            &[0.37 - 20.0 * w, 0.37, 0.37 + 20.0 * w],
            &cfg(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_is_reported() {
        let err = integrate_finite(|t| 1.0 / (t - 0.5), 0.0, 1.0, &cfg());
        // the centre node hits the pole exactly
        assert!(matches!(err, Err(ToaError::NonFiniteEvaluation { .. })));
        let err = integrate_finite(|_| f64::NAN, 0.0, 1.0, &cfg());
        assert!(matches!(err, Err(ToaError::NonFiniteEvaluation { .. })));
    }

    #[test]
    fn budget_exhaustion_flags_not_converged() {
        let small = IntegrationConfig {
            max_evaluations: 100,
            ..cfg()
        };
        let r = integrate_finite(|t| t.abs().sqrt(), -1.0, 1.0, &small).unwrap();
        assert!(!r.converged);
        assert!(r.evaluations <= 100);
        assert!(matches!(
            r.require_converged(),
            Err(ToaError::NotConverged { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate_finite(|t| t, 1.0, 0.0, &cfg()).is_err());
        let bad = IntegrationConfig {
            rel_tol: 0.0,
            ..cfg()
        };
        assert!(integrate_finite(|t| t, 0.0, 1.0, &bad).is_err());
        let bad = IntegrationConfig {
            max_evaluations: 10,
            ..cfg()
        };
        assert!(integrate_finite(|t| t, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn converged_meets_tolerance() {
        let c = cfg();
        for r in [
            integrate_finite(|t| t.sin().powi(2), 0.0, 30.0, &c).unwrap(),
            integrate_semi_infinite(|t| 1.0 / (1.0 + t * t), 0.0, &c).unwrap(),
        ] {
            assert!(r.converged);
            assert!(r.error_estimate <= c.abs_tol.max(c.rel_tol * r.value.abs()));
        }
    }

    proptest! {
        #[test]
        fn linearity(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, w in 0.5f64..3.0) {
            let c = cfg();
            let f = |t: f64| (w * t).cos();
            let g = |t: f64| (-t * t).exp();
            let rf = integrate_finite(f, -2.0, 3.0, &c).unwrap();
            let rg = integrate_finite(g, -2.0, 3.0, &c).unwrap();
            let rc = integrate_finite(|t| alpha * f(t) + beta * g(t), -2.0, 3.0, &c).unwrap();
            let lhs = rc.value;
            let rhs = alpha * rf.value + beta * rg.value;
            let bound = rc.error_estimate + alpha.abs() * rf.error_estimate
                + beta.abs() * rg.error_estimate + 1e-15;
            prop_assert!((lhs - rhs).abs() <= bound, "{lhs} vs {rhs}, bound {bound}");
        }

        #[test]
        fn domain_split(c_frac in 0.05f64..0.95, k in 0.5f64..4.0) {
            let cf = cfg();
            let f = |t: f64| (k * t).sin() * (-0.1 * t).exp() + 1.0;
            let (a, b) = (0.0, 10.0);
            let c = a + c_frac * (b - a);
            let whole = integrate_finite(f, a, b, &cf).unwrap();
            let l = integrate_finite(f, a, c, &cf).unwrap();
            let r = integrate_finite(f, c, b, &cf).unwrap();
            let bound = 2.0 * (whole.error_estimate + l.error_estimate + r.error_estimate);
            prop_assert!((l.value + r.value - whole.value).abs() <= bound.max(1e-14));
        }

        #[test]
        fn scale_invariance(frac in 0.3f64..3.0, mu in 1.0f64..20.0) {
            // the scale has to be within an order of magnitude of the feature,
            // otherwise the first rule can miss the peak altogether
            let cf = cfg();
            let s = frac * mu;
            let f = |t: f64| gauss(t - mu);
            let r1 = integrate_semi_infinite(f, 0.0, &cf.with_scale(s)).unwrap();
            let r2 = integrate_semi_infinite(f, 0.0, &cf.with_scale(3.0 * s)).unwrap();
            prop_assert!(r1.converged && r2.converged);
            prop_assert!((r1.value - r2.value).abs() < 10.0 * cf.rel_tol * r1.value.abs());
        }
    }
}
