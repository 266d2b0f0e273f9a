//! Bracketed root finding and the first-crossing search built on it.

use crate::trajectory::Trajectory;

/// Brent's method on a bracket with `f(a)` and `f(b)` of opposite sign.
///
/// Converges when the bracket is narrower than `abs_tol` plus a few ulps
/// of the current iterate. Returns `None` if the bracket is invalid or the
/// iteration budget runs out.
pub fn brent<F>(f: F, mut a: f64, mut b: f64, abs_tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * abs_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    At(f64),
    /// The realization starts at or beyond the detector and moves away.
    Never,
    /// No sign change within the expansion budget.
    Unbracketed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSearch {
    /// First upper end of the bracket.
    pub start: f64,
    pub abs_tol: f64,
    pub max_expansions: u32,
    pub max_iter: usize,
}

/// Smallest `t > 0` with `center(t) + xi·width(t) = x`.
///
/// The upper end of the bracket starts at `search.start` and doubles until
/// the residual turns positive; Brent's method then refines inside the
/// last doubling interval.
pub fn first_crossing_of<T: Trajectory + ?Sized>(
    traj: &T,
    x: f64,
    xi: f64,
    search: &CrossingSearch,
) -> Crossing {
    let residual = |t: f64| traj.center(t) + xi * traj.width(t) - x;
    if residual(0.0) >= 0.0 {
        return Crossing::Never;
    }
    let mut lo = 0.0;
    let mut hi = search.start;
    for _ in 0..=search.max_expansions {
        let r = residual(hi);
        if !r.is_finite() {
            return Crossing::Unbracketed;
        }
        if r >= 0.0 {
            return match brent(residual, lo, hi, search.abs_tol, search.max_iter) {
                Some(t) => Crossing::At(t),
                None => Crossing::Unbracketed,
            };
        }
        lo = hi;
        hi *= 2.0;
    }
    Crossing::Unbracketed
}
