//! Scalar root finding: bracket expansion, bisection, and Brent's method.

use crate::error::{Error, Result};

/// Brent's method on a bracketing interval [a, b] with f(a)·f(b) ≤ 0.
///
/// Converges to |interval| < xtol or |f| < ftol. Panics never; returns an
/// error if the bracket does not actually bracket a root.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..max_iter {
        if fb == 0.0 || (b - a).abs() < xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            // secant
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond1 = !((lo.min(b) < s) && (s < lo.max(b)));
        let cond2 = mflag && (s - b).abs() >= (b - c).abs() / 2.0;
        let cond3 = !mflag && (s - b).abs() >= (c - d).abs() / 2.0;
        let cond4 = mflag && (b - c).abs() < xtol;
        let cond5 = !mflag && (c - d).abs() < xtol;
        if cond1 || cond2 || cond3 || cond4 || cond5 {
            s = (a + b) / 2.0;
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Scan [lo, hi] on a uniform grid for the first sign change of `f`, then
/// polish with Brent. Returns an error when no sign change is found.
pub fn scan_and_solve<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n_scan: usize,
    xtol: f64,
) -> Result<f64> {
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    if f_prev == 0.0 {
        return Ok(lo);
    }
    for i in 1..=n_scan {
        let x = lo + (hi - lo) * (i as f64) / (n_scan as f64);
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if f_prev.is_finite() && fx.is_finite() && f_prev.signum() != fx.signum() {
            return brent(f, x_prev, x, xtol, 200);
        }
        x_prev = x;
        f_prev = fx;
    }
    Err(Error::Bracket(format!(
        "no sign change of objective in [{lo}, {hi}] over {n_scan} samples"
    )))
}

/// Bisection on a boolean predicate: returns the largest x in [lo, hi]
/// where `pred` holds, assuming pred(lo) is true and pred is monotone
/// (true below some threshold, false above). Terminates at `xtol`.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(
    mut pred: F,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
