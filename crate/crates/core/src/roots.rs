//! Scalar root bracketing for fibering maps.

use crate::error::{Error, Result};

const MAX_EXPANSIONS: usize = 200;

/// Root of a strictly decreasing `f` on `(0, inf)`.
///
/// Brackets from `t = 1` by factors of 4, then bisects until the bracket
/// cannot shrink further in floating point. The final bracket is checked
/// for a sign change and width `<= 1e-12 t`.
pub fn decreasing_root(f: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let f1 = f(1.0);
    if f1 == 0.0 {
        return Ok(1.0);
    }
    if f1 > 0.0 {
        let mut k = 0;
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 4.0;
            k += 1;
            if k > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::Bracket("no sign change above t = 1".into()));
            }
        }
    } else {
        let mut k = 0;
        while f(lo) < 0.0 {
            hi = lo;
            lo /= 4.0;
            k += 1;
            if k > MAX_EXPANSIONS || lo == 0.0 {
                return Err(Error::Bracket("no sign change below t = 1".into()));
            }
        }
    }
    bisect(&f, lo, hi, true)
}

/// Root of `f` nearest to `t0`, searching outward with doubling steps.
/// Used to polish a point that is already almost on a manifold.
pub fn local_root(f: impl Fn(f64) -> f64, t0: f64) -> Result<f64> {
    let f0 = f(t0);
    if f0 == 0.0 {
        return Ok(t0);
    }
    let mut step = 1e-9 * t0;
    while step < 0.5 * t0 {
        for t in [t0 + step, t0 - step] {
            let ft = f(t);
            if ft == 0.0 {
                return Ok(t);
            }
            if ft.signum() != f0.signum() {
                let (lo, hi) = if t < t0 { (t, t0) } else { (t0, t) };
                return bisect(&f, lo, hi, f(lo) > 0.0);
            }
        }
        step *= 2.0;
    }
    Err(Error::Bracket(format!("no root near t = {t0}")))
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, positive_at_lo: bool) -> Result<f64> {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 || hi - lo > 1e-12 * hi {
        return Err(Error::Bracket(format!("final bracket [{lo}, {hi}] lost the sign change")));
    }
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}
