//! Bracketed scalar root finding.

use super::{Result, SpecFunError};

/// Root of a continuous function on a bracketing interval.
///
/// Brent-style: bisection guarantees progress, with secant/inverse-quadratic
/// acceleration where it is safe. Stops when the bracket width falls below
/// `tol` or the function value hits zero exactly.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SpecFunError::NoBracket {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    // keep |f(b)| <= |f(a)|
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut bisected = true;
    let mut d = 0.0;
    for _ in 0..200 {
        if (b - a).abs() < tol || fb == 0.0 {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let mid = 0.5 * (a + b);
        let cond = !(s > b.min(mid) && s < b.max(mid))
            || (bisected && (s - b).abs() >= 0.5 * (b - c).abs())
            || (!bisected && (s - b).abs() >= 0.5 * (c - d).abs())
            || (bisected && (b - c).abs() < tol)
            || (!bisected && (c - d).abs() < tol);
        if cond {
            s = mid;
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() == fs.signum() {
            a = s;
            fa = fs;
        } else {
            b = s;
            fb = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::normal_cdf;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_and_cubic() {
        assert_abs_diff_eq!(
            find_root(|x| x - 2.0, 0.0, 5.0, 1e-12).unwrap(),
            2.0,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            find_root(|x| x * x * x - 8.0, 0.0, 5.0, 1e-12).unwrap(),
            2.0,
            epsilon = 1e-11
        );
    }

    #[test]
    fn normal_quantile_via_root() {
        let z = find_root(|x| normal_cdf(x) - 0.975, -8.0, 8.0, 1e-12).unwrap();
        assert_abs_diff_eq!(z, 1.959964, epsilon = 1e-6);
    }

    #[test]
    fn non_bracketing_is_an_error() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(SpecFunError::NoBracket { .. })
        ));
    }

    #[test]
    fn endpoint_roots() {
        assert_eq!(find_root(|x| x, 0.0, 1.0, 1e-12).unwrap(), 0.0);
        assert_eq!(find_root(|x| x - 1.0, 0.0, 1.0, 1e-12).unwrap(), 1.0);
    }
}
