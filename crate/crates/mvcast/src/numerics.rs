//! Scalar kernels shared by the allocator and the solvers: the
//! principal-branch Lambert W function and a guarded monotone bisection.

use crate::error::{Error, Result};
use std::f64::consts::E;

/// Principal branch of the Lambert W function, the inverse of `w * exp(w)`
/// restricted to `w >= -1`.
///
/// Halley iteration from a log-based initial guess. Within 1e-6 of the
/// branch point `x = -1/e` the iteration loses its footing (the derivative
/// of `w e^w` vanishes), so the series in `p = sqrt(2(e x + 1))` is used
/// there instead; truncation error is O(p^6) which is below double
/// round-off on that interval.
pub fn lambert_w0(x: f64) -> Result<f64> {
    const MIN_ARG: f64 = -1.0 / E;
    if !(x >= MIN_ARG) {
        // Also rejects NaN.
        return Err(Error::WDomain { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let ex1 = E * x + 1.0;
    if ex1 < E * 1e-6 {
        return Ok(branch_point_series((2.0 * ex1.max(0.0)).sqrt()));
    }

    let mut w = initial_guess(x);
    for _ in 0..60 {
        let ew = w.exp();
        let resid = w * ew - x;
        let wp1 = w + 1.0;
        // Halley step for f(w) = w e^w - x.
        let denom = ew * wp1 - (w + 2.0) * resid / (2.0 * wp1);
        let step = resid / denom;
        w -= step;
        if w < -1.0 {
            w = -1.0 + 1e-12;
        }
        if step.abs() <= 1e-16 * w.abs().max(1e-3) {
            break;
        }
    }

    let resid = w * w.exp() - x;
    if resid.abs() > 1e-8 * x.abs().max(1.0) {
        return Err(Error::Convergence {
            context: "lambert_w0",
            detail: format!("x = {x:e}, last w = {w:e}, residual = {resid:e}"),
        });
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x > E {
        // Asymptotic: W(x) ~ ln x - ln ln x.
        let l = x.ln();
        l - l.ln()
    } else if x > 0.0 {
        // W(x) is close to ln(1+x) on (0, e].
        x.ln_1p() * 0.9
    } else {
        branch_point_series((2.0 * (E * x + 1.0)).sqrt())
    }
}

/// W(-1/e + p^2/2) = -1 + p - p^2/3 + 11 p^3/72 - 43 p^4/540 + 769 p^5/17280 + ...
fn branch_point_series(p: f64) -> f64 {
    let c = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
    ];
    let mut acc = c[5];
    for k in (0..5).rev() {
        acc = acc * p + c[k];
    }
    acc
}

/// Bracket and stopping parameters for [`bisect`].
#[derive(Debug, Clone)]
pub struct BisectionSpec {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on the residual magnitude.
    pub tol: f64,
    pub max_iter: u32,
}

impl BisectionSpec {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Self {
        Self { lo, hi, tol, max_iter: 200 }
    }
}

/// Root of a monotone residual by bisection.
///
/// The endpoints must straddle a sign change; infinite residuals are fine
/// (they keep their sign). Returns the midpoint once the residual falls
/// below `spec.tol`, and an error carrying the last bracket if the
/// iteration budget runs out first.
pub fn bisect<F: Fn(f64) -> f64>(residual: F, spec: &BisectionSpec) -> Result<f64> {
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let mut f_lo = residual(lo);
    let f_hi = residual(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }

    for _ in 0..spec.max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid);
        if f_mid.abs() <= spec.tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        context: "bisection",
        detail: format!("bracket [{lo:e}, {hi:e}] after {} iterations", spec.max_iter),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-12);
        // Omega constant: W(1).
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-12);
    }

    #[test]
    fn w_rejects_left_of_branch_point() {
        assert!(matches!(lambert_w0(-0.4), Err(Error::WDomain { .. })));
        assert!(matches!(lambert_w0(f64::NAN), Err(Error::WDomain { .. })));
    }

    #[test]
    fn w_round_trip_on_grid() {
        // w -> w e^w -> W recovers w across the principal branch.
        for i in 0..=1000 {
            let w = -1.0 + 11.0 * i as f64 / 1000.0;
            let x = w * w.exp();
            let back = lambert_w0(x).unwrap();
            assert!(
                (back - w).abs() <= 1e-10,
                "w = {w}, recovered {back}, err {:e}",
                (back - w).abs()
            );
        }
    }

    #[test]
    fn w_monotone_increasing() {
        let mut prev = lambert_w0(-1.0 / E).unwrap();
        for i in 1..=500 {
            let x = -1.0 / E + i as f64 * (20.0 + 1.0 / E) / 500.0;
            let w = lambert_w0(x).unwrap();
            assert!(w > prev, "W not increasing at x = {x}");
            prev = w;
        }
    }

    #[test]
    fn bisect_linear_root() {
        let spec = BisectionSpec::new(0.0, 10.0, 1e-12);
        let root = bisect(|x| x - 2.0, &spec).unwrap();
        assert!((root - 2.0).abs() < 1e-11);
        assert!(root >= 0.0 && root <= 10.0);
    }

    #[test]
    fn bisect_exponential_root() {
        let spec = BisectionSpec::new(0.0, 10.0, 1e-13);
        let root = bisect(|x| x.exp() - 3.0, &spec).unwrap();
        assert!((root - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        let spec = BisectionSpec::new(0.0, 1.0, 1e-12);
        assert!(matches!(
            bisect(|x| x - 2.0, &spec),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn bisect_stays_inside_bracket() {
        let spec = BisectionSpec::new(1.0, 4.0, 1e-12);
        let root = bisect(|x| x * x - 9.0, &spec).unwrap();
        assert!((1.0..=4.0).contains(&root));
        assert!((root - 3.0).abs() < 1e-11);
    }
}
