//! Adaptive Simpson and fixed Gauss–Legendre rules.

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, tol * TOL_FLOOR, max_depth)
}

/// Per-interval tolerances stop shrinking at this fraction of the request.
const TOL_FLOOR: f64 = 1.0 / 1048576.0;

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    // below this the difference is rounding noise
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if diff.abs() <= 15.0 * tol.max(floor).max(noise) {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 || !(m > a && m < b) {
        return Err(Error::QuadratureNonConvergence { a, b });
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, tol / 2.0, floor, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, floor, depth - 1)?)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre5<F>(mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut sum = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
        sum += w * f(0.5 * (x + 1.0))?;
    }
    Ok(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_and_logs() {
        let v = adaptive_simpson(|x| Ok(x.powi(4)), 0.0, 2.0, 1e-12, MAX_DEPTH).unwrap();
        assert_abs_diff_eq!(v, 32.0 / 5.0, epsilon = 1e-11);
        let eps: f64 = 1e-6;
        let v = adaptive_simpson(|t| Ok(1.0 / (1.0 - t * t)), 0.0, 1.0 - eps, DEFAULT_TOL, MAX_DEPTH).unwrap();
        assert_abs_diff_eq!(v, 0.5 * ((2.0 - eps) / eps).ln(), epsilon = 1e-8);
    }

    #[test]
    fn reports_non_convergence() {
        let r = adaptive_simpson(|x: f64| Ok(1.0 / x.abs().sqrt()), -1.0, 1.0, 1e-12, 5);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn gauss_legendre_exact_to_degree_nine() {
        let v = gauss_legendre5(|x| Ok(x.powi(9))).unwrap();
        assert_abs_diff_eq!(v, 0.1, epsilon = 1e-15);
    }
}
