//! Quadrature and scalar root finding.
#![allow(clippy::excessive_precision)]

use roots::{find_root_brent, SimpleConvergency};

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `abs_tol` or `max_intervals` is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<Quadrature> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: f64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        if err <= abs_tol {
            return Ok(Quadrature {
                value: total,
                error_estimate: err,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                tolerance: abs_tol,
                estimate: err,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Brent's method on `[lo, hi]`; requires a sign change.
pub fn brent<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mut conv = SimpleConvergency {
        eps: tol,
        max_iter: 200,
    };
    find_root_brent(lo, hi, f, &mut conv).map_err(|_| Error::NoRoot { lo, hi })
}

/// Bisection on a sign change of `f` between `lo` and `hi` until the bracket
/// is narrower than `width`. Returns the final bracket.
///
/// Unlike [`brent`] this only relies on the sign of `f`, which is what a
/// phase classifier provides near its boundary.
pub fn bisect_sign<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, width: f64) -> Result<(f64, f64)> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    let fb = f(b)?;
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    let neg_at_a = fa < 0.0;
    while (b - a).abs() > width {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((q.value - (256.0 / 8.0 - 8.0)).abs() < 1e-12);
        assert_eq!(q.evaluations, 15);
    }

    #[test]
    fn smooth_periodic_integrand() {
        // ∫₀^π cos² k dk = π/2
        let q = integrate(|k: f64| k.cos().powi(2), 0.0, PI, 1e-12, 100).unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kink_needs_refinement() {
        let q = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-10, 200).unwrap();
        assert!((q.value - (0.045 + 0.245)).abs() < 1e-10);
        assert!(q.evaluations > 15);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-14, 4);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(matches!(
            brent(|x| x * x + 1.0, 0.0, 2.0, 1e-12),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn bisection_brackets_root() {
        let (a, b) = bisect_sign(|x| Ok(x - 0.123456789), 0.0, 1.0, 1e-9).unwrap();
        assert!(a <= 0.123456789 && 0.123456789 <= b && b - a <= 1e-9);
        let (a, b) = bisect_sign(|x| Ok(0.7 - x), 0.0, 1.0, 1e-9).unwrap();
        assert!(a <= 0.7 && 0.7 <= b);
    }
}
