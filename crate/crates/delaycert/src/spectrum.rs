//! Characteristic function Delta(p) = det(alpha(p) - p I), a-priori root
//! localization, and exact counting of roots right of a vertical line via
//! the argument principle on a rectangular contour.

use crate::cmat::Lu;
use crate::error::{Error, Result};
use crate::measure::DelayMeasure;
use crate::quadrature::integrate_adaptive;
use crate::system::DelaySystem;
use crate::transfer::resolvent_matrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Number of samples on the left contour edge used to detect roots sitting
/// on the line Re p = -nu.
const LINE_SCAN_SAMPLES: usize = 4096;

/// A root on the line is declared when min |Delta| over the scan drops below
/// this fraction of (1 + max |Delta|). A false accept corrupts a
/// certificate, while a false reject is recoverable by nudging nu.
const LINE_SCAN_THRESHOLD: f64 = 1e-8;

/// Rectangle in the complex plane, axis aligned.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContourRect {
    pub re_left: f64,
    pub re_right: f64,
    pub im_bottom: f64,
    pub im_top: f64,
}

/// Result of a root count right of `Re p = -nu`.
#[derive(Debug, Clone, Serialize)]
pub struct RootCount {
    /// The line `Re p = -nu`.
    pub nu: f64,
    /// Number of characteristic roots with `Re p > -nu`, counted with
    /// multiplicity.
    pub j: usize,
    pub contour: ContourRect,
    /// Distance of the raw contour integral over 2 pi i from the nearest
    /// integer; counts with residual >= 0.05 are rejected, never rounded.
    pub winding_residual: f64,
    /// Smallest |Delta| seen anywhere on the contour.
    pub min_boundary_modulus: f64,
}

/// `det(alpha(p) - p I)`.
pub fn char_fn(sys: &DelaySystem, p: Complex64) -> Result<Complex64> {
    let m = resolvent_matrix(sys, p)?;
    Ok(Lu::factor(&m)?.det())
}

/// Logarithmic derivative `Delta'(p)/Delta(p) = tr[(alpha(p)-pI)^{-1}(alpha'(p)-I)]`
/// (Jacobi's formula); `a_weighted` must be `sys.a.theta_weighted()`.
pub fn char_log_deriv(
    sys: &DelaySystem,
    a_weighted: &DelayMeasure,
    p: Complex64,
) -> Result<Complex64> {
    let m = resolvent_matrix(sys, p)?;
    let lu = Lu::factor(&m)?;
    if lu.is_exactly_singular() {
        return Err(Error::SingularAtP { p, rcond: 0.0 });
    }
    let mut rhs = a_weighted.eval_at(p)?;
    for i in 0..sys.n {
        rhs[(i, i)] -= 1.0;
    }
    let x = lu.solve_mat(&rhs)?;
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..sys.n {
        tr += x[(i, i)];
    }
    Ok(tr)
}

/// A-priori localization radius: every characteristic root with
/// `Re p >= -nu` satisfies `|p| <= R - 1` where
/// `R = max(1, e^{nu tau}) * TV(a) + 1`.
///
/// Derivation: a root makes `alpha(p) - p I` singular, so p is an eigenvalue
/// of `alpha(p)` and `|p| <= |alpha(p)|_2`. On the half-plane `Re p >= -nu`
/// the kernel satisfies `|e^{p theta}| <= max(1, e^{nu tau})` for
/// `theta in [-tau, 0]`, hence `|alpha(p)|_2 <= max(1, e^{nu tau}) * TV(a)`.
pub fn root_box(sys: &DelaySystem, nu: f64) -> Result<f64> {
    if nu < 0.0 {
        return Err(Error::InvalidParameter(format!("root_box needs nu >= 0, got {nu}")));
    }
    let tv = sys.a.total_variation();
    Ok((nu * sys.tau).exp().max(1.0) * tv + 1.0)
}

/// Count characteristic roots with `Re p > -nu` by integrating
/// `Delta'/Delta` around the rectangle `[-nu, R] x [-R, R]`.
pub fn count_roots_right_of(sys: &DelaySystem, nu: f64) -> Result<RootCount> {
    if nu < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "count_roots_right_of needs nu >= 0, got {nu}"
        )));
    }
    let r = root_box(sys, nu)?;
    let contour = ContourRect {
        re_left: -nu,
        re_right: r,
        im_bottom: -r,
        im_top: r,
    };

    // scan the left edge for roots sitting on (or within a sample step of)
    // the dichotomy line
    let mut min_line = f64::INFINITY;
    let mut max_line = 0.0f64;
    let mut argmin = Complex64::new(-nu, 0.0);
    for k in 0..LINE_SCAN_SAMPLES {
        let t = -r + 2.0 * r * (k as f64) / (LINE_SCAN_SAMPLES as f64 - 1.0);
        let p = Complex64::new(-nu, t);
        let v = char_fn(sys, p)?.norm();
        if v < min_line {
            min_line = v;
            argmin = p;
        }
        max_line = max_line.max(v);
    }
    let a_weighted = sys.a.theta_weighted();
    // absolute backstop plus the Newton-step criterion: |Delta|/|Delta'| at
    // the minimizing sample below the sample spacing means a root closer to
    // the line than the scan can resolve
    let step = 2.0 * r / (LINE_SCAN_SAMPLES as f64 - 1.0);
    let mut threshold = LINE_SCAN_THRESHOLD * (1.0 + max_line);
    match char_log_deriv(sys, &a_weighted, argmin) {
        Ok(ld) => threshold = threshold.max(0.75 * min_line * ld.norm() * step),
        Err(_) => {
            // the scan landed on an exact root
            return Err(Error::RootOnLine {
                line: -nu,
                min_modulus: min_line,
                threshold,
            });
        }
    }
    if min_line < threshold {
        return Err(Error::RootOnLine {
            line: -nu,
            min_modulus: min_line,
            threshold,
        });
    }
    // counterclockwise edges as (start, end) in the complex plane
    let edges = [
        (Complex64::new(-nu, -r), Complex64::new(r, -r)),
        (Complex64::new(r, -r), Complex64::new(r, r)),
        (Complex64::new(r, r), Complex64::new(-nu, r)),
        (Complex64::new(-nu, r), Complex64::new(-nu, -r)),
    ];

    let mut edge_tol = 0.05;
    let mut max_panels = 400usize;
    let mut best_residual = f64::INFINITY;
    let mut best_total = Complex64::new(0.0, 0.0);
    let mut min_boundary = min_line;
    for _round in 0..6 {
        let results: Vec<(Complex64, f64)> = edges
            .par_iter()
            .map(|&(a, b)| {
                let dir = b - a;
                let mut local_min = f64::INFINITY;
                let mut failure: Option<Error> = None;
                let mut f = |t: f64| {
                    let p = a + dir * t;
                    match (char_fn(sys, p), char_log_deriv(sys, &a_weighted, p)) {
                        (Ok(d), Ok(ld)) => {
                            local_min = local_min.min(d.norm());
                            ld * dir
                        }
                        (Err(e), _) | (_, Err(e)) => {
                            failure.get_or_insert(e);
                            Complex64::new(f64::NAN, f64::NAN)
                        }
                    }
                };
                let (v, _err) = integrate_adaptive(&mut f, 0.0, 1.0, edge_tol, 0.0, max_panels);
                (v, local_min)
            })
            .collect();
        let total: Complex64 = results.iter().map(|(v, _)| *v).sum();
        for (_, lm) in &results {
            min_boundary = min_boundary.min(*lm);
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NonIntegerWinding { residual: f64::NAN });
        }
        let winding = total / Complex64::new(0.0, 2.0 * PI);
        let nearest = winding.re.round();
        let residual = (winding - nearest).norm();
        if residual < best_residual {
            best_residual = residual;
            best_total = winding;
        }
        if residual < 0.05 {
            let j = nearest as i64;
            if j < 0 {
                return Err(Error::NonIntegerWinding { residual });
            }
            return Ok(RootCount {
                nu,
                j: j as usize,
                contour,
                winding_residual: residual,
                min_boundary_modulus: min_boundary,
            });
        }
        edge_tol *= 0.25;
        max_panels *= 2;
    }
    let _ = best_total;
    Err(Error::NonIntegerWinding {
        residual: best_residual,
    })
}

/// Newton refinement of a characteristic root from an initial guess; used by
/// tests to pin dominant roots. Steps are `p <- p - 1/(Delta'/Delta)`.
pub fn refine_root(sys: &DelaySystem, start: Complex64, max_iter: usize) -> Result<Complex64> {
    let a_weighted = sys.a.theta_weighted();
    let mut p = start;
    for _ in 0..max_iter {
        let ld = char_log_deriv(sys, &a_weighted, p)?;
        if ld.norm() == 0.0 {
            break;
        }
        let step = 1.0 / ld;
        p -= step;
        if step.norm() < 1e-14 * (1.0 + p.norm()) {
            break;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::RMat;
    use crate::measure::DelayMeasure;

    fn scalar_sys(atoms: &[(f64, f64)], tau: f64) -> DelaySystem {
        let mut a = DelayMeasure::empty(1, 1, tau).unwrap();
        for &(theta, w) in atoms {
            a = a
                .with_atom(theta, RMat::from_rows(1, 1, vec![w]).unwrap())
                .unwrap();
        }
        let c = DelayMeasure::empty(1, 1, tau)
            .unwrap()
            .with_atom(0.0, RMat::identity(1))
            .unwrap();
        DelaySystem::new(tau, a, RMat::identity(1), c).unwrap()
    }

    #[test]
    fn char_fn_ode() {
        // a = atom(0, -1): Delta(p) = -1 - p
        let sys = scalar_sys(&[(0.0, -1.0)], 1.0);
        for p in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.5, -2.0),
            Complex64::new(-0.3, 0.7),
        ] {
            let d = char_fn(&sys, p).unwrap();
            assert!((d - (-1.0 - p)).norm() < 1e-14);
        }
    }

    #[test]
    fn char_fn_pure_delay() {
        // x'(t) = x(t-1): Delta(p) = e^{-p} - p, near-zero at the real root
        let sys = scalar_sys(&[(-1.0, 1.0)], 1.0);
        let p = Complex64::new(0.567143, 0.0);
        assert!(char_fn(&sys, p).unwrap().norm() < 1e-5);
        let root = refine_root(&sys, p, 50).unwrap();
        assert!((root.re - 0.5671432904097838).abs() < 1e-12);
        assert!(root.im.abs() < 1e-12);
    }

    #[test]
    fn root_box_examples() {
        let sys = scalar_sys(&[(0.0, -1.0)], 1.0);
        assert!((root_box(&sys, 0.0).unwrap() - 2.0).abs() < 1e-12);
        let sys = scalar_sys(&[(-1.0, 1.0)], 1.0);
        assert!((root_box(&sys, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(root_box(&sys, -0.5).is_err());
    }

    #[test]
    fn count_ode_no_roots() {
        let sys = scalar_sys(&[(0.0, -1.0)], 1.0);
        let rc = count_roots_right_of(&sys, 0.0).unwrap();
        assert_eq!(rc.j, 0);
        assert!(rc.winding_residual < 0.05);
    }

    #[test]
    fn count_pure_delay_one_root() {
        let sys = scalar_sys(&[(-1.0, 1.0)], 1.0);
        let rc = count_roots_right_of(&sys, 0.0).unwrap();
        assert_eq!(rc.j, 1);
    }

    #[test]
    fn root_on_line_detected() {
        // x'(t) = -(pi/2) x(t-1) has roots at +-i pi/2
        let sys = scalar_sys(&[(-1.0, -std::f64::consts::FRAC_PI_2)], 1.0);
        let err = count_roots_right_of(&sys, 0.0).unwrap_err();
        assert!(matches!(err, Error::RootOnLine { .. }), "{err:?}");
    }

    #[test]
    fn count_is_stable_under_nu_shift_at_ode_root() {
        // x' = -x: single root at -1; counts at nu = 1 -+ eps differ by 1
        let sys = scalar_sys(&[(0.0, -1.0)], 1.0);
        let lo = count_roots_right_of(&sys, 0.9).unwrap();
        let hi = count_roots_right_of(&sys, 1.1).unwrap();
        assert_eq!(lo.j, 0);
        assert_eq!(hi.j, 1);
    }
}
