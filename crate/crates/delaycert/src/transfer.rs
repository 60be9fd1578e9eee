//! Transfer matrix W(p) = gamma(p) (alpha(p) - p I)^{-1} B and friends.

use crate::cmat::{CMat, Lu};
use crate::error::{Error, Result};
use crate::measure::DelayMeasure;
use crate::system::DelaySystem;
use num_complex::Complex64;

/// Reciprocal condition numbers below this declare the resolvent matrix
/// numerically singular, i.e. p is treated as a characteristic root.
pub const SINGULARITY_RCOND: f64 = 1e-13;

/// `int e^{p theta} d mu(theta)` as a complex matrix.
pub fn eval_measure(mu: &DelayMeasure, p: Complex64) -> Result<CMat> {
    mu.eval_at(p)
}

/// `alpha(p) - p I` for the state measure of `sys`.
pub fn resolvent_matrix(sys: &DelaySystem, p: Complex64) -> Result<CMat> {
    let mut m = eval_measure(&sys.a, p)?;
    for i in 0..sys.n {
        m[(i, i)] -= p;
    }
    Ok(m)
}

/// Solve `(alpha(p) - p I) X = B` with the conditioning check.
pub fn resolvent_solve(sys: &DelaySystem, p: Complex64, rhs: &CMat) -> Result<CMat> {
    let m = resolvent_matrix(sys, p)?;
    let lu = Lu::factor(&m)?;
    let rcond = lu.rcond(m.norm_one());
    if rcond < SINGULARITY_RCOND {
        return Err(Error::SingularAtP { p, rcond });
    }
    lu.solve_mat(rhs)
}

/// The r x m transfer matrix `W(p) = gamma(p) (alpha(p) - p I)^{-1} B`.
pub fn eval_transfer(sys: &DelaySystem, p: Complex64) -> Result<CMat> {
    let x = resolvent_solve(sys, p, &sys.b.to_complex())?;
    let gamma = eval_measure(&sys.c, p)?;
    let w = gamma.mul(&x)?;
    if !w.is_finite() {
        return Err(Error::Overflow {
            p,
            exponent: p.re.abs() * sys.tau,
        });
    }
    Ok(w)
}

/// Largest singular value of a complex matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    m.spectral_norm()
}
