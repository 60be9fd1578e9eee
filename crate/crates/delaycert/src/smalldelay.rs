//! Small-delay inertial-manifold criterion and its comparison thresholds.
//!
//! For `x'(t) = F(t, C x_t)` with incremental gain bound `lambda` and delay
//! horizon `tau`, an n-dimensional manifold with tracking exponent `1/tau`
//! exists whenever `e sqrt(r) sqrt(1 + e^{-2}/r) * tau < 1/lambda`. The
//! Ryabov-Driver and Chicone conditions are evaluated alongside for
//! comparison.

use crate::error::{Error, Result};
use crate::mat::RMat;
use crate::measure::DelayMeasure;
use crate::system::DelaySystem;
use serde::Serialize;
use std::f64::consts::E;

#[derive(Debug, Clone, Serialize)]
pub struct SmallDelayReport {
    pub n: usize,
    pub r: usize,
    pub lambda: f64,
    pub tau: f64,
    /// `1 / (e sqrt(r) sqrt(1 + e^{-2} r^{-1}))`
    pub threshold_paper: f64,
    /// Ryabov-Driver: `1 / (sqrt(r) e)`
    pub threshold_rd: f64,
    /// Chicone: `1 / (2 sqrt(r) sqrt(e))`
    pub threshold_chicone: f64,
    pub pass_paper: bool,
    pub pass_rd: bool,
    pub pass_chicone: bool,
    /// Tracking exponent `1/tau`, meaningful when `pass_paper` holds.
    pub nu: f64,
    /// Manifold dimension (= n), meaningful when `pass_paper` holds.
    pub manifold_dim: usize,
}

/// Thresholds on `lambda * tau` for a given output dimension r.
pub fn thresholds(r: usize) -> (f64, f64, f64) {
    let rf = r as f64;
    let paper = 1.0 / (E * rf.sqrt() * (1.0 + E.powi(-2) / rf).sqrt());
    let rd = 1.0 / (rf.sqrt() * E);
    let chicone = 1.0 / (2.0 * rf.sqrt() * E.sqrt());
    (paper, rd, chicone)
}

/// Evaluate all three small-delay conditions at `(n, r, lambda, tau)`.
pub fn small_delay_certificate(n: usize, r: usize, lambda: f64, tau: f64) -> Result<SmallDelayReport> {
    if n == 0 || r == 0 {
        return Err(Error::InvalidParameter("n and r must be >= 1".into()));
    }
    if !(lambda > 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidParameter(
            "lambda and tau must be positive".into(),
        ));
    }
    let (paper, rd, chicone) = thresholds(r);
    let lt = lambda * tau;
    Ok(SmallDelayReport {
        n,
        r,
        lambda,
        tau,
        threshold_paper: paper,
        threshold_rd: rd,
        threshold_chicone: chicone,
        pass_paper: lt < paper,
        pass_rd: lt < rd,
        pass_chicone: lt < chicone,
        nu: 1.0 / tau,
        manifold_dim: n,
    })
}

/// Frequency-independent bound on the shifted plant's transfer norm:
/// `|W(-nu + i omega)|_2 <= sqrt(r e^{2 tau nu} + 1) / (a + nu)`.
pub fn small_delay_spectral_bound(r: usize, nu: f64, a_shift: f64, tau: f64) -> Result<f64> {
    if a_shift + nu <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "spectral bound needs a + nu > 0, got {}",
            a_shift + nu
        )));
    }
    let rf = r as f64;
    Ok((rf * (2.0 * tau * nu).exp() + 1.0).sqrt() / (a_shift + nu))
}

/// Build the Lur'e-shifted plant for `x'(t) = F(t, C x_t)` written as
/// `x'(t) = a x(t) + (F - a x(t))`: state measure `a I` at 0, input matrix
/// `I_n`, and output stacking the r single-delay reads (component
/// `columns[k]` at lag `lags[k]`) on top of the instantaneous state.
pub fn lure_shifted_plant(
    n: usize,
    a_shift: f64,
    tau: f64,
    lags: &[f64],
    columns: &[usize],
) -> Result<DelaySystem> {
    if lags.len() != columns.len() {
        return Err(Error::DimensionMismatch(
            "one output component per (lag, column) pair".into(),
        ));
    }
    let r = lags.len();
    if r == 0 {
        return Err(Error::InvalidParameter("need at least one delayed read".into()));
    }
    for (&lag, &col) in lags.iter().zip(columns) {
        if lag < 0.0 || lag > tau {
            return Err(Error::InvalidParameter(format!("lag {lag} outside [0, {tau}]")));
        }
        if col >= n {
            return Err(Error::InvalidParameter(format!("column {col} >= n = {n}")));
        }
    }
    let a = DelayMeasure::empty(n, n, tau)?.with_atom(0.0, RMat::identity(n).scale(a_shift))?;
    // output rows 1..=r: delayed single-component reads; rows r+1..=r+n the
    // instantaneous full state
    let mut c = DelayMeasure::empty(r + n, n, tau)?;
    for (k, (&lag, &col)) in lags.iter().zip(columns).enumerate() {
        let mut row = RMat::zeros(r + n, n);
        row[(k, col)] = 1.0;
        c = c.with_atom(-lag, row)?;
    }
    let mut eye_block = RMat::zeros(r + n, n);
    for i in 0..n {
        eye_block[(r + i, i)] = 1.0;
    }
    c = c.with_atom(0.0, eye_block)?;
    DelaySystem::new(tau, a, RMat::identity(n), c)
}
