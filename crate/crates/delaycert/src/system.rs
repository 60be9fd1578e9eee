//! The linear delay plant: state dimension n, input dimension m, output
//! dimension r, horizon tau, and the measures behind the state and output
//! operators.

use crate::error::{Error, Result};
use crate::mat::RMat;
use crate::measure::DelayMeasure;

/// Plant `x'(t) = A x_t + B xi(t)` with output `sigma(t) = C x_t`, where A
/// and C are measures on `[-tau, 0]` and B is a constant n x m matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySystem {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub tau: f64,
    pub a: DelayMeasure,
    pub b: RMat,
    pub c: DelayMeasure,
}

impl DelaySystem {
    pub fn new(tau: f64, a: DelayMeasure, b: RMat, c: DelayMeasure) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        let (ar, ac) = a.dims();
        if ar != ac {
            return Err(Error::DimensionMismatch("state measure must be square".into()));
        }
        let n = ar;
        if b.rows != n {
            return Err(Error::DimensionMismatch(format!(
                "input matrix has {} rows, state dimension is {n}",
                b.rows
            )));
        }
        let m = b.cols;
        let (cr, cc) = c.dims();
        if cc != n {
            return Err(Error::DimensionMismatch(format!(
                "output measure has {cc} columns, state dimension is {n}"
            )));
        }
        let r = cr;
        if n == 0 || m == 0 || r == 0 {
            return Err(Error::InvalidParameter("zero dimension".into()));
        }
        Ok(DelaySystem { n, m, r, tau, a, b, c })
    }

    /// All discrete lags appearing in the state and output atoms
    /// (deduplicated, positive, ascending).
    pub fn discrete_lags(&self) -> Vec<f64> {
        let mut lags: Vec<f64> = self
            .a
            .atom_lags()
            .into_iter()
            .chain(self.c.atom_lags())
            .filter(|l| *l > 1e-14)
            .collect();
        lags.sort_by(f64::total_cmp);
        lags.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        lags
    }
}
