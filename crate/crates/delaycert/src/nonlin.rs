//! Nonlinearity descriptions: what the feedback term evaluates to, plus the
//! user-declared sector / Lipschitz metadata the frequency checks consume.
//!
//! Bounds are declared, not inferred; the one exception is the built-in
//! Goodwin function, which ships with its certified slope bounds.

use crate::error::{Error, Result};
use crate::expr::ExprTree;
use crate::mat::RMat;

/// Certified lower slope bound of the Goodwin function 1/(1+|s|^3):
/// `-(2 * 2^(1/3)) / 3`.
pub fn goodwin_slope_bound() -> f64 {
    -2.0 * 2.0f64.cbrt() / 3.0
}

/// Scalar sector `k1 <= slope <= k2`; `incremental` distinguishes the
/// difference-quotient form from the pointwise `k1 s <= F(s) <= k2 s` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub k1: f64,
    pub k2: f64,
    pub incremental: bool,
}

/// Gain bound `|F(s1) - F(s2)| <= lambda |s1 - s2|` (incremental) or
/// `|F(s)| <= lambda |s|` (pointwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBound {
    pub lambda: f64,
    pub incremental: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinKind {
    /// `1/(1+|s|^3) + rho * s`; `rho = 0` is the plain Goodwin function.
    Goodwin { rho: f64 },
    /// Linear map `F(sigma) = K sigma` (m x r gain matrix).
    LinearGain(RMat),
    /// User-supplied scalar expression in `sigma`.
    Expression(ExprTree),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub kind: NonlinKind,
    pub sector: Option<Sector>,
    pub lipschitz: Option<LipschitzBound>,
    pub time_dependent: bool,
}

impl Nonlinearity {
    /// Goodwin feedback with the rho shift absorbed: sector
    /// `[-(2 cbrt 2)/3 + rho, rho]`, incremental.
    pub fn goodwin(rho: f64) -> Result<Self> {
        if rho < 0.0 {
            return Err(Error::InvalidParameter(format!("rho must be >= 0, got {rho}")));
        }
        Ok(Nonlinearity {
            kind: NonlinKind::Goodwin { rho },
            sector: Some(Sector {
                k1: goodwin_slope_bound() + rho,
                k2: rho,
                incremental: true,
            }),
            lipschitz: None,
            time_dependent: false,
        })
    }

    pub fn linear_gain(gain: RMat) -> Self {
        let lambda = gain.spectral_norm();
        Nonlinearity {
            kind: NonlinKind::LinearGain(gain),
            sector: None,
            lipschitz: if lambda > 0.0 {
                Some(LipschitzBound {
                    lambda,
                    incremental: true,
                })
            } else {
                None
            },
            time_dependent: false,
        }
    }

    pub fn expression(tree: ExprTree) -> Self {
        Nonlinearity {
            kind: NonlinKind::Expression(tree),
            sector: None,
            lipschitz: None,
            time_dependent: false,
        }
    }

    pub fn with_sector(mut self, k1: f64, k2: f64, incremental: bool) -> Result<Self> {
        if k1 > k2 {
            return Err(Error::InvalidParameter(format!("sector needs k1 <= k2, got [{k1}, {k2}]")));
        }
        self.sector = Some(Sector { k1, k2, incremental });
        Ok(self)
    }

    pub fn with_lipschitz(mut self, lambda: f64, incremental: bool) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lipschitz constant must be positive, got {lambda}")));
        }
        self.lipschitz = Some(LipschitzBound { lambda, incremental });
        Ok(self)
    }

    /// Input dimension r and output dimension m of the map, when the kind
    /// pins them (scalar kinds are 1 -> 1).
    pub fn dims(&self) -> (usize, usize) {
        match &self.kind {
            NonlinKind::Goodwin { .. } | NonlinKind::Expression(_) => (1, 1),
            NonlinKind::LinearGain(k) => (k.cols, k.rows),
        }
    }

    /// Evaluate `F(sigma)`.
    pub fn eval(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            NonlinKind::Goodwin { rho } => {
                let s = sigma[0];
                Ok(vec![1.0 / (1.0 + s.abs().powi(3)) + rho * s])
            }
            NonlinKind::LinearGain(k) => {
                if sigma.len() != k.cols {
                    return Err(Error::DimensionMismatch("linear gain input".into()));
                }
                Ok(k.mul_vec(sigma))
            }
            NonlinKind::Expression(tree) => Ok(vec![tree.eval(sigma[0])?]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goodwin_exact_values() {
        let f = Nonlinearity::goodwin(0.0).unwrap();
        assert_eq!(f.eval(&[0.0]).unwrap()[0], 1.0);
        assert_eq!(f.eval(&[1.0]).unwrap()[0], 0.5);
        assert_eq!(f.eval(&[-1.0]).unwrap()[0], 0.5);
        assert_eq!(f.eval(&[2.0]).unwrap()[0], 1.0 / 9.0);
    }

    #[test]
    fn goodwin_rho_shift_and_sector() {
        let f = Nonlinearity::goodwin(0.3).unwrap();
        let v = f.eval(&[2.0]).unwrap()[0];
        assert!((v - (1.0 / 9.0 + 0.6)).abs() < 1e-15);
        let s = f.sector.unwrap();
        assert!((s.k1 - (goodwin_slope_bound() + 0.3)).abs() < 1e-15);
        assert_eq!(s.k2, 0.3);
        assert!(s.incremental);
    }

    #[test]
    fn goodwin_slope_bound_is_sharp() {
        // the minimum of g' over sigma >= 0 sits at sigma = 2^{-1/3}
        let g = |s: f64| 1.0 / (1.0 + s.abs().powi(3));
        let s0 = 2.0f64.powf(-1.0 / 3.0);
        let h = 1e-6;
        let slope = (g(s0 + h) - g(s0 - h)) / (2.0 * h);
        assert!((slope - goodwin_slope_bound()).abs() < 1e-9);
        // and no sampled slope goes below the bound
        for k in 0..2000 {
            let s = k as f64 * 0.005;
            let sl = (g(s + h) - g(s - h)) / (2.0 * h);
            assert!(sl >= goodwin_slope_bound() - 1e-7);
            assert!(sl <= 1e-7);
        }
    }

    #[test]
    fn sector_rejects_inverted_bounds() {
        let f = Nonlinearity::goodwin(0.0).unwrap();
        assert!(f.with_sector(1.0, -1.0, true).is_err());
    }
}
