//! Quadratic constraint forms G(sigma, xi) with Hermitian block data.
//!
//! The two stock constructors cover the sector form
//! `(xi - k1 sigma)(k2 sigma - xi)` and the gain form
//! `lambda^2 |sigma|^2 - |xi|^2`; anything else can be assembled from raw
//! blocks.

use crate::error::{Error, Result};
use crate::mat::RMat;

/// `G(sigma, xi) = sigma^T G_sigma sigma + 2 xi^T G_cross sigma + xi^T G_xi xi`
/// with `G_sigma` symmetric r x r, `G_cross` m x r, `G_xi` symmetric m x m.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    g_sigma: RMat,
    g_cross: RMat,
    g_xi: RMat,
}

impl QuadForm {
    /// Build from raw blocks; the diagonal blocks are symmetrized exactly.
    pub fn new(g_sigma: RMat, g_cross: RMat, g_xi: RMat) -> Result<Self> {
        if !g_sigma.is_square() || !g_xi.is_square() {
            return Err(Error::DimensionMismatch(
                "diagonal blocks of a quadratic form must be square".into(),
            ));
        }
        if g_cross.rows != g_xi.rows || g_cross.cols != g_sigma.rows {
            return Err(Error::DimensionMismatch(format!(
                "cross block must be {}x{}, got {}x{}",
                g_xi.rows, g_sigma.rows, g_cross.rows, g_cross.cols
            )));
        }
        Ok(QuadForm {
            g_sigma: g_sigma.symmetrized(),
            g_cross,
            g_xi: g_xi.symmetrized(),
        })
    }

    pub fn g_sigma(&self) -> &RMat {
        &self.g_sigma
    }

    pub fn g_cross(&self) -> &RMat {
        &self.g_cross
    }

    pub fn g_xi(&self) -> &RMat {
        &self.g_xi
    }

    /// Output dimension r of the sigma argument.
    pub fn dim_sigma(&self) -> usize {
        self.g_sigma.rows
    }

    /// Input dimension m of the xi argument.
    pub fn dim_xi(&self) -> usize {
        self.g_xi.rows
    }

    pub fn evaluate(&self, sigma: &[f64], xi: &[f64]) -> Result<f64> {
        if sigma.len() != self.dim_sigma() || xi.len() != self.dim_xi() {
            return Err(Error::DimensionMismatch("quadratic form arguments".into()));
        }
        let gs = self.g_sigma.mul_vec(sigma);
        let gc = self.g_cross.mul_vec(sigma);
        let gx = self.g_xi.mul_vec(xi);
        let mut v = 0.0;
        for i in 0..sigma.len() {
            v += sigma[i] * gs[i];
        }
        for i in 0..xi.len() {
            v += 2.0 * xi[i] * gc[i] + xi[i] * gx[i];
        }
        Ok(v)
    }
}

/// Scalar sector form `(xi - k1 sigma)(k2 sigma - xi)`:
/// `G_sigma = -k1 k2`, `G_cross = (k1 + k2)/2`, `G_xi = -1`.
pub fn sector_form(k1: f64, k2: f64) -> Result<QuadForm> {
    if k1 > k2 {
        return Err(Error::InvalidParameter(format!(
            "sector form needs k1 <= k2, got [{k1}, {k2}]"
        )));
    }
    QuadForm::new(
        RMat::from_rows(1, 1, vec![-k1 * k2])?,
        RMat::from_rows(1, 1, vec![0.5 * (k1 + k2)])?,
        RMat::from_rows(1, 1, vec![-1.0])?,
    )
}

/// Gain form `lambda^2 |sigma|^2 - |xi|^2`:
/// `G_sigma = lambda^2 I_r`, `G_cross = 0`, `G_xi = -I_m`.
pub fn lipschitz_form(lambda: f64, r: usize, m: usize) -> Result<QuadForm> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lipschitz form needs lambda > 0, got {lambda}"
        )));
    }
    QuadForm::new(
        RMat::identity(r).scale(lambda * lambda),
        RMat::zeros(m, r),
        RMat::identity(m).scale(-1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::goodwin_slope_bound;

    #[test]
    fn sector_form_examples() {
        let f = sector_form(-1.0, 1.0).unwrap();
        assert_eq!(f.evaluate(&[1.0], &[0.0]).unwrap(), 1.0);
        // degenerate sector (0,0): value is -xi^2
        let f0 = sector_form(0.0, 0.0).unwrap();
        for (s, x) in [(1.0, 2.0), (-3.0, 0.5), (0.0, -1.0)] {
            assert_eq!(f0.evaluate(&[s], &[x]).unwrap(), -x * x);
        }
        // the Goodwin slope sector is accepted
        let fg = sector_form(goodwin_slope_bound(), 0.0).unwrap();
        assert_eq!(fg.g_sigma()[(0, 0)], 0.0);
        assert_eq!(fg.g_xi()[(0, 0)], -1.0);
        assert!(sector_form(1.0, -1.0).is_err());
    }

    #[test]
    fn sector_form_matches_product() {
        let (k1, k2) = (-0.7, 1.3);
        let f = sector_form(k1, k2).unwrap();
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let s = rnd();
            let x = rnd();
            let direct = (x - k1 * s) * (k2 * s - x);
            let viaform = f.evaluate(&[s], &[x]).unwrap();
            assert!((direct - viaform).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn lipschitz_form_examples() {
        let f = lipschitz_form(1.0, 1, 1).unwrap();
        assert_eq!(f.evaluate(&[2.0], &[1.0]).unwrap(), 3.0);
        let f = lipschitz_form(0.5, 1, 1).unwrap();
        assert_eq!(f.evaluate(&[2.0], &[1.0]).unwrap(), 0.0);
        let f = lipschitz_form(2.0, 2, 1).unwrap();
        assert_eq!(f.evaluate(&[1.0, 1.0], &[3.0]).unwrap(), -1.0);
        assert!(lipschitz_form(0.0, 1, 1).is_err());
        assert!(lipschitz_form(-1.0, 1, 1).is_err());
    }

    #[test]
    fn evaluate_matches_block_expansion() {
        // random blocks, random arguments, against the written-out sum
        let mut seed = 0x853c49e6748fea9bu64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let (r, m) = (3, 2);
        let gs = RMat::from_rows(r, r, (0..r * r).map(|_| rnd()).collect()).unwrap();
        let gc = RMat::from_rows(m, r, (0..m * r).map(|_| rnd()).collect()).unwrap();
        let gx = RMat::from_rows(m, m, (0..m * m).map(|_| rnd()).collect()).unwrap();
        let f = QuadForm::new(gs.clone(), gc.clone(), gx.clone()).unwrap();
        let gss = gs.symmetrized();
        let gxs = gx.symmetrized();
        for _ in 0..1000 {
            let sigma: Vec<f64> = (0..r).map(|_| rnd()).collect();
            let xi: Vec<f64> = (0..m).map(|_| rnd()).collect();
            let mut direct = 0.0;
            for i in 0..r {
                for j in 0..r {
                    direct += sigma[i] * gss[(i, j)] * sigma[j];
                }
            }
            for i in 0..m {
                for j in 0..r {
                    direct += 2.0 * xi[i] * gc[(i, j)] * sigma[j];
                }
            }
            for i in 0..m {
                for j in 0..m {
                    direct += xi[i] * gxs[(i, j)] * xi[j];
                }
            }
            let v = f.evaluate(&sigma, &xi).unwrap();
            assert!((v - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }
}
