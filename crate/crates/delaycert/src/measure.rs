//! Matrix-valued Stieltjes measures on [-tau, 0].
//!
//! A measure is a finite list of atoms (point masses with matrix weights)
//! plus a piecewise-polynomial density. This covers discrete and distributed
//! delays while keeping every integral either closed-form or one Gauss
//! panel away from machine precision.

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::mat::RMat;
use crate::quadrature::integrate_adaptive_real;
use num_complex::Complex64;

/// Point mass `M * delta_{theta}` with `theta` in `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub theta: f64,
    pub matrix: RMat,
}

/// Matrix polynomial density on a subinterval `[lower, upper]` of `[-tau, 0]`.
/// Coefficients are listed lowest degree first: density(theta) = sum_d coeffs[d] * theta^d.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub lower: f64,
    pub upper: f64,
    pub coeffs: Vec<RMat>,
}

/// Matrix-valued measure of bounded variation on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMeasure {
    rows: usize,
    cols: usize,
    tau: f64,
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
}

impl DelayMeasure {
    /// Empty measure (integrates everything to the zero matrix).
    pub fn empty(rows: usize, cols: usize, tau: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("zero measure dimension".into()));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        Ok(DelayMeasure {
            rows,
            cols,
            tau,
            atoms: Vec::new(),
            density: Vec::new(),
        })
    }

    pub fn with_atom(mut self, theta: f64, matrix: RMat) -> Result<Self> {
        if matrix.rows != self.rows || matrix.cols != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "atom weight is {}x{}, measure is {}x{}",
                matrix.rows, matrix.cols, self.rows, self.cols
            )));
        }
        if theta < -self.tau - 1e-12 || theta > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "atom location {theta} outside [-{}, 0]",
                self.tau
            )));
        }
        self.atoms.push(Atom {
            theta: theta.clamp(-self.tau, 0.0),
            matrix,
        });
        Ok(self)
    }

    pub fn with_density(mut self, lower: f64, upper: f64, coeffs: Vec<RMat>) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidParameter(format!(
                "density interval [{lower}, {upper}] must satisfy lower < upper"
            )));
        }
        if lower < -self.tau - 1e-12 || upper > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density interval [{lower}, {upper}] outside [-{}, 0]",
                self.tau
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("density needs at least one coefficient".into()));
        }
        for c in &coeffs {
            if c.rows != self.rows || c.cols != self.cols {
                return Err(Error::DimensionMismatch(format!(
                    "density coefficient is {}x{}, measure is {}x{}",
                    c.rows, c.cols, self.rows, self.cols
                )));
            }
        }
        // disjoint interiors with the pieces already present
        for p in &self.density {
            if lower < p.upper - 1e-14 && p.lower < upper - 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "density interval [{lower}, {upper}] overlaps [{}, {}]",
                    p.lower, p.upper
                )));
            }
        }
        self.density.push(DensityPiece {
            lower: lower.clamp(-self.tau, 0.0),
            upper: upper.clamp(-self.tau, 0.0),
            coeffs,
        });
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    /// Discrete lags carried by the atoms (as positive lag values).
    pub fn atom_lags(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| -a.theta).collect()
    }

    /// Sum of two measures over the same rectangle of dimensions.
    pub fn sum(&self, other: &DelayMeasure) -> Result<DelayMeasure> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("measure addition".into()));
        }
        let tau = self.tau.max(other.tau);
        let mut out = DelayMeasure {
            rows: self.rows,
            cols: self.cols,
            tau,
            atoms: self.atoms.clone(),
            density: self.density.clone(),
        };
        out.atoms.extend(other.atoms.iter().cloned());
        // overlapping densities are legal for a sum; keep pieces separate
        out.density.extend(other.density.iter().cloned());
        Ok(out)
    }

    /// The theta-weighted measure `theta d mu(theta)`; evaluating it at `p`
    /// gives the derivative in `p` of `eval_at(p)`.
    pub fn theta_weighted(&self) -> DelayMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                theta: a.theta,
                matrix: a.matrix.scale(a.theta),
            })
            .collect();
        let density = self
            .density
            .iter()
            .map(|p| {
                let mut coeffs = Vec::with_capacity(p.coeffs.len() + 1);
                coeffs.push(RMat::zeros(self.rows, self.cols));
                coeffs.extend(p.coeffs.iter().cloned());
                DensityPiece {
                    lower: p.lower,
                    upper: p.upper,
                    coeffs,
                }
            })
            .collect();
        DelayMeasure {
            rows: self.rows,
            cols: self.cols,
            tau: self.tau,
            atoms,
            density,
        }
    }

    /// `int e^{p theta} d mu(theta)`, atoms in closed form, density pieces by
    /// exact exponential-polynomial integrals.
    pub fn eval_at(&self, p: Complex64) -> Result<CMat> {
        let mut out = CMat::zeros(self.rows, self.cols);
        for a in &self.atoms {
            let ex = p.re * a.theta;
            if ex > MAX_EXPONENT {
                return Err(Error::Overflow { p, exponent: ex });
            }
            let w = (p * a.theta).exp();
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out[(i, j)] += w * a.matrix[(i, j)];
                }
            }
        }
        for piece in &self.density {
            let deg = piece.coeffs.len() - 1;
            let e = exp_poly_integrals(p, piece.lower, piece.upper, deg)?;
            for (d, coeff) in piece.coeffs.iter().enumerate() {
                let w = e[d];
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out[(i, j)] += w * coeff[(i, j)];
                    }
                }
            }
        }
        if !out.is_finite() {
            return Err(Error::Overflow {
                p,
                exponent: p.re.abs() * self.tau,
            });
        }
        Ok(out)
    }

    /// Total variation: sum of spectral norms of atom weights plus the
    /// integrals of the pointwise spectral norm of the density.
    pub fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        for a in &self.atoms {
            tv += a.matrix.spectral_norm();
        }
        for piece in &self.density {
            let mut f = |theta: f64| {
                // evaluate the matrix polynomial at theta, Horner style
                let mut m = RMat::zeros(self.rows, self.cols);
                for coeff in piece.coeffs.iter().rev() {
                    for k in 0..m.data.len() {
                        m.data[k] = m.data[k] * theta + coeff.data[k];
                    }
                }
                m.spectral_norm()
            };
            let (v, _) = integrate_adaptive_real(&mut f, piece.lower, piece.upper, 1e-13, 1e-12, 4000);
            tv += v;
        }
        tv
    }

    /// Largest polynomial degree over the density pieces, if any.
    pub fn max_density_degree(&self) -> Option<usize> {
        self.density.iter().map(|p| p.coeffs.len() - 1).max()
    }
}

/// Exponents beyond this would overflow `exp` in double precision.
const MAX_EXPONENT: f64 = 709.0;

/// Exact integrals `E_d = int_l^u e^{p theta} theta^d d theta` for d = 0..=deg.
///
/// Computed through the shifted moments `J_i = int_0^h e^{+-p s} s^i ds` with
/// `h = u - l`, expanding around whichever endpoint keeps the internal
/// exponential bounded. The closed-form recurrence is used when `|p| h` is
/// large and a truncated power series otherwise, which avoids the
/// catastrophic cancellation of the recurrence near p = 0.
pub fn exp_poly_integrals(p: Complex64, l: f64, u: f64, deg: usize) -> Result<Vec<Complex64>> {
    let h = u - l;
    let exl = p.re * l;
    let exu = p.re * u;
    if exl > MAX_EXPONENT || exu > MAX_EXPONENT {
        return Err(Error::Overflow {
            p,
            exponent: exl.max(exu),
        });
    }
    let ph = p * h;
    // (anchor endpoint, sign of the substitution s-direction, moments)
    let (anchor, sign, j) = if ph.norm() <= 8.0 {
        (l, 1.0, shifted_moments_series(ph, h, deg))
    } else if p.re <= 0.0 {
        // theta = l + s: internal factor e^{p h} decays
        (l, 1.0, shifted_moments_recurrence(p, h, deg))
    } else {
        // theta = u - s: internal factor e^{-p h} decays
        (u, -1.0, shifted_moments_recurrence(-p, h, deg))
    };
    // E_d = e^{p a} * sum_i binom(d, i) a^{d-i} sign^i J_i
    let epa = (p * anchor).exp();
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (d, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0f64;
        let mut s_pow = 1.0f64;
        for (i, ji) in j.iter().enumerate().take(d + 1) {
            let apow = anchor.powi((d - i) as i32);
            acc += binom * apow * s_pow * ji;
            binom *= (d - i) as f64 / (i as f64 + 1.0);
            s_pow *= sign;
        }
        *slot = epa * acc;
    }
    Ok(out)
}

/// `J_i = int_0^h e^{p s} s^i ds` by the power series in (p h); entire in p,
/// no cancellation for small and moderate |p h|.
fn shifted_moments_series(ph: Complex64, h: f64, deg: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(deg + 1);
    for i in 0..=deg {
        // term tracks (ph)^jj / jj!; each series coefficient divides by (i+jj+1)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(1.0 / (i as f64 + 1.0), 0.0);
        for jj in 1..400 {
            term *= ph / jj as f64;
            let contrib = term / (i as f64 + jj as f64 + 1.0);
            sum += contrib;
            if contrib.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        out.push(sum * h.powi(i as i32 + 1));
    }
    out
}

/// Closed-form integration by parts, stable for large |p h|:
/// J_0 = (e^{p h} - 1)/p, J_i = (e^{p h} h^i - i J_{i-1})/p.
fn shifted_moments_recurrence(p: Complex64, h: f64, deg: usize) -> Vec<Complex64> {
    let eph = (p * h).exp();
    let mut out = Vec::with_capacity(deg + 1);
    let mut prev = (eph - 1.0) / p;
    out.push(prev);
    for i in 1..=deg {
        let cur = (eph * h.powi(i as i32) - i as f64 * prev) / p;
        out.push(cur);
        prev = cur;
    }
    out
}
