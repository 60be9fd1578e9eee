//! Method-of-steps integration with dense output.
//!
//! Fixed-step classical RK4; the step is snapped so every discrete lag is an
//! integer number of steps, which keeps solution breakpoints on grid nodes.
//! Delayed reads go through a cubic Hermite interpolant built from node
//! values and right-hand-side evaluations; distributed parts integrate the
//! interpolant with per-segment Gauss rules.

use crate::error::{Error, Result};
use crate::measure::DelayMeasure;
use crate::nonlin::Nonlinearity;
use crate::quadrature::gauss_legendre;
use crate::system::DelaySystem;
use std::io::Write;

/// Dense-output trajectory on `[-tau, t_end]`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub n: usize,
    pub tau: f64,
    pub h: f64,
    pub t_end: f64,
    /// State at `t_k = k h`, `k = 0..=steps`.
    samples: Vec<Vec<f64>>,
    /// Right-hand side at the same nodes (Hermite slopes).
    derivs: Vec<Vec<f64>>,
    /// History samples at `-tau + k h` for queries left of zero.
    history: Vec<Vec<f64>>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k]
    }

    pub fn deriv(&self, k: usize) -> &[f64] {
        &self.derivs[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Evaluate the trajectory anywhere in `[-tau, t_end]`. Queries in
    /// `[0, t_end]` use the cubic Hermite pieces; history queries use linear
    /// interpolation of the stored history samples.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 {
            let pos = (t + self.tau) / self.h;
            let k = (pos.floor() as isize).clamp(0, self.history.len() as isize - 2) as usize;
            let frac = (pos - k as f64).clamp(0.0, 1.0);
            let a = &self.history[k];
            let b = &self.history[k + 1];
            return (0..self.n)
                .map(|i| a[i] * (1.0 - frac) + b[i] * frac)
                .collect();
        }
        let steps = self.steps();
        let pos = t / self.h;
        let k = (pos.floor() as usize).min(steps - 1);
        let s = pos - k as f64;
        hermite_eval(
            &self.samples[k],
            &self.derivs[k],
            &self.samples[k + 1],
            &self.derivs[k + 1],
            self.h,
            s,
        )
    }

    /// Sup over the trailing segment `[t - tau, t]` of the per-node infinity
    /// norm of the difference to `other`. Both traces must share the grid.
    pub fn segment_sup_diff(&self, other: &Trace, t: f64) -> f64 {
        let k_hi = ((t / self.h).round() as isize).clamp(0, self.steps() as isize) as usize;
        let span = (self.tau / self.h).round() as isize;
        let k_lo = (k_hi as isize - span).max(0) as usize;
        let mut sup = 0.0f64;
        for k in k_lo..=k_hi {
            for i in 0..self.n {
                sup = sup.max((self.samples[k][i] - other.samples[k][i]).abs());
            }
        }
        sup
    }

    /// CSV dump: `t, x_1..x_n`, one row per grid node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for i in 1..=self.n {
            header.push_str(&format!(",x_{i}"));
        }
        writeln!(out, "{header}")?;
        for k in 0..self.samples.len() {
            let mut line = format!("{:.16e}", self.time(k));
            for v in &self.samples[k] {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn hermite_eval(
    x0: &[f64],
    d0: &[f64],
    x1: &[f64],
    d1: &[f64],
    h: f64,
    s: f64,
) -> Vec<f64> {
    let s2 = s * s;
    let s3 = s2 * s;
    let b00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let b10 = s3 - 2.0 * s2 + s;
    let b01 = -2.0 * s3 + 3.0 * s2;
    let b11 = s3 - s2;
    (0..x0.len())
        .map(|i| b00 * x0[i] + h * b10 * d0[i] + b01 * x1[i] + h * b11 * d1[i])
        .collect()
}

/// Snap the step so that every discrete lag is an integer multiple of it.
fn snap_step(lags: &[f64], h_request: f64, tau: f64) -> Result<f64> {
    if lags.is_empty() {
        return Ok(h_request.min(tau));
    }
    let base = lags.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = (base / h_request).round().max(1.0);
    let h = base / k;
    for &lag in lags {
        let m = (lag / h).round();
        if (lag - m * h).abs() > 1e-12 * (1.0 + lag) {
            return Err(Error::InvalidParameter(format!(
                "discrete lags are incommensurate at step {h}: lag {lag} is not a multiple"
            )));
        }
    }
    Ok(h)
}

struct DenseState<'a> {
    n: usize,
    h: f64,
    tau: f64,
    history: &'a dyn Fn(f64) -> Vec<f64>,
    samples: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl<'a> DenseState<'a> {
    /// Value at absolute time `t`; extrapolates the last completed Hermite
    /// piece for stage queries that run ahead of the completed grid.
    fn eval(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 {
            return (self.history)(t.max(-self.tau));
        }
        // a Hermite piece is complete once both endpoints carry a slope
        let pieces = self.samples.len().min(self.derivs.len()).saturating_sub(1);
        let pos = t / self.h;
        let mut k = pos.floor() as usize;
        if k >= pieces {
            if pieces == 0 {
                // first step: linear extrapolation from the initial slope
                let x0 = &self.samples[0];
                if let Some(d0) = self.derivs.first() {
                    return (0..self.n).map(|i| x0[i] + t * d0[i]).collect();
                }
                return x0.clone();
            }
            k = pieces - 1;
        }
        let s = pos - k as f64;
        hermite_eval(
            &self.samples[k],
            &self.derivs[k],
            &self.samples[k + 1],
            &self.derivs[k + 1],
            self.h,
            s,
        )
    }
}

/// Apply a measure to the trajectory segment ending at stage time `s`:
/// `int d mu(theta) x(s + theta)`. Atoms at zero read the explicit stage
/// state; other atoms and densities read the dense output. Density pieces
/// are integrated per grid segment so the integrand stays polynomial under
/// the Gauss rule.
fn apply_measure(
    mu: &DelayMeasure,
    s: f64,
    stage_state: &[f64],
    dense: &DenseState<'_>,
    rule: &(Vec<f64>, Vec<f64>),
) -> Vec<f64> {
    let (rows, cols) = mu.dims();
    let mut out = vec![0.0; rows];
    for atom in mu.atoms() {
        let xv: Vec<f64>;
        let x = if atom.theta == 0.0 {
            stage_state
        } else {
            xv = dense.eval(s + atom.theta);
            &xv
        };
        for i in 0..rows {
            let mut acc = 0.0;
            for j in 0..cols {
                acc += atom.matrix[(i, j)] * x[j];
            }
            out[i] += acc;
        }
    }
    for piece in mu.density() {
        // split [s+lower, s+upper] at grid nodes
        let t_lo = s + piece.lower;
        let t_hi = s + piece.upper;
        let h = dense.h;
        let mut seg_lo = t_lo;
        while seg_lo < t_hi - 1e-14 {
            let next_node = (seg_lo / h).floor() * h + h;
            let seg_hi = next_node.min(t_hi);
            let half = 0.5 * (seg_hi - seg_lo);
            let mid = 0.5 * (seg_hi + seg_lo);
            for (node, w) in rule.0.iter().zip(&rule.1) {
                let t_abs = mid + half * node;
                let theta = t_abs - s;
                let x = dense.eval(t_abs);
                // density(theta) x, Horner in theta
                let mut acc = vec![0.0; rows];
                for coeff in piece.coeffs.iter().rev() {
                    for (i, slot) in acc.iter_mut().enumerate() {
                        let mut dot = 0.0;
                        for j in 0..cols {
                            dot += coeff[(i, j)] * x[j];
                        }
                        *slot = *slot * theta + dot;
                    }
                }
                for i in 0..rows {
                    out[i] += w * half * acc[i];
                }
            }
            seg_lo = seg_hi;
        }
    }
    out
}

/// Integrate `x'(t) = A x_t + B F(C x_t) + forcing(t)` from the history
/// segment with classical RK4 and dense delayed reads.
pub fn integrate(
    sys: &DelaySystem,
    nonlin: Option<&Nonlinearity>,
    forcing: Option<&(dyn Fn(f64) -> Vec<f64> + Sync)>,
    history: &(dyn Fn(f64) -> Vec<f64> + Sync),
    t_end: f64,
    h_request: f64,
) -> Result<Trace> {
    if !(t_end > 0.0) || !(h_request > 0.0) {
        return Err(Error::InvalidParameter(
            "t_end and step must be positive".into(),
        ));
    }
    if let Some(nl) = nonlin {
        let (r_in, m_out) = nl.dims();
        if r_in != sys.r || m_out != sys.m {
            return Err(Error::DimensionMismatch(format!(
                "nonlinearity maps R^{r_in} -> R^{m_out}, plant wants R^{} -> R^{}",
                sys.r, sys.m
            )));
        }
    }
    let lags = sys.discrete_lags();
    let h = snap_step(&lags, h_request, sys.tau)?;
    let steps = (t_end / h - 1e-9).ceil().max(1.0) as usize;

    let max_deg = sys
        .a
        .max_density_degree()
        .into_iter()
        .chain(sys.c.max_density_degree())
        .max()
        .unwrap_or(0);
    // Gauss rule exact past density degree + cubic interpolant
    let rule = gauss_legendre((max_deg + 6).div_ceil(2));

    let x0 = history(0.0);
    if x0.len() != sys.n {
        return Err(Error::DimensionMismatch(format!(
            "history returns {} components, state dimension is {}",
            x0.len(),
            sys.n
        )));
    }
    let mut dense = DenseState {
        n: sys.n,
        h,
        tau: sys.tau,
        history: &history,
        samples: vec![x0.clone()],
        derivs: Vec::new(),
    };

    let rhs = |s: f64, y: &[f64], dense: &DenseState<'_>| -> Result<Vec<f64>> {
        let mut dx = apply_measure(&sys.a, s, y, dense, &rule);
        if let Some(nl) = nonlin {
            let sigma = apply_measure(&sys.c, s, y, dense, &rule);
            let f = nl.eval(&sigma)?;
            for i in 0..sys.n {
                let mut acc = 0.0;
                for j in 0..sys.m {
                    acc += sys.b[(i, j)] * f[j];
                }
                dx[i] += acc;
            }
        }
        if let Some(w) = forcing {
            let wv = w(s);
            for i in 0..sys.n {
                dx[i] += wv[i];
            }
        }
        Ok(dx)
    };

    let d0 = rhs(0.0, &x0, &dense)?;
    dense.derivs.push(d0);

    for k in 0..steps {
        let t = k as f64 * h;
        let y = dense.samples[k].clone();
        let k1 = dense.derivs[k].clone();
        let y2: Vec<f64> = (0..sys.n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
        let k2 = rhs(t + 0.5 * h, &y2, &dense)?;
        let y3: Vec<f64> = (0..sys.n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
        let k3 = rhs(t + 0.5 * h, &y3, &dense)?;
        let y4: Vec<f64> = (0..sys.n).map(|i| y[i] + h * k3[i]).collect();
        let k4 = rhs(t + h, &y4, &dense)?;
        let next: Vec<f64> = (0..sys.n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }
        dense.samples.push(next);
        let dn = rhs(t + h, &dense.samples[k + 1], &dense)?;
        dense.derivs.push(dn);
    }

    // sample the history on the grid for later queries left of zero
    let hist_nodes = (sys.tau / h).ceil() as usize;
    let mut hist = Vec::with_capacity(hist_nodes + 1);
    for k in 0..=hist_nodes {
        let t = (-(hist_nodes as f64) + k as f64) * h;
        hist.push(history(t.max(-sys.tau)));
    }

    Ok(Trace {
        n: sys.n,
        tau: sys.tau,
        h,
        t_end: steps as f64 * h,
        samples: dense.samples,
        derivs: dense.derivs,
        history: hist,
    })
}

/// Log-linear decay fit of the trailing-segment sup distance between two
/// trajectories.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Fitted exponential rate (positive means contraction).
    pub rate: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the least-squares line in log space.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope of `log || x_a - x_b ||` over the window, where the
/// norm is the sup over the trailing segment `[t - tau, t]`. Returns the
/// negated slope, so positive rates mean the pair contracts.
pub fn fit_decay_rate(a: &Trace, b: &Trace, window: (f64, f64)) -> Result<DecayFit> {
    if (a.h - b.h).abs() > 1e-13 || a.n != b.n {
        return Err(Error::DimensionMismatch(
            "decay fit needs traces on a shared grid".into(),
        ));
    }
    let (w_lo, w_hi) = window;
    if !(w_lo < w_hi) || w_lo < 0.0 || w_hi > a.t_end.min(b.t_end) + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "fit window [{w_lo}, {w_hi}] outside the simulated range"
        )));
    }
    let k_lo = (w_lo / a.h).ceil() as usize;
    let k_hi = ((w_hi / a.h).floor() as usize).min(a.steps().min(b.steps()));
    let d_start = a.segment_sup_diff(b, a.time(k_lo));
    if d_start < 1e-13 {
        return Err(Error::DifferenceUnderflow {
            t: a.time(k_lo),
            diff: d_start,
        });
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for k in k_lo..=k_hi {
        let d = a.segment_sup_diff(b, a.time(k));
        if d > 1e-300 {
            ts.push(a.time(k));
            ys.push(d.ln());
        }
    }
    if ts.len() < 2 {
        return Err(Error::InvalidParameter(
            "fit window contains fewer than two usable nodes".into(),
        ));
    }
    let n = ts.len() as f64;
    let tbar = ts.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        sxx += (t - tbar) * (t - tbar);
        sxy += (t - tbar) * (y - ybar);
    }
    let slope = sxy / sxx;
    let mut ss = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        let fitted = ybar + slope * (t - tbar);
        ss += (y - fitted) * (y - fitted);
    }
    Ok(DecayFit {
        rate: -slope,
        window,
        residual: (ss / n as f64).sqrt(),
        points: ts.len(),
    })
}
