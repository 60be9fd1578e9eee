//! The Goodwin feedback loop: builders, the theta/rho-cap root-location
//! bounds, per-point certification with a rho-grid search, the parameter
//! region scan, and the simulation battery that validates certificates.
//!
//! The implemented plant is the coupled production chain
//! `x1' = -lam x1 - rho x3(t-tau) + g_rho(x3(t-tau))`,
//! `x2' = -lam x2 + x1`, `x3' = -lam x3 + x2`, whose characteristic
//! function is `(lam + p)^3 + rho e^{-tau p}` (up to sign) and whose
//! transfer function is `-1/((lam+p)^3 e^{tau p} + rho)`. The decoupled
//! variant (no x1 -> x2 -> x3 coupling) is available behind
//! [`GoodwinForm::Decoupled`] for comparison; its spectrum does not match
//! the chain's characteristic equation.

use crate::error::{Error, Result};
use crate::freqcheck::{circle_check, Certificate, SweepOptions, Verdict};
use crate::mat::RMat;
use crate::measure::DelayMeasure;
use crate::nonlin::{goodwin_slope_bound, Nonlinearity};
use crate::simulate::{fit_decay_rate, integrate, Trace};
use crate::system::DelaySystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// Which right-hand side to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoodwinForm {
    /// Production chain with x1 -> x2 -> x3 coupling (default).
    Coupled,
    /// Literal decoupled variant in which x2 and x3 relax independently.
    Decoupled,
}

/// Goodwin plant and its rho-shifted nonlinearity.
pub fn build_goodwin(tau: f64, lambda: f64, rho: f64) -> Result<(DelaySystem, Nonlinearity)> {
    build_goodwin_form(tau, lambda, rho, GoodwinForm::Coupled)
}

pub fn build_goodwin_form(
    tau: f64,
    lambda: f64,
    rho: f64,
    form: GoodwinForm,
) -> Result<(DelaySystem, Nonlinearity)> {
    if !(tau > 0.0) || !(lambda > 0.0) || rho < 0.0 {
        return Err(Error::InvalidParameter(
            "goodwin plant needs tau > 0, lambda > 0, rho >= 0".into(),
        ));
    }
    let m0 = match form {
        GoodwinForm::Coupled => RMat::from_rows(
            3,
            3,
            vec![
                -lambda, 0.0, 0.0, //
                1.0, -lambda, 0.0, //
                0.0, 1.0, -lambda,
            ],
        )?,
        GoodwinForm::Decoupled => {
            RMat::identity(3).scale(-lambda)
        }
    };
    let mut a = DelayMeasure::empty(3, 3, tau)?.with_atom(0.0, m0)?;
    if rho != 0.0 {
        let mut m_tau = RMat::zeros(3, 3);
        m_tau[(0, 2)] = -rho;
        a = a.with_atom(-tau, m_tau)?;
    }
    let b = RMat::from_rows(3, 1, vec![1.0, 0.0, 0.0])?;
    let c = DelayMeasure::empty(1, 3, tau)?
        .with_atom(-tau, RMat::from_rows(1, 3, vec![0.0, 0.0, 1.0])?)?;
    let sys = DelaySystem::new(tau, a, b, c)?;
    Ok((sys, Nonlinearity::goodwin(rho)?))
}

/// Unique solution of `tau lam tan(theta) = pi - 3 theta` on `(0, pi/3)`.
pub fn solve_theta(tau: f64, lambda: f64) -> Result<f64> {
    let tl = tau * lambda;
    if !(tl > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "solve_theta needs tau*lambda > 0, got {tl}"
        )));
    }
    // f is strictly increasing from -pi to +infinity on (0, pi/3)
    let f = |theta: f64| tl * theta.tan() - (PI - 3.0 * theta);
    let mut lo = 0.0f64;
    let mut hi = PI / 3.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root-location cap `(lam sec(theta))^3`: below it, the shifted chain's
/// characteristic roots stay in the open left half-plane.
pub fn rho_cap(tau: f64, lambda: f64) -> Result<f64> {
    let theta = solve_theta(tau, lambda)?;
    Ok((lambda / theta.cos()).powi(3))
}

/// Stationary point of the coupled chain: `x3` solves
/// `lam^3 x3 (1 + x3^3) = 1`, then `x2 = lam x3`, `x1 = lam x2`.
pub fn goodwin_fixed_point(lambda: f64) -> Result<[f64; 3]> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed point needs lambda > 0, got {lambda}"
        )));
    }
    let g = |x: f64| lambda.powi(3) * x * (1.0 + x * x * x) - 1.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x3 = 0.5 * (lo + hi);
    let x2 = lambda * x3;
    let x1 = lambda * x2;
    Ok([x1, x2, x3])
}

/// Outcome of certifying one `(tau, lambda)` point.
#[derive(Debug, Clone, Serialize)]
pub struct GoodwinPoint {
    pub tau: f64,
    pub lambda: f64,
    pub theta: f64,
    pub rho_cap: f64,
    pub rho_star: Option<f64>,
    pub margin: Option<f64>,
    pub certificate: Option<Certificate>,
    pub fixed_point: [f64; 3],
    /// Failure summary when no rho certifies.
    pub reason: Option<String>,
}

impl GoodwinPoint {
    pub fn certified(&self) -> bool {
        self.rho_star.is_some()
    }
}

/// Upper end of the admissible rho grid.
fn rho_grid_cap(cap: f64) -> f64 {
    (-goodwin_slope_bound()).min(cap) * (1.0 - 1e-6)
}

/// Scan rho over a uniform grid, run the root count and the circle check at
/// nu = 0 for each candidate, and keep the rho with the largest positive
/// margin.
pub fn goodwin_certify(
    tau: f64,
    lambda: f64,
    rho_grid_size: usize,
    opts: &SweepOptions,
) -> Result<GoodwinPoint> {
    let theta = solve_theta(tau, lambda)?;
    let cap = (lambda / theta.cos()).powi(3);
    let fixed_point = goodwin_fixed_point(lambda)?;
    let hi = rho_grid_cap(cap);
    let grid = rho_grid_size.max(2);
    let mut best: Option<(f64, f64, Certificate)> = None;
    let mut rejected = 0usize;
    let mut inconclusive = 0usize;
    let mut wrong_j = 0usize;
    for i in 0..grid {
        let rho = hi * i as f64 / (grid as f64 - 1.0);
        let (sys, nl) = build_goodwin(tau, lambda, rho)?;
        let k2 = nl.sector.expect("goodwin carries its sector").k2;
        let k1 = nl.sector.expect("goodwin carries its sector").k1;
        let cert = circle_check(&sys, k1, k2, 0.0, opts)?;
        match cert.verdict {
            Verdict::Certified => {
                if cert.j != Some(0) {
                    wrong_j += 1;
                    continue;
                }
                let margin = cert.margin.expect("certified margin");
                if best.as_ref().is_none_or(|(_, m, _)| margin > *m) {
                    best = Some((rho, margin, cert));
                }
            }
            Verdict::Rejected => rejected += 1,
            Verdict::Inconclusive => inconclusive += 1,
        }
    }
    let (rho_star, margin, certificate, reason) = match best {
        Some((rho, m, cert)) => (Some(rho), Some(m), Some(cert), None),
        None => (
            None,
            None,
            None,
            Some(format!(
                "no admissible rho certified (rejected {rejected}, inconclusive {inconclusive}, unstable-roots {wrong_j} of {grid})"
            )),
        ),
    };
    Ok(GoodwinPoint {
        tau,
        lambda,
        theta,
        rho_cap: cap,
        rho_star,
        margin,
        certificate,
        fixed_point,
        reason,
    })
}

/// One row of the region scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub tau: f64,
    pub lambda: f64,
    pub certified: bool,
    pub rho_star: Option<f64>,
    pub margin: Option<f64>,
    pub reason: Option<String>,
}

/// Uniform grid helper: `count` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count as f64 - 1.0))
        .collect()
}

/// Certify every node of the `(tau, lambda)` grid. Rows are ordered by
/// (lambda index, tau index); nodes evaluate in parallel.
pub fn region_scan(
    tau_grid: &[f64],
    lambda_grid: &[f64],
    rho_grid_size: usize,
    opts: &SweepOptions,
) -> Result<Vec<ScanRow>> {
    if tau_grid.len() < 2 || lambda_grid.len() < 2 {
        return Err(Error::InvalidParameter(
            "region scan needs at least a 2x2 grid".into(),
        ));
    }
    let nodes: Vec<(f64, f64)> = lambda_grid
        .iter()
        .flat_map(|&l| tau_grid.iter().map(move |&t| (t, l)))
        .collect();
    nodes
        .par_iter()
        .map(|&(tau, lambda)| {
            let point = goodwin_certify(tau, lambda, rho_grid_size, opts)?;
            Ok(ScanRow {
                tau,
                lambda,
                certified: point.certified(),
                rho_star: point.rho_star,
                margin: point.margin,
                reason: point.reason,
            })
        })
        .collect()
}

/// CSV emitter for scan rows: `tau,lambda,certified,rho_star,margin,reason`.
pub fn write_region_csv<W: Write>(rows: &[ScanRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "tau,lambda,certified,rho_star,margin,reason")?;
    for row in rows {
        let rho = row
            .rho_star
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        let margin = row.margin.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let reason = row.reason.as_deref().unwrap_or("");
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{}",
            row.tau,
            row.lambda,
            u8::from(row.certified),
            rho,
            margin,
            reason.replace(',', ";")
        )?;
    }
    Ok(())
}

/// Minimal SVG heatmap of the certified region (one rect per node).
pub fn write_region_svg<W: Write>(
    rows: &[ScanRow],
    tau_count: usize,
    lambda_count: usize,
    mut out: W,
) -> std::io::Result<()> {
    let cell = 14usize;
    let width = tau_count * cell;
    let height = lambda_count * cell;
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )?;
    for (idx, row) in rows.iter().enumerate() {
        let i = idx / tau_count; // lambda index
        let j = idx % tau_count; // tau index
        let x = j * cell;
        // lambda grows upward
        let y = (lambda_count - 1 - i) * cell;
        let color = if row.certified { "#2a6f4e" } else { "#d9d9d9" };
        writeln!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{color}\"><title>tau={:.4} lambda={:.4}</title></rect>",
            row.tau, row.lambda
        )?;
    }
    writeln!(out, "</svg>")
}

/// Result of the simulation battery at one certified point.
#[derive(Debug, Clone, Serialize)]
pub struct PointValidation {
    pub pairs: usize,
    /// Smallest pairwise contraction factor d(start)/d(end).
    pub min_contraction: f64,
    /// Largest trailing-segment distance to the fixed point at the horizon.
    pub max_fp_distance: f64,
    /// Smallest fitted decay rate (infinite when a pair merged below
    /// resolution, which counts as success).
    pub min_rate: f64,
    /// Most negative component seen across all trajectories.
    pub min_component: f64,
}

/// Simulate `pairs` random positive constant-history pairs to `t_end` and
/// measure contraction, approach to the stationary point, and cone
/// invariance. Deterministic for a fixed seed.
pub fn validate_point(
    tau: f64,
    lambda: f64,
    pairs: usize,
    t_end: f64,
    step: f64,
    seed: u64,
) -> Result<PointValidation> {
    let (sys, nl) = build_goodwin(tau, lambda, 0.0)?;
    let fp = goodwin_fixed_point(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_contraction = f64::INFINITY;
    let mut max_fp_distance = 0.0f64;
    let mut min_rate = f64::INFINITY;
    let mut min_component = f64::INFINITY;
    for _ in 0..pairs {
        let ha: [f64; 3] = std::array::from_fn(|i| fp[i] * rng.gen_range(0.25..2.0));
        let hb: [f64; 3] = std::array::from_fn(|i| fp[i] * rng.gen_range(0.25..2.0));
        let ta = integrate(&sys, Some(&nl), None, &move |_| ha.to_vec(), t_end, step)?;
        let tb = integrate(&sys, Some(&nl), None, &move |_| hb.to_vec(), t_end, step)?;
        let d0 = ta.segment_sup_diff(&tb, 0.0);
        let d1 = ta.segment_sup_diff(&tb, ta.t_end);
        min_contraction = min_contraction.min(if d1 > 0.0 { d0 / d1 } else { f64::INFINITY });
        for tr in [&ta, &tb] {
            max_fp_distance = max_fp_distance.max(trailing_fp_distance(tr, &fp));
            min_component = min_component.min(min_sample(tr));
        }
        let window = (0.2 * t_end, 0.95 * t_end);
        match fit_decay_rate(&ta, &tb, window) {
            Ok(fit) => min_rate = min_rate.min(fit.rate),
            Err(Error::DifferenceUnderflow { .. }) => {} // merged: success
            Err(e) => return Err(e),
        }
    }
    Ok(PointValidation {
        pairs,
        min_contraction,
        max_fp_distance,
        min_rate,
        min_component,
    })
}

fn trailing_fp_distance(tr: &Trace, fp: &[f64; 3]) -> f64 {
    let span = (tr.tau / tr.h).round() as usize;
    let hi = tr.steps();
    let lo = hi.saturating_sub(span);
    let mut worst = 0.0f64;
    for k in lo..=hi {
        for i in 0..3 {
            worst = worst.max((tr.sample(k)[i] - fp[i]).abs());
        }
    }
    worst
}

fn min_sample(tr: &Trace) -> f64 {
    let mut m = f64::INFINITY;
    for k in 0..=tr.steps() {
        for v in tr.sample(k) {
            m = m.min(*v);
        }
    }
    m
}
