//! Frequency-domain verification: sweep the largest eigenvalue of the
//! constraint form's Hermitian matrix along `p = -nu + i omega`, certify the
//! tail analytically, and package the outcome together with the root count
//! as a certificate.

use crate::cmat::{lambda_max_hermitian, CMat};
use crate::error::{Error, Result};
use crate::nonlin::Nonlinearity;
use crate::quadform::{lipschitz_form, sector_form, QuadForm};
use crate::spectrum::count_roots_right_of;
use crate::system::DelaySystem;
use crate::transfer::eval_transfer;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Margins at or below this are too thin to certify: the paper's inequality
/// is strict and numerical ties must not pass.
pub const MIN_CERTIFIED_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Certified,
    Rejected,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    /// j = 0: every trajectory converges with rate at least nu.
    Stability,
    /// j > 0: a j-dimensional attracting invariant manifold with tracking
    /// exponent nu.
    InertialManifold,
}

/// Sweep bookkeeping stored in a certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepInfo {
    pub omega_cap: f64,
    pub evaluations: usize,
    pub refinement_depth: usize,
}

/// Outcome of a frequency check.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub kind: Option<CertificateKind>,
    pub nu: f64,
    /// Unstable-root count right of `Re p = -nu`, when the count succeeded.
    pub j: Option<usize>,
    /// `-sup` of the swept quantity; positive exactly when the frequency
    /// condition holds with room to spare.
    pub margin: Option<f64>,
    pub worst_omega: Option<f64>,
    pub sweep: Option<SweepInfo>,
    /// Certified upper bound on the swept quantity beyond `omega_cap`
    /// (negative by construction of the cap).
    pub tail_bound: Option<f64>,
    pub reason: Option<String>,
}

impl Certificate {
    fn inconclusive(nu: f64, reason: String) -> Self {
        Certificate {
            verdict: Verdict::Inconclusive,
            kind: None,
            nu,
            j: None,
            margin: None,
            worst_omega: None,
            sweep: None,
            tail_bound: None,
            reason: Some(reason),
        }
    }
}

/// Hermitian matrix H with `xi^H H xi = G^C(-W xi, xi)`:
/// `H = W^H G_sigma W - (G_cross W + (G_cross W)^H) + G_xi`.
pub fn hermitian_form_at(form: &QuadForm, w: &CMat) -> Result<CMat> {
    if w.rows != form.dim_sigma() || w.cols != form.dim_xi() {
        return Err(Error::DimensionMismatch(format!(
            "transfer matrix is {}x{}, form wants {}x{}",
            w.rows,
            w.cols,
            form.dim_sigma(),
            form.dim_xi()
        )));
    }
    let gs = form.g_sigma().to_complex();
    let gc = form.g_cross().to_complex();
    let gx = form.g_xi().to_complex();
    let wh = w.adjoint();
    let mut h = wh.mul(&gs)?.mul(w)?;
    let cw = gc.mul(w)?;
    h = h.sub(&cw)?.sub(&cw.adjoint())?.add(&gx)?;
    // symmetrize away roundoff in the skew part
    let ha = h.adjoint();
    Ok(h.add(&ha)?.scale(Complex64::new(0.5, 0.0)))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(h: &CMat) -> f64 {
    lambda_max_hermitian(h)
}

/// Certified bound on the swept eigenvalue beyond `omega`: with
/// `wbar = e^{nu tau} TV(c) |B|_2 / (omega - e^{nu tau} TV(a))` we have
/// `lambda_max(H) <= |G_sigma|_2 wbar^2 + 2 |G_cross|_2 wbar + lambda_max(G_xi)`.
pub fn tail_cap(
    sys: &DelaySystem,
    form: &QuadForm,
    nu: f64,
    omega: f64,
) -> Result<f64> {
    let tv_a = sys.a.total_variation();
    let tv_c = sys.c.total_variation();
    let b_norm = sys.b.spectral_norm();
    tail_cap_inner(sys.tau, tv_a, tv_c, b_norm, form, nu, omega)
}

fn tail_cap_inner(
    tau: f64,
    tv_a: f64,
    tv_c: f64,
    b_norm: f64,
    form: &QuadForm,
    nu: f64,
    omega: f64,
) -> Result<f64> {
    let growth = (nu * tau).exp();
    let minimal = growth * tv_a;
    if omega <= minimal {
        return Err(Error::OmegaTooSmall { omega, minimal });
    }
    let wbar = growth * tv_c * b_norm / (omega - minimal);
    let gs_norm = form.g_sigma().spectral_norm();
    let gc_norm = form.g_cross().spectral_norm();
    let gx_max = lambda_max_hermitian(&form.g_xi().to_complex());
    Ok(gs_norm * wbar * wbar + 2.0 * gc_norm * wbar + gx_max)
}

/// Knobs for [`verify_frequency_condition`] and the check wrappers.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Nodes of the initial uniform grid on `[0, omega_cap]`.
    pub grid_nodes: usize,
    /// Stop refining once the sup improves by less than this between levels.
    pub refine_tol: f64,
    /// Hard cap on refinement levels.
    pub max_refine_depth: usize,
    /// Give up on the tail search beyond this frequency.
    pub omega_limit: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            grid_nodes: 2048,
            refine_tol: 1e-9,
            max_refine_depth: 200,
            omega_limit: 1e9,
        }
    }
}

/// Raw sweep result.
#[derive(Debug, Clone, Copy)]
pub struct SweepOutcome {
    /// Supremum estimate of the swept quantity over `[0, omega_cap]`.
    pub sup: f64,
    pub worst_omega: f64,
    pub omega_cap: f64,
    /// Certified bound beyond `omega_cap` (negative).
    pub tail_bound: f64,
    pub evaluations: usize,
    pub refinement_depth: usize,
}

/// Pick the frequency cap by doubling until the analytic tail bound goes
/// negative, then sweep `value(omega)` on `[0, cap]` with an initial uniform
/// grid and trisection refinement around every local maximum.
///
/// Conjugate symmetry of real systems makes the sweep one-sided.
fn sweep_sup<F>(
    sys: &DelaySystem,
    form_for_tail: &QuadForm,
    nu: f64,
    opts: &SweepOptions,
    value: F,
) -> Result<SweepOutcome>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let tv_a = sys.a.total_variation();
    let tv_c = sys.c.total_variation();
    let b_norm = sys.b.spectral_norm();
    let minimal = (nu * sys.tau).exp() * tv_a;
    let mut omega = if minimal > 0.0 { 2.0 * minimal } else { 1.0 };
    let tail_bound = loop {
        match tail_cap_inner(sys.tau, tv_a, tv_c, b_norm, form_for_tail, nu, omega) {
            Ok(cap) if cap < 0.0 => break cap,
            Ok(_) | Err(Error::OmegaTooSmall { .. }) => {
                omega *= 2.0;
                if omega > opts.omega_limit {
                    return Err(Error::TailUnbounded {
                        limit: opts.omega_limit,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    };

    let n = opts.grid_nodes.max(8);
    let step = omega / (n as f64 - 1.0);
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| value(i as f64 * step))
        .collect::<Result<Vec<f64>>>()?;
    let mut evaluations = n;

    let mut sup = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for (i, &v) in values.iter().enumerate() {
        if v > sup {
            sup = v;
            worst = i as f64 * step;
        }
    }

    // candidate intervals around local maxima of the grid
    let mut candidates: Vec<(f64, f64, f64, f64)> = Vec::new(); // (lo, hi, best_val, best_x)
    for i in 0..n {
        let v = values[i];
        let left_ok = i == 0 || values[i - 1] <= v;
        let right_ok = i + 1 == n || values[i + 1] <= v;
        if left_ok && right_ok {
            let lo = if i == 0 { 0.0 } else { (i - 1) as f64 * step };
            let hi = if i + 1 == n {
                omega
            } else {
                (i + 1) as f64 * step
            };
            candidates.push((lo, hi, v, i as f64 * step));
        }
    }
    // keep the strongest few; the swept quantity is smooth off singular
    // points, so spurious plateau maxima only waste work
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    candidates.truncate(16);

    let mut depth = 0usize;
    for _level in 0..opts.max_refine_depth {
        let before = sup;
        for cand in candidates.iter_mut() {
            let (lo, hi, _, _) = *cand;
            if hi - lo < 1e-13 * (1.0 + omega) {
                continue;
            }
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let v1 = value(m1)?;
            let v2 = value(m2)?;
            evaluations += 2;
            if v1 < v2 {
                cand.0 = m1;
            } else {
                cand.1 = m2;
            }
            let (bv, bx) = if v1 >= v2 { (v1, m1) } else { (v2, m2) };
            if bv > cand.2 {
                cand.2 = bv;
                cand.3 = bx;
            }
            if bv > sup {
                sup = bv;
                worst = bx;
            }
        }
        depth += 1;
        let widest = candidates
            .iter()
            .map(|c| c.1 - c.0)
            .fold(0.0f64, f64::max);
        if (sup - before).abs() < opts.refine_tol && widest < step {
            break;
        }
    }

    Ok(SweepOutcome {
        sup,
        worst_omega: worst,
        omega_cap: omega,
        tail_bound,
        evaluations,
        refinement_depth: depth,
    })
}

/// Verify `sup_xi G^C(-W(-nu+i omega) xi, xi)/|xi|^2 < 0` for all real omega:
/// sweeps `lambda_max(H(omega))` on `[0, omega_cap]` and certifies the tail
/// analytically. Returns the sup estimate, its maximizer, and the cap.
pub fn verify_frequency_condition(
    sys: &DelaySystem,
    form: &QuadForm,
    nu: f64,
    opts: &SweepOptions,
) -> Result<SweepOutcome> {
    if form.dim_sigma() != sys.r || form.dim_xi() != sys.m {
        return Err(Error::DimensionMismatch(
            "quadratic form does not match the plant's (r, m)".into(),
        ));
    }
    sweep_sup(sys, form, nu, opts, |omega| {
        let w = eval_transfer(sys, Complex64::new(-nu, omega))?;
        let h = hermitian_form_at(form, &w)?;
        Ok(lambda_max(&h))
    })
}

/// Sweep of the transfer norm itself: `sup_omega |W(-nu + i omega)|_2`,
/// with the tail certified through the gain form of `lambda`.
pub fn sup_transfer_norm(
    sys: &DelaySystem,
    lambda: f64,
    nu: f64,
    opts: &SweepOptions,
) -> Result<SweepOutcome> {
    let form = lipschitz_form(lambda, sys.r, sys.m)?;
    sweep_sup(sys, &form, nu, opts, |omega| {
        let w = eval_transfer(sys, Complex64::new(-nu, omega))?;
        Ok(w.spectral_norm())
    })
}

fn verdict_from_margin(margin: f64) -> Verdict {
    if margin > MIN_CERTIFIED_MARGIN {
        Verdict::Certified
    } else if margin <= 0.0 {
        Verdict::Rejected
    } else {
        Verdict::Inconclusive
    }
}

fn kind_from_j(j: usize) -> CertificateKind {
    if j == 0 {
        CertificateKind::Stability
    } else {
        CertificateKind::InertialManifold
    }
}

/// Shared assembly: root count, then the supplied sweep, into a certificate.
/// `margin_of_sup` converts the swept sup into the certificate margin.
fn assemble_certificate<S>(
    sys: &DelaySystem,
    nu: f64,
    sweep: S,
    margin_of_sup: impl Fn(f64) -> f64,
) -> Result<Certificate>
where
    S: FnOnce() -> Result<SweepOutcome>,
{
    let j = match count_roots_right_of(sys, nu) {
        Ok(rc) => rc.j,
        Err(e @ Error::RootOnLine { .. }) | Err(e @ Error::NonIntegerWinding { .. }) => {
            return Ok(Certificate::inconclusive(
                nu,
                format!("root count failed: {e}; perturb nu and retry"),
            ));
        }
        Err(e) => return Err(e),
    };
    let outcome = match sweep() {
        Ok(o) => o,
        Err(e @ Error::SingularAtP { .. }) => {
            let mut cert = Certificate::inconclusive(
                nu,
                format!("sweep hit a numerically singular point: {e}"),
            );
            cert.j = Some(j);
            cert.kind = Some(kind_from_j(j));
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    let margin = margin_of_sup(outcome.sup);
    Ok(Certificate {
        verdict: verdict_from_margin(margin),
        kind: Some(kind_from_j(j)),
        nu,
        j: Some(j),
        margin: Some(margin),
        worst_omega: Some(outcome.worst_omega),
        sweep: Some(SweepInfo {
            omega_cap: outcome.omega_cap,
            evaluations: outcome.evaluations,
            refinement_depth: outcome.refinement_depth,
        }),
        tail_bound: Some(outcome.tail_bound),
        reason: None,
    })
}

/// Gain-bound check: certified when `sup_omega |W(-nu+i omega)|_2 < 1/lambda`
/// with positive margin. The reported margin is `1/lambda - sup |W|`.
pub fn smith_check(
    sys: &DelaySystem,
    lambda: f64,
    nu: f64,
    opts: &SweepOptions,
) -> Result<Certificate> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smith check needs lambda > 0, got {lambda}"
        )));
    }
    assemble_certificate(
        sys,
        nu,
        || sup_transfer_norm(sys, lambda, nu, opts),
        |sup| 1.0 / lambda - sup,
    )
}

/// Scalar circle criterion: certified when
/// `Re[(1 + k1 W)^* (1 + k2 W)] > 0` along the whole line plus tail. The
/// swept quantity is the negated real part, so the margin is its infimum.
pub fn circle_check(
    sys: &DelaySystem,
    k1: f64,
    k2: f64,
    nu: f64,
    opts: &SweepOptions,
) -> Result<Certificate> {
    if sys.r != 1 || sys.m != 1 {
        return Err(Error::DimensionMismatch(
            "circle criterion is scalar-only (r = m = 1)".into(),
        ));
    }
    if k1 > k2 {
        return Err(Error::InvalidParameter(format!(
            "circle sector needs k1 <= k2, got [{k1}, {k2}]"
        )));
    }
    let form = sector_form(k1, k2)?;
    assemble_certificate(
        sys,
        nu,
        || {
            sweep_sup(sys, &form, nu, opts, |omega| {
                let w = eval_transfer(sys, Complex64::new(-nu, omega))?;
                let wv = w[(0, 0)];
                // direct circle expression, independent of the eigensolver path
                let re = (1.0 + k1 * wv.conj()) * (1.0 + k2 * wv);
                Ok(-re.re)
            })
        },
        |sup| -sup,
    )
}

/// Which form of the feedback constraint a certificate asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Pointwise sector (N1)/(L1); stability statements need the forcing
    /// term to vanish.
    Sc,
    /// Incremental sector (N2)/(L2); covers forced equations and inertial
    /// manifolds.
    Msc,
}

/// Full certification: count roots, pick the constraint form from the
/// nonlinearity's declared metadata, verify the frequency condition, and
/// assemble the certificate.
pub fn certify(
    sys: &DelaySystem,
    nonlin: &Nonlinearity,
    nu: f64,
    mode: Mode,
    opts: &SweepOptions,
) -> Result<Certificate> {
    if nu < 0.0 {
        return Err(Error::InvalidParameter(format!("certify needs nu >= 0, got {nu}")));
    }
    let incremental_wanted = mode == Mode::Msc;
    // prefer the scalar sector metadata when the plant is scalar
    let form = if let (Some(sector), true) = (nonlin.sector, sys.r == 1 && sys.m == 1) {
        if sector.incremental != incremental_wanted {
            return Err(Error::Config(format!(
                "{:?} mode needs a {} sector declaration",
                mode,
                if incremental_wanted { "incremental (N2)" } else { "pointwise (N1)" }
            )));
        }
        match mode {
            Mode::Sc => {
                if !(sector.k1 < 0.0 && sector.k2 > 0.0) {
                    return Err(Error::Config(format!(
                        "SC certification needs k1 < 0 < k2 so that F(v, 0) >= 0; got [{}, {}]",
                        sector.k1, sector.k2
                    )));
                }
            }
            Mode::Msc => {
                if sector.k1 * sector.k2 > 0.0 {
                    return Err(Error::Config(format!(
                        "sector [{}, {}] violates F(v, 0) >= 0 (needs k1 <= 0 <= k2)",
                        sector.k1, sector.k2
                    )));
                }
            }
        }
        sector_form(sector.k1, sector.k2)?
    } else if let Some(lb) = nonlin.lipschitz {
        if lb.incremental != incremental_wanted {
            return Err(Error::Config(format!(
                "{:?} mode needs a {} Lipschitz declaration",
                mode,
                if incremental_wanted { "(L2) incremental" } else { "(L1) pointwise" }
            )));
        }
        lipschitz_form(lb.lambda, sys.r, sys.m)?
    } else {
        return Err(Error::Config(
            "nonlinearity carries no usable sector or Lipschitz metadata".into(),
        ));
    };

    let mut cert = assemble_certificate(
        sys,
        nu,
        || verify_frequency_condition(sys, &form, nu, opts),
        |sup| -sup,
    )?;
    if mode == Mode::Sc {
        if let Some(j) = cert.j {
            if j > 0 && cert.verdict == Verdict::Certified {
                // a pointwise sector with unstable roots supports neither the
                // stability theorem (needs j = 0) nor the manifold statement
                // (needs the incremental form)
                cert.verdict = Verdict::Inconclusive;
                cert.reason = Some(format!(
                    "frequency condition holds but j = {j} > 0: the SC route only packages j = 0 stability; use MSC for a manifold claim"
                ));
            }
        }
    }
    Ok(cert)
}
