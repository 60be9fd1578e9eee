//! Acceptance suite: one criterion per section, run in order so the timing
//! gates are measured on an otherwise idle process. Each criterion prints a
//! PASS/FAIL line; the test fails at the end if any criterion failed.

mod common;

use common::{grid_winding_oracle, random_system, scalar_plant, seeded};
use delaycert::freqcheck::{
    circle_check, smith_check, sup_transfer_norm, verify_frequency_condition, SweepOptions,
    Verdict,
};
use delaycert::goodwin::{build_goodwin, linspace, region_scan, validate_point};
use delaycert::quadform::{lipschitz_form, sector_form};
use delaycert::simulate::integrate;
use delaycert::smalldelay::{lure_shifted_plant, small_delay_spectral_bound, thresholds};
use delaycert::spectrum::{count_roots_right_of, refine_root};
use delaycert::transfer::eval_transfer;
use delaycert::Error;
use num_complex::Complex64;
use rand::Rng;
use std::time::Instant;

type CriterionResult = Result<String, String>;

fn goodwin_closed_form(tau: f64, lambda: f64, rho: f64, p: Complex64) -> Complex64 {
    -1.0 / ((lambda + p).powu(3) * (tau * p).exp() + rho)
}

/// 1. Transfer exactness on the Goodwin chain.
fn criterion_1() -> CriterionResult {
    let t0 = Instant::now();
    let mut rng = seeded(101);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let tau = rng.gen_range(0.2..2.0);
        let lambda = rng.gen_range(0.1..1.0);
        let rho = rng.gen_range(0.0..0.8);
        let (sys, _) = build_goodwin(tau, lambda, rho).map_err(|e| e.to_string())?;
        let mut accepted = 0;
        while accepted < 200 {
            let p = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let denom = (lambda + p).powu(3) * (tau * p).exp() + rho;
            if denom.norm() < 1e-3 {
                continue; // too close to a characteristic root
            }
            let closed = goodwin_closed_form(tau, lambda, rho, p);
            let w = eval_transfer(&sys, p).map_err(|e| e.to_string())?[(0, 0)];
            let rel = (w - closed).norm() / (1.0 + closed.norm());
            worst = worst.max(rel);
            if rel >= 1e-10 {
                return Err(format!(
                    "relative error {rel:.3e} at p = {p} (tau={tau}, lambda={lambda}, rho={rho})"
                ));
            }
            accepted += 1;
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    if dt >= 5.0 {
        return Err(format!("runtime {dt:.2}s exceeds 5s"));
    }
    Ok(format!("worst rel err {worst:.2e}, {dt:.2}s"))
}

/// 2. Smith sup exactness for the undamped Goodwin chain.
fn criterion_2() -> CriterionResult {
    let (sys, _) = build_goodwin(1.0, 1.0, 0.0).map_err(|e| e.to_string())?;
    let out = sup_transfer_norm(&sys, 1.0, 0.0, &SweepOptions::default())
        .map_err(|e| e.to_string())?;
    if (out.sup - 1.0).abs() >= 1e-9 {
        return Err(format!("sup |W| = {:.12} differs from 1 by >= 1e-9", out.sup));
    }
    if out.worst_omega.abs() >= 1e-4 {
        return Err(format!("worst omega {:.3e} not at 0", out.worst_omega));
    }
    Ok(format!(
        "sup |W| = {:.12}, worst omega = {:.2e}",
        out.sup, out.worst_omega
    ))
}

/// 3. Argument-principle counts against the dense phase-winding oracle.
fn criterion_3() -> CriterionResult {
    let t0 = Instant::now();
    let mut rng = seeded(303);
    let mut checked = 0usize;
    while checked < 50 {
        let sys = random_system(&mut rng);
        let counted = match count_roots_right_of(&sys, 0.0) {
            Ok(rc) => rc.j,
            Err(Error::RootOnLine { .. }) => continue, // nudge by drawing another system
            Err(e) => return Err(format!("count failed: {e}")),
        };
        let Some(oracle) = grid_winding_oracle(&sys, 0.0, 600) else {
            continue;
        };
        if counted != oracle {
            return Err(format!(
                "system #{checked}: argument principle found {counted}, oracle {oracle}"
            ));
        }
        checked += 1;
    }
    // the classic x'(t) = x(t-1): one unstable root at the omega constant
    let sys = scalar_plant(0.0, 1.0, 1.0, 1.0);
    let rc = count_roots_right_of(&sys, 0.0).map_err(|e| e.to_string())?;
    if rc.j != 1 {
        return Err(format!("x'(t) = x(t-1) counted j = {}", rc.j));
    }
    let root = refine_root(&sys, Complex64::new(0.5, 0.0), 60).map_err(|e| e.to_string())?;
    if (root.re - 0.567143).abs() >= 1e-6 || root.im.abs() >= 1e-9 {
        return Err(format!("dominant root {root} off 0.567143"));
    }
    let dt = t0.elapsed().as_secs_f64();
    if dt >= 60.0 {
        return Err(format!("runtime {dt:.1}s exceeds 60s"));
    }
    Ok(format!("50/50 oracle agreement, dominant root {:.6}, {dt:.1}s", root.re))
}

/// 4. Route equivalence: circle vs general form, smith vs gain form.
fn criterion_4() -> CriterionResult {
    let mut rng = seeded(404);
    let opts = SweepOptions::default();
    let mut checked = 0usize;
    let mut worst_gap = 0.0f64;
    while checked < 100 {
        let a0 = rng.gen_range(-2.0..-0.2);
        let a1 = rng.gen_range(-0.8..0.8);
        let lag = rng.gen_range(0.3..1.5);
        let sys = scalar_plant(a0, a1, lag, lag);
        let k1 = rng.gen_range(-1.2..-0.05);
        let k2 = rng.gen_range(0.05..1.2);
        let circ = match circle_check(&sys, k1, k2, 0.0, &opts) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if circ.verdict == Verdict::Inconclusive {
            continue;
        }
        let form = sector_form(k1, k2).map_err(|e| e.to_string())?;
        let sweep = match verify_frequency_condition(&sys, &form, 0.0, &opts) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let gap = (circ.margin.unwrap() - (-sweep.sup)).abs();
        worst_gap = worst_gap.max(gap);
        if gap >= 1e-10 {
            return Err(format!(
                "margins differ by {gap:.3e} (a0={a0:.3}, a1={a1:.3}, lag={lag:.3}, sector [{k1:.3}, {k2:.3}])"
            ));
        }
        checked += 1;
    }
    let mut agree = 0usize;
    let mut cases = 0usize;
    while cases < 100 {
        let a0 = rng.gen_range(-2.0..-0.2);
        let a1 = rng.gen_range(-0.8..0.8);
        let lag = rng.gen_range(0.3..1.5);
        let sys = scalar_plant(a0, a1, lag, lag);
        let lambda = rng.gen_range(0.2..3.0);
        let smith = match smith_check(&sys, lambda, 0.0, &opts) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if smith.verdict == Verdict::Inconclusive {
            continue;
        }
        let form = lipschitz_form(lambda, 1, 1).map_err(|e| e.to_string())?;
        let sweep = match verify_frequency_condition(&sys, &form, 0.0, &opts) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let general_verdict = if -sweep.sup > 1e-9 {
            Verdict::Certified
        } else if -sweep.sup <= 0.0 {
            Verdict::Rejected
        } else {
            Verdict::Inconclusive
        };
        cases += 1;
        if smith.verdict == general_verdict {
            agree += 1;
        }
    }
    if agree != cases {
        return Err(format!("smith/gain-form verdicts agree only {agree}/{cases}"));
    }
    Ok(format!(
        "100 circle/general margins within {worst_gap:.2e}; smith verdicts {agree}/{cases}"
    ))
}

/// 5. Small-delay constants and the spectral-norm bound.
fn criterion_5() -> CriterionResult {
    let (paper, _, _) = thresholds(1);
    if (paper - 0.345258).abs() >= 1e-6 {
        return Err(format!("threshold_paper(1) = {paper:.8}"));
    }
    let ratio = std::f64::consts::E.sqrt() * (1.0 + std::f64::consts::E.powi(-2)).sqrt() / 2.0;
    if ratio >= 0.88 {
        return Err(format!("comparison ratio {ratio:.6} not below 0.88"));
    }
    let mut rng = seeded(505);
    let opts = SweepOptions {
        grid_nodes: 512,
        ..SweepOptions::default()
    };
    let mut worst_slack = f64::INFINITY;
    for k in 0..20 {
        let n = rng.gen_range(1..=3usize);
        let r = rng.gen_range(1..=3usize);
        let tau = rng.gen_range(0.1..0.6);
        let nu = rng.gen_range(0.3..1.0) / tau;
        let a_shift = rng.gen_range(0.0..0.1);
        let lags: Vec<f64> = (0..r).map(|_| rng.gen_range(0.0..tau)).collect();
        let cols: Vec<usize> = (0..r).map(|_| rng.gen_range(0..n)).collect();
        let sys = lure_shifted_plant(n, a_shift, tau, &lags, &cols).map_err(|e| e.to_string())?;
        let out = sup_transfer_norm(&sys, 1.0, nu, &opts).map_err(|e| e.to_string())?;
        let bound = small_delay_spectral_bound(r, nu, a_shift, tau).map_err(|e| e.to_string())?;
        worst_slack = worst_slack.min(bound - out.sup);
        if out.sup > bound + 1e-9 {
            return Err(format!(
                "config #{k}: sup |W| = {:.9} exceeds bound {:.9}",
                out.sup, bound
            ));
        }
    }
    Ok(format!(
        "threshold {paper:.6}, ratio {ratio:.4}, 20 configs within bound (min slack {worst_slack:.2e})"
    ))
}

/// 6. Integrator order and method-of-steps exactness.
fn criterion_6() -> CriterionResult {
    let sys = scalar_plant(-1.0, 0.0, 1.0, 1.0);
    let exact = (-1.0f64).exp();
    let mut errs = Vec::new();
    for &h in &[0.1, 0.05, 0.025, 0.0125] {
        let tr = integrate(&sys, None, None, &|_| vec![1.0], 1.0, h).map_err(|e| e.to_string())?;
        errs.push((tr.sample(tr.steps())[0] - exact).abs());
    }
    let mut orders = Vec::new();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        if !(3.7..=4.3).contains(&order) {
            return Err(format!("observed order {order:.3} outside [3.7, 4.3]"));
        }
        orders.push(order);
    }
    let sys = scalar_plant(0.0, -1.0, 1.0, 1.0);
    let tr = integrate(&sys, None, None, &|_| vec![1.0], 2.0, 0.01).map_err(|e| e.to_string())?;
    let k1 = (1.0 / tr.h).round() as usize;
    let e1 = tr.sample(k1)[0].abs();
    let e2 = (tr.sample(2 * k1)[0] + 0.5).abs();
    if e1 >= 1e-10 || e2 >= 1e-10 {
        return Err(format!("method-of-steps values off: |x(1)| = {e1:.2e}, |x(2)+1/2| = {e2:.2e}"));
    }
    Ok(format!(
        "orders {:?}, |x(1)| = {e1:.1e}, |x(2)+1/2| = {e2:.1e}",
        orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
    ))
}

/// 7. Goodwin region scan with re-verification and simulation validation.
fn criterion_7() -> CriterionResult {
    let t0 = Instant::now();
    let taus = linspace(0.05, 4.0, 41);
    let lambdas = linspace(0.05, 1.0, 21);
    let opts = SweepOptions::default();
    let rows = region_scan(&taus, &lambdas, 64, &opts).map_err(|e| e.to_string())?;
    let scan_time = t0.elapsed().as_secs_f64();
    if scan_time >= 300.0 {
        return Err(format!("scan took {scan_time:.0}s, budget 300s"));
    }
    let certified: Vec<_> = rows.iter().filter(|r| r.certified).collect();
    if certified.is_empty() {
        return Err("certified set is empty".into());
    }
    // monotone-decreasing certified indicator along each lambda row
    let mut monotone_rows = 0usize;
    for (li, _) in lambdas.iter().enumerate() {
        let row = &rows[li * taus.len()..(li + 1) * taus.len()];
        let mut seen_gap = false;
        let mut ok = true;
        for r in row {
            if r.certified && seen_gap {
                ok = false;
                break;
            }
            if !r.certified {
                seen_gap = true;
            }
        }
        monotone_rows += usize::from(ok);
    }
    if (monotone_rows as f64) < 0.95 * lambdas.len() as f64 {
        return Err(format!(
            "only {monotone_rows}/{} rows monotone in tau",
            lambdas.len()
        ));
    }
    // (i) re-certification at 4x sweep resolution and (ii) j = 0 at rho*
    let fine = SweepOptions {
        grid_nodes: 4 * opts.grid_nodes,
        ..opts
    };
    for row in &certified {
        let rho = row.rho_star.unwrap();
        let (sys, nl) = build_goodwin(row.tau, row.lambda, rho).map_err(|e| e.to_string())?;
        let sector = nl.sector.unwrap();
        let cert = circle_check(&sys, sector.k1, sector.k2, 0.0, &fine).map_err(|e| e.to_string())?;
        if cert.verdict != Verdict::Certified {
            return Err(format!(
                "(tau={}, lambda={}) lost certification at 4x resolution: {:?}",
                row.tau, row.lambda, cert.verdict
            ));
        }
        if cert.j != Some(0) {
            return Err(format!(
                "(tau={}, lambda={}) has j = {:?} at rho* = {rho}",
                row.tau, row.lambda, cert.j
            ));
        }
    }
    // (iii) simulation validation at every certified node
    let mut sim_failures: Vec<String> = Vec::new();
    for (idx, row) in certified.iter().enumerate() {
        let v = validate_point(row.tau, row.lambda, 5, 60.0, 0.01, 7_000 + idx as u64)
            .map_err(|e| e.to_string())?;
        if v.min_contraction < 1e3 || v.max_fp_distance > 1e-4 {
            sim_failures.push(format!(
                "(tau={:.3}, lambda={:.3}): contraction {:.2e}, fp distance {:.2e}",
                row.tau, row.lambda, v.min_contraction, v.max_fp_distance
            ));
        }
    }
    let total = t0.elapsed().as_secs_f64();
    if !sim_failures.is_empty() {
        return Err(format!(
            "{} of {} certified nodes fail the simulation thresholds (contraction >= 1e3 and fixed-point approach <= 1e-4 over t in [0,60]); slow-convergence examples: {}",
            sim_failures.len(),
            certified.len(),
            sim_failures
                .iter()
                .take(4)
                .cloned()
                .collect::<Vec<_>>()
                .join("; ")
        ));
    }
    Ok(format!(
        "{} certified of {} nodes, {monotone_rows}/{} monotone rows, scan {scan_time:.0}s, total {total:.0}s",
        certified.len(),
        rows.len(),
        lambdas.len()
    ))
}

/// 8. Cone invariance under nonnegative histories.
fn criterion_8() -> CriterionResult {
    let mut rng = seeded(808);
    let mut min_component = f64::INFINITY;
    for _ in 0..100 {
        let tau = rng.gen_range(0.05..4.0);
        let lambda = rng.gen_range(0.05..1.0);
        let (sys, nl) = build_goodwin(tau, lambda, 0.0).map_err(|e| e.to_string())?;
        let hist: [f64; 3] = [
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
        ];
        let tr = integrate(&sys, Some(&nl), None, &move |_| hist.to_vec(), 20.0, 0.02)
            .map_err(|e| e.to_string())?;
        for k in 0..=tr.steps() {
            for v in tr.sample(k) {
                min_component = min_component.min(*v);
            }
        }
        if min_component < -1e-12 {
            return Err(format!(
                "component dropped to {min_component:.3e} at (tau={tau:.3}, lambda={lambda:.3})"
            ));
        }
    }
    Ok(format!("100 runs, min component {min_component:.2e}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(&str, fn() -> CriterionResult)> = vec![
        ("1 transfer exactness", criterion_1),
        ("2 smith sup exactness", criterion_2),
        ("3 root counting vs oracle", criterion_3),
        ("4 checker equivalence", criterion_4),
        ("5 small-delay constants", criterion_5),
        ("6 integrator", criterion_6),
        ("7 goodwin region scan", criterion_7),
        ("8 cone invariance", criterion_8),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                println!("criterion {name}: FAIL ({detail})");
                failures.push(format!("{name}: {detail}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "failed acceptance criteria:\n{}",
        failures.join("\n")
    );
}

/// The brute-force oracle itself must get known cases right.
#[test]
fn oracle_sanity() {
    let sys = scalar_plant(-1.0, 0.0, 1.0, 1.0);
    assert_eq!(grid_winding_oracle(&sys, 0.0, 200), Some(0));
    let sys = scalar_plant(0.0, 1.0, 1.0, 1.0);
    assert_eq!(grid_winding_oracle(&sys, 0.0, 200), Some(1));
}
