//! Gauss-Kronrod and Gauss-Legendre quadrature.
//!
//! The adaptive G7/K15 rule drives total-variation integrals, the contour
//! integration in the root counter, and the quadrature cross-checks in tests.

use num_complex::Complex64;

// G7/K15 abscissae and weights on [-1, 1] (QUADPACK dqk15 constants).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel on [a, b]. Returns the Kronrod value and an error
/// estimate from the Gauss/Kronrod difference.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    let fc = f(mid);
    kronrod += WGK[7] * fc;
    gauss += WG[3] * fc;
    for k in 0..7 {
        let x = half * XGK[k];
        let fsum = f(mid - x) + f(mid + x);
        kronrod += WGK[k] * fsum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).norm())
}

/// Adaptive bisection on top of G7/K15 for a complex-valued integrand of a
/// real variable. Splits the worst panel until the summed error estimate
/// drops below `max(abs_tol, rel_tol * |I|)` or the panel budget runs out.
/// Returns the integral and the final error estimate.
pub fn integrate_adaptive<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (Complex64, f64) {
    struct Panel {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    let (v0, e0) = gk15(f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v0,
        err: e0,
    }];
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target || panels.len() >= max_panels {
            return (total, err);
        }
        // split the panel with the largest error estimate
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty panel list");
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // interval at floating-point resolution; accept as-is
            panels.push(p);
            let total: Complex64 = panels.iter().map(|q| q.value).sum();
            let err: f64 = panels.iter().map(|q| q.err).sum();
            return (total, err);
        }
        let (vl, el) = gk15(f, p.a, m);
        let (vr, er) = gk15(f, m, p.b);
        panels.push(Panel {
            a: p.a,
            b: m,
            value: vl,
            err: el,
        });
        panels.push(Panel {
            a: m,
            b: p.b,
            value: vr,
            err: er,
        });
    }
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_adaptive_real<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let mut g = |x: f64| Complex64::new(f(x), 0.0);
    let (v, e) = integrate_adaptive(&mut g, a, b, abs_tol, rel_tol, max_panels);
    (v.re, e)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for k in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' at x via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            if n == 1 {
                p1 = x;
            }
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn_1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (pn_1 - x * pn) / (1.0 - x * x);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_integral_exact(deg: u32, a: f64, b: f64) -> f64 {
        (b.powi(deg as i32 + 1) - a.powi(deg as i32 + 1)) / (deg as f64 + 1.0)
    }

    #[test]
    fn gk15_exact_up_to_degree_22() {
        // a single Kronrod panel integrates polynomials up to degree 22 exactly
        for deg in 0..=22u32 {
            let mut f = |x: f64| Complex64::new(x.powi(deg as i32), 0.0);
            let (v, _) = gk15(&mut f, -0.7, 1.3);
            let exact = poly_integral_exact(deg, -0.7, 1.3);
            assert!(
                (v.re - exact).abs() <= 1e-13 * (1.0 + exact.abs()),
                "degree {deg}: got {} expected {exact}",
                v.re
            );
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        let mut f = |x: f64| x.abs();
        let (v, _) = integrate_adaptive_real(&mut f, -1.0, 1.0, 1e-13, 1e-13, 2000);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_exponential() {
        let mut f = |x: f64| Complex64::new(0.0, x).exp();
        let (v, _) = integrate_adaptive(&mut f, 0.0, 10.0, 1e-13, 1e-13, 2000);
        // closed form: (e^{10i} - 1)/i
        let exact = (Complex64::new(0.0, 10.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn gauss_legendre_known_nodes() {
        let (x2, w2) = gauss_legendre(2);
        assert!((x2[1] - 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
        assert!((w2[0] - 1.0).abs() < 1e-15);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[1]).abs() < 1e-15);
        assert!((x3[2] - (3.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-14);
        // exactness: rule with q nodes integrates degree 2q-1
        for q in 1..=12usize {
            let (xs, ws) = gauss_legendre(q);
            let deg = 2 * q as u32 - 1;
            let num: f64 = xs
                .iter()
                .zip(&ws)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            let exact = poly_integral_exact(deg, -1.0, 1.0);
            assert!(
                (num - exact).abs() < 1e-13,
                "q={q} deg={deg}: {num} vs {exact}"
            );
        }
    }
}
