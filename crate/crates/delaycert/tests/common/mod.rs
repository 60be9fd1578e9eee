//! Shared helpers for the integration suites.

use delaycert::mat::RMat;
use delaycert::measure::DelayMeasure;
use delaycert::spectrum::{char_fn, root_box};
use delaycert::system::DelaySystem;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar plant `x' = a0 x(t) + a1 x(t - lag)` with `C = delta_0`, `B = 1`.
pub fn scalar_plant(a0: f64, a1: f64, lag: f64, tau: f64) -> DelaySystem {
    let mut a = DelayMeasure::empty(1, 1, tau).unwrap();
    if a0 != 0.0 {
        a = a
            .with_atom(0.0, RMat::from_rows(1, 1, vec![a0]).unwrap())
            .unwrap();
    }
    if a1 != 0.0 {
        a = a
            .with_atom(-lag, RMat::from_rows(1, 1, vec![a1]).unwrap())
            .unwrap();
    }
    let c = DelayMeasure::empty(1, 1, tau)
        .unwrap()
        .with_atom(0.0, RMat::identity(1))
        .unwrap();
    DelaySystem::new(tau, a, RMat::identity(1), c).unwrap()
}

/// Random small system: n <= 3, at most two atoms, total variation <= 3.
pub fn random_system(rng: &mut ChaCha8Rng) -> DelaySystem {
    let n = rng.gen_range(1..=3usize);
    let tau = rng.gen_range(0.5..2.0);
    let mut a = DelayMeasure::empty(n, n, tau).unwrap();
    let atoms = rng.gen_range(1..=2usize);
    for k in 0..atoms {
        let theta = if k == 0 && rng.gen_bool(0.5) {
            0.0
        } else {
            -tau * rng.gen_range(0.2..1.0f64)
        };
        let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        a = a
            .with_atom(theta, RMat::from_rows(n, n, entries).unwrap())
            .unwrap();
    }
    // rescale so the total variation stays within the house limit
    let tv = a.total_variation();
    if tv > 3.0 {
        let scale = 2.5 / tv;
        let rescaled = a
            .atoms()
            .iter()
            .map(|at| (at.theta, at.matrix.scale(scale)))
            .collect::<Vec<_>>();
        let mut b = DelayMeasure::empty(n, n, tau).unwrap();
        for (theta, m) in rescaled {
            b = b.with_atom(theta, m).unwrap();
        }
        a = b;
    }
    let c = DelayMeasure::empty(1, n, tau)
        .unwrap()
        .with_atom(0.0, {
            let mut row = RMat::zeros(1, n);
            row[(0, 0)] = 1.0;
            row
        })
        .unwrap();
    let b = {
        let mut col = RMat::zeros(n, 1);
        col[(0, 0)] = 1.0;
        col
    };
    DelaySystem::new(tau, a, b, c).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force root count: partition the counting rectangle into `cells x
/// cells` boxes, sum the phase winding of Delta around every box. Interior
/// edges cancel, so the sum equals the total winding; per-cell rounding is
/// kept as a sampling diagnostic.
pub fn grid_winding_oracle(sys: &DelaySystem, nu: f64, cells: usize) -> Option<usize> {
    let r = root_box(sys, nu).unwrap();
    let (x0, x1) = (-nu, r);
    let (y0, y1) = (-r, r);
    let np = cells + 1;
    let mut phase = vec![0.0f64; np * np];
    for iy in 0..np {
        for ix in 0..np {
            let p = Complex64::new(
                x0 + (x1 - x0) * ix as f64 / cells as f64,
                y0 + (y1 - y0) * iy as f64 / cells as f64,
            );
            let v = char_fn(sys, p).ok()?;
            if v.norm() == 0.0 {
                return None; // sampled a root exactly
            }
            phase[iy * np + ix] = v.im.atan2(v.re);
        }
    }
    let wrap = |d: f64| {
        let mut d = d;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        d
    };
    let mut total = 0.0f64;
    for iy in 0..cells {
        for ix in 0..cells {
            let p00 = phase[iy * np + ix];
            let p01 = phase[iy * np + ix + 1];
            let p11 = phase[(iy + 1) * np + ix + 1];
            let p10 = phase[(iy + 1) * np + ix];
            // counterclockwise: (ix,iy) -> (ix+1,iy) -> (ix+1,iy+1) -> (ix,iy+1)
            total += wrap(p01 - p00) + wrap(p11 - p01) + wrap(p10 - p11) + wrap(p00 - p10);
        }
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 || rounded < 0.0 {
        return None;
    }
    Some(rounded as usize)
}
