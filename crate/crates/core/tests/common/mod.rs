//! Reference implementations used as independent oracles by the integration
//! tests. None of these call into the library under test.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Complete elliptic integral of the second kind by direct quadrature.
pub fn elliptic_e_oracle(m: f64) -> f64 {
    let f = |t: f64| (1.0 - m * t.sin().powi(2)).sqrt();
    simpson(&f, 0.0, PI / 2.0, 1e-15)
}

/// Contact rate from the angle-averaged relative speed:
/// (ρR/π) ∫₀^{2π} |v_i − v| dφ, split at φ = π so both halves are smooth.
pub fn contact_rate_oracle(v_i: f64, v: f64, rho: f64, radius: f64) -> f64 {
    let f = |phi: f64| (v_i * v_i + v * v - 2.0 * v_i * v * phi.cos()).max(0.0).sqrt();
    let integral = simpson(&f, 0.0, PI, 1e-13 * (v_i + v).max(1.0))
        + simpson(&f, PI, 2.0 * PI, 1e-13 * (v_i + v).max(1.0));
    rho * radius / PI * integral
}

/// Root of z = 1 − exp(−r0·z) in (0, 1] by plain bisection; 0 when r0 ≤ 1.
pub fn final_fraction_bisection(r0: f64) -> f64 {
    if r0 <= 1.0 {
        return 0.0;
    }
    let g = |z: f64| z - 1.0 + (-r0 * z).exp();
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of the same equation by undamped fixed-point iteration from z = 1.
pub fn final_fraction_fixed_point(r0: f64) -> f64 {
    let mut z = 1.0;
    for _ in 0..10_000 {
        let next = 1.0 - (-r0 * z).exp();
        if (next - z).abs() < 1e-15 {
            return next;
        }
        z = next;
    }
    z
}

/// First sub-step index `k` (1-based) at which the separation
/// |p + w·k·h| is within `radius`, for `h = window / substeps`.
pub fn first_inside_substep(p: (f64, f64), w: (f64, f64), radius: f64, window: f64, substeps: u32) -> Option<u32> {
    let h = window / f64::from(substeps);
    (1..=substeps).find(|&k| {
        let t = f64::from(k) * h;
        let (x, y) = (p.0 + w.0 * t, p.1 + w.1 * t);
        x * x + y * y <= radius * radius
    })
}

/// Chi-square critical value at the 1% level for 19 degrees of freedom.
pub const CHI2_19_DF_1PCT: f64 = 36.191;
