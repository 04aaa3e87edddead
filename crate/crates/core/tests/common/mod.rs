//! Independent oracles shared by the integration and acceptance tests.

use std::f64::consts::PI;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
}

/// `∫_{R^n} |z|^δ e^{-|z|²} dz` by radial quadrature after `r = s²`.
pub fn moment_by_quadrature(n: u32, delta: f64) -> f64 {
    let p = n as f64 + delta;
    let f = move |s: f64| 2.0 * s.powf(2.0 * p - 1.0) * (-s.powi(4)).exp();
    let (a, b) = (0.0, 3.5);
    let radial = adaptive(&f, a, b, simpson(&f, a, b), 1e-15, 40);
    let sphere = match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    };
    sphere * radial
}

pub fn bisection_equilibrium(m: [f64; 3]) -> [f64; 4] {
    let [m13, m23, m24] = m;
    let g = |s: f64| (m13 - s) * (m23 - s) - s * (m24 - m23 + s);
    let mut lo = (m23 - m24).max(0.0);
    let mut hi = m13.min(m23);
    assert!(g(lo) >= 0.0 && g(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    [m13 - s, m23 - s, s, m24 - m23 + s]
}
