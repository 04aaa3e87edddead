use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the positive reals.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the series in its accurate range.
        return lanczos(x + 1.0) / x;
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// Surface area of the unit sphere in `R^n`: `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let half = n as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / gamma_positive(half))
}

/// `∫_{R^n} |z|^delta e^{-|z|^2} dz = (ω_{n-1}/2) Γ((n + delta)/2)`.
pub fn gaussian_moment(n: u32, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("moment order must be >= 0, got {delta}")));
    }
    let omega = sphere_area(n)?;
    Ok(0.5 * omega * gamma_positive((n as f64 + delta) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_integers_are_factorials() {
        let mut fact = 1.0;
        for n in 1..20 {
            assert!(rel(gamma_fn(n as f64).unwrap(), fact) < 1e-13, "n={n}");
            fact *= n as f64;
        }
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-13);
    }

    #[test]
    fn gamma_half_integers() {
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-13);
        assert!(rel(gamma_fn(1.5).unwrap(), PI.sqrt() / 2.0) < 1e-13);
        assert!(rel(gamma_fn(2.5).unwrap(), 0.75 * PI.sqrt()) < 1e-13);
    }

    #[test]
    fn gamma_recurrence_near_zero() {
        for x in [1e-6, 0.01, 0.1, 0.3, 0.49] {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(1).unwrap(), 2.0) < 1e-14);
        assert!(rel(sphere_area(2).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(3).unwrap(), 4.0 * PI) < 1e-14);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn gaussian_moment_examples() {
        assert!(rel(gaussian_moment(1, 0.0).unwrap(), PI.sqrt()) < 1e-13);
        assert!(rel(gaussian_moment(2, 0.0).unwrap(), PI) < 1e-13);
        let expected = 1.5 * PI.powf(1.5);
        assert!(rel(gaussian_moment(3, 2.0).unwrap(), expected) < 1e-13);
        assert!(gaussian_moment(1, -0.5).is_err());
    }
}
