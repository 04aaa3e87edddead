use std::f64::consts::PI;

use serde::Serialize;

use super::special::{gamma_fn, sphere_area};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsCase {
    /// Whole space, explicit heat kernel.
    FreeSpace,
    /// Bounded domain with user-supplied kernel constants `c_n`, `kappa_n`.
    BoundedDomain,
}

/// Constants of the gradient interpolation estimate
/// `|∇u| <= C‖u0‖ + B H^{1/(2-γ)} F^{(1-γ)/(2-γ)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationConstants {
    pub gamma: f64,
    pub n: u32,
    pub d: f64,
    pub c_n: Option<f64>,
    pub kappa_n: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
    pub b4: f64,
    pub b5: f64,
    /// Free-space `B` built from `B4`, `B5`.
    pub b_free: f64,
    /// Bounded-domain `B` built from `B1`, `B3`, when `c_n`, `kappa_n` are known.
    pub b_bounded: Option<f64>,
    /// `B` of the active case.
    pub b: f64,
    pub case: ConstantsCase,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "interpolation exponent gamma must lie in [0, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// `[(1-γ)^{1/(2-γ)} + (1-γ)^{(γ-1)/(2-γ)}] Ba^{(1-γ)/(2-γ)} Bb^{1/(2-γ)}`.
fn combine(ba: f64, bb: f64, gamma: f64) -> f64 {
    let s = 2.0 - gamma;
    let one_m = 1.0 - gamma;
    (one_m.powf(1.0 / s) + one_m.powf(-one_m / s)) * ba.powf(one_m / s) * bb.powf(1.0 / s)
}

/// Whole-space constants `B4`, `B5`, `B` for diffusion `d` in `R^n`.
pub fn free_space_constants(n: u32, d: f64, gamma: f64) -> Result<InterpolationConstants> {
    interpolation_constants(n, d, gamma, None)
}

/// As [`free_space_constants`]; when `kernel = Some((c_n, kappa_n))` the
/// bounded-domain constants `B1..B3` are added and become the active case.
pub fn interpolation_constants(
    n: u32,
    d: f64,
    gamma: f64,
    kernel: Option<(f64, f64)>,
) -> Result<InterpolationConstants> {
    check_gamma(gamma)?;
    if n == 0 {
        return Err(Error::Domain("dimension n must be >= 1".into()));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("diffusion d must be positive, got {d}")));
    }
    let nf = n as f64;
    let omega = sphere_area(n)?;
    let b4 = omega / (PI.powf((nf - 1.0) / 2.0) * d.sqrt()) * gamma_fn((nf + 1.0) / 2.0)?;
    let b5 = omega / PI.powf(nf / 2.0)
        * 2f64.powf(gamma - 1.0)
        * d.powf((gamma - 1.0) / 2.0)
        * gamma_fn((1.0 + gamma) / 2.0)?
        * gamma_fn((nf + 1.0 + gamma) / 2.0)?;
    let b_free = combine(b4, b5, gamma);

    let (mut b1, mut b2, mut b3, mut b_bounded) = (None, None, None, None);
    if let Some((c_n, kappa)) = kernel {
        if !(c_n > 0.0 && kappa > 0.0) {
            return Err(Error::Domain(format!(
                "kernel constants must be positive, got c_n = {c_n}, kappa_n = {kappa}"
            )));
        }
        let v1 = c_n * kappa.powf(-nf / 2.0) * gamma_fn(nf / 2.0)? * PI.sqrt();
        let v2 = c_n * kappa.powf(-(nf + gamma) / 2.0) * gamma_fn((nf + gamma + 1.0) / 2.0)?;
        let v3 = v2 * gamma_fn((gamma + 1.0) / 2.0)?;
        b1 = Some(v1);
        b2 = Some(v2);
        b3 = Some(v3);
        b_bounded = Some(combine(v1, v3, gamma));
    }

    let (b, case) = match b_bounded {
        Some(b) => (b, ConstantsCase::BoundedDomain),
        None => (b_free, ConstantsCase::FreeSpace),
    };
    Ok(InterpolationConstants {
        gamma,
        n,
        d,
        c_n: kernel.map(|k| k.0),
        kappa_n: kernel.map(|k| k.1),
        b1,
        b2,
        b3,
        b4,
        b5,
        b_free,
        b_bounded,
        b,
        case,
    })
}

/// Splitting parameter minimising `Ba F / √k + Bb H √k^{1-γ}`.
pub fn optimal_k(ba: f64, bb: f64, f: f64, h: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "optimal_k needs a positive Hölder constant, got H = {h}"
        )));
    }
    if !(bb > 0.0 && ba > 0.0) {
        return Err(Error::Domain("kernel constants must be positive".into()));
    }
    if !(f >= 0.0) {
        return Err(Error::Domain(format!("F must be >= 0, got {f}")));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    let sqrt_k = (ba * f / (bb * h * (1.0 - gamma))).powf(1.0 / (2.0 - gamma));
    Ok(sqrt_k * sqrt_k)
}

/// The two-term bound `Ba F / √k + Bb H √k^{1-γ}` at a given `k > 0`.
pub fn interpolation_bound(ba: f64, bb: f64, f: f64, h: f64, gamma: f64, k: f64) -> f64 {
    let s = k.sqrt();
    ba * f / s + bb * h * s.powf(1.0 - gamma)
}
