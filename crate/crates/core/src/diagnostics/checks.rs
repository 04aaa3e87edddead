use serde::Serialize;

use super::auxiliary::{vd_consistency_of, zvd_of, AuxSummary, AuxiliaryState, K0Schedule};
use super::{CheckEntry, Verdict};
use crate::error::{Error, Result, ValidationIssue};
use crate::models::{entropy_dissipation, Kinetics, ReactionSystem, Sampler};
use crate::solver::{SystemState, Trajectory};

const B_TOL: f64 = 1e-9;
const U_HAT_TOL: f64 = 1e-9;
const CONSERVATION_DRIFT_TOL: f64 = 1e-8;
const SLOPE_SLACK: f64 = 0.1;
/// Residuals already at this level count as converged in refinement checks.
const ROUNDOFF_FLOOR: f64 = 1e-12;

fn relative_tol(bound: f64) -> f64 {
    1e-6 * (1.0 + bound.abs())
}

/// `sup |z| <= M + ∫_0^T K0`.
pub fn check_z_bound(summary: &AuxSummary) -> CheckEntry {
    let bound = summary.m + summary.k0_integral;
    CheckEntry::upper("z_bound", summary.z_sup, bound, relative_tol(bound))
}

/// `1/max d_i <= b <= 1/min d_i` where the total density is positive.
pub fn b_range_check(summary: &AuxSummary) -> Vec<CheckEntry> {
    match (summary.b_min, summary.b_max) {
        (Some(lo), Some(hi)) => vec![
            CheckEntry::lower("b_lower", lo, 1.0 / summary.d_max, B_TOL),
            CheckEntry::upper("b_upper", hi, 1.0 / summary.d_min, B_TOL),
        ],
        _ => vec![CheckEntry::skipped("b_lower"), CheckEntry::skipped("b_upper")],
    }
}

/// `0 <= û <= d ẑ` pointwise and `sup |û| <= d (M + ∫K0) T`.
pub fn u_hat_checks(summary: &AuxSummary) -> Vec<CheckEntry> {
    let sup_bound = summary.d * (summary.m + summary.k0_integral) * summary.t_end;
    vec![
        CheckEntry::lower("u_hat_nonnegative", summary.u_hat_min, 0.0, U_HAT_TOL),
        CheckEntry::upper("u_hat_below_d_z_hat", summary.u_hat_excess, 0.0, U_HAT_TOL),
        CheckEntry::upper("u_hat_sup", summary.u_hat_sup, sup_bound, relative_tol(sup_bound)),
    ]
}

/// `sup |Σ (d - d_i) v_i - (d ẑ - û)|`.
pub fn vd_consistency_residual(aux: &AuxiliaryState) -> f64 {
    vd_consistency_of(aux)
}

/// `sup |z - Δv_d - Σ u_i|` at the state's time.
pub fn zvd_residual(state: &SystemState, aux: &AuxiliaryState) -> Result<f64> {
    if state.grid() != aux.z.grid() {
        return Err(Error::Contract(
            "state and auxiliary fields live on different grids".into(),
        ));
    }
    Ok(zvd_of(state, aux))
}

/// `coarse / fine >= min_ratio`; residuals at roundoff level pass outright.
pub fn refinement_check(name: &str, coarse: f64, fine: f64, min_ratio: f64) -> CheckEntry {
    let ratio = coarse / fine;
    if coarse <= ROUNDOFF_FLOOR && fine <= ROUNDOFF_FLOOR {
        return CheckEntry {
            name: name.into(),
            measured: if ratio.is_finite() { ratio } else { 1.0 },
            bound: Some(min_ratio),
            tolerance: 0.0,
            verdict: Verdict::Pass,
        };
    }
    CheckEntry::lower(name, ratio, min_ratio, 0.0)
}

/// Whether `Σ f_i(u, t) = K0(t)` on sampled states, so that the `z`
/// equation and the identities built on it apply.
pub fn source_matches_schedule(
    sys: &ReactionSystem,
    schedule: &K0Schedule,
    sampler: &mut Sampler,
    n_samples: usize,
    horizon: f64,
) -> Result<bool> {
    let n = sys.n_species();
    let mut out = vec![0.0; n];
    for _ in 0..n_samples {
        let u = sampler.point(n);
        let t = sampler.uniform(0.0, horizon.max(0.0));
        sys.eval_into(&u, t, &mut out)?;
        let sum: f64 = out.iter().sum();
        let scale: f64 = out.iter().map(|x| x.abs()).sum::<f64>() + schedule.at(t).abs();
        if (sum - schedule.at(t)).abs() > 1e-10 * (1.0 + scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `Σ f_i log u_i` over cells where every species is positive.
pub fn max_entropy_dissipation(sys: &ReactionSystem, state: &SystemState) -> Result<Option<f64>> {
    let mut worst: Option<f64> = None;
    for j in 0..state.grid().n_cells() {
        let u = state.point(j);
        if u.iter().all(|x| *x > 0.0) {
            let e = entropy_dissipation(sys, &u)?;
            worst = Some(worst.map_or(e, |w| w.max(e)));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawDrift {
    pub weights: Vec<f64>,
    pub initial: f64,
    /// Largest `|c(t) - c(0)| / |c(0)|` over snapshots (absolute if `c(0) = 0`).
    pub max_relative_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub laws: Vec<LawDrift>,
    pub initial_mass: f64,
    /// Largest `m(t) - envelope(t)` over snapshots.
    pub envelope_excess: f64,
    pub checks: Vec<CheckEntry>,
}

fn mass_envelope(sys: &ReactionSystem, m0: f64, area: f64, t: f64) -> f64 {
    if let Kinetics::Augmented(_) = sys.kinetics() {
        return m0 + area * K0Schedule::for_system(sys).integral_bound(t);
    }
    let mc = sys.mass_control();
    let growth = (mc.k1 * t).exp();
    let source = if mc.k1 == 0.0 { t } else { (growth - 1.0) / mc.k1 };
    growth * m0 + mc.k0 * area * source
}

/// Drift of each linear conservation law and the Grönwall envelope
/// `m(t) <= e^{K1 t} m0 + K0 |Ω| ∫_0^t e^{K1 s} ds` on total mass.
pub fn conservation_and_mass(traj: &Trajectory, sys: &ReactionSystem) -> Result<ConservationReport> {
    let Some(first) = traj.snapshots.first() else {
        return Err(Error::Contract("empty trajectory".into()));
    };
    let t0 = first.t;
    let area = first.state.grid().length();
    let laws_w = sys.conservation_laws();
    let mut laws: Vec<LawDrift> = laws_w
        .iter()
        .map(|w| LawDrift {
            weights: w.clone(),
            initial: w.iter().zip(&first.masses).map(|(a, m)| a * m).sum(),
            max_relative_drift: 0.0,
        })
        .collect();
    let m0: f64 = first.masses.iter().sum();
    let mut excess = f64::NEG_INFINITY;
    for snap in &traj.snapshots {
        for law in &mut laws {
            let c: f64 = law.weights.iter().zip(&snap.masses).map(|(a, m)| a * m).sum();
            let scale = if law.initial == 0.0 {
                1.0
            } else {
                law.initial.abs()
            };
            law.max_relative_drift = law.max_relative_drift.max((c - law.initial).abs() / scale);
        }
        let m: f64 = snap.masses.iter().sum();
        excess = excess.max(m - mass_envelope(sys, m0, area, snap.t - t0));
    }
    let mut checks: Vec<CheckEntry> = laws
        .iter()
        .enumerate()
        .map(|(k, law)| {
            CheckEntry::upper(
                format!("conservation_law_{}", k + 1),
                law.max_relative_drift,
                0.0,
                CONSERVATION_DRIFT_TOL,
            )
        })
        .collect();
    checks.push(CheckEntry::upper("mass_envelope", excess, 0.0, relative_tol(m0)));
    Ok(ConservationReport {
        laws,
        initial_mass: m0,
        envelope_excess: excess,
        checks,
    })
}

/// One member of an amplitude family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingSample {
    pub amplitude: f64,
    pub grad_vd: f64,
    /// Hölder modulus of `v_d` at the family's exponent.
    pub holder: f64,
    /// `sup |Σ (d - d_i) u_i|`.
    pub f_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub gamma: f64,
    /// Free-space constant; reported, not asserted, on a bounded domain.
    pub b: f64,
    pub samples: Vec<ScalingSample>,
    /// `B H^{1/(2-γ)} F^{(1-γ)/(2-γ)}` per sample.
    pub bounds: Vec<f64>,
    pub slope: Option<f64>,
    pub monotone: bool,
    pub checks: Vec<CheckEntry>,
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Log-log slope of measured `sup |∇v_d|` against the interpolation bound
/// across an amplitude family; must not exceed `1 + 0.1`.
pub fn interpolation_scaling_check(samples: &[ScalingSample], gamma: f64, b: f64) -> Result<ScalingReport> {
    if samples.len() < 3 {
        return Err(Error::ConfigInvalid(vec![ValidationIssue {
            path: "diagnostics.scaling_amplitudes".into(),
            message: format!("need at least 3 runs in the family, got {}", samples.len()),
        }]));
    }
    let s = 2.0 - gamma;
    let bounds: Vec<f64> = samples
        .iter()
        .map(|x| b * x.holder.powf(1.0 / s) * x.f_sup.powf((1.0 - gamma) / s))
        .collect();
    let grads: Vec<f64> = samples.iter().map(|x| x.grad_vd).collect();
    let slope = log_log_slope(&bounds, &grads);

    let mut order: Vec<&ScalingSample> = samples.iter().collect();
    order.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    let monotone = order.windows(2).all(|w| w[1].grad_vd >= w[0].grad_vd);

    let slope_check = match slope {
        Some(k) => CheckEntry::upper("interpolation_scaling_slope", k, 1.0, SLOPE_SLACK),
        // all-zero family: nothing to contradict the bound
        None => CheckEntry {
            name: "interpolation_scaling_slope".into(),
            measured: 0.0,
            bound: Some(1.0),
            tolerance: SLOPE_SLACK,
            verdict: Verdict::Pass,
        },
    };
    let mono_check = CheckEntry {
        name: "grad_vd_monotone_in_amplitude".into(),
        measured: if monotone { 1.0 } else { 0.0 },
        bound: Some(1.0),
        tolerance: 0.0,
        verdict: Verdict::from_bool(monotone),
    };
    Ok(ScalingReport {
        gamma,
        b,
        samples: samples.to_vec(),
        bounds,
        slope,
        monotone,
        checks: vec![slope_check, mono_check],
    })
}
