//! Exponential rescaling `w = e^{-K1 t} u` plus one extra species that turns
//! mass control into an exact (time-dependent) conservation law.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::models::{Growth, Kinetics, MassControl, QuasiPositivityVerdict, ReactionSystem, Sampler};
use crate::solver::SystemState;

const CONSERVATION_TOL: f64 = 1e-10;
const FACE_TOL: f64 = 1e-10;

/// `g_i(w, t) = e^{-K1 t} f_i(e^{K1 t} w) - K1 w_i` for `i <= N` and
/// `g_{N+1} = K0 e^{-K1 t} - Σ_{i<=N} g_i`.
#[derive(Debug, Clone)]
pub struct AugmentedKinetics {
    pub(crate) base: Arc<ReactionSystem>,
    pub k0: f64,
    pub k1: f64,
    /// Added to `g_{N+1}`; nonzero only for fault-injection probes.
    pub defect: f64,
}

impl AugmentedKinetics {
    pub(crate) fn eval(&self, w: &[f64], t: f64, out: &mut [f64]) {
        let n = self.base.n_species();
        let grow = (self.k1 * t).exp();
        let shrink = (-self.k1 * t).exp();
        let u: Vec<f64> = w[..n].iter().map(|x| grow * x).collect();
        self.base.eval_raw(&u, t, &mut out[..n]);
        let mut sum = 0.0;
        for i in 0..n {
            out[i] = shrink * out[i] - self.k1 * w[i];
            sum += out[i];
        }
        out[n] = self.k0 * shrink - sum + self.defect;
    }
}

#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub base: ReactionSystem,
    pub augmented: ReactionSystem,
    pub k0: f64,
    pub k1: f64,
}

/// `w = e^{-K1 t} u`.
pub fn rescale_solution(u: &[f64], k1: f64, t: f64) -> Vec<f64> {
    let s = (-k1 * t).exp();
    u.iter().map(|x| s * x).collect()
}

/// `u = e^{K1 t} w`.
pub fn unscale_solution(w: &[f64], k1: f64, t: f64) -> Vec<f64> {
    let s = (k1 * t).exp();
    w.iter().map(|x| s * x).collect()
}

/// Rescale every species of a state at its own time.
pub fn rescale_state(state: &SystemState, k1: f64) -> Result<SystemState> {
    let s = (-k1 * state.t()).exp();
    SystemState::new(state.t(), state.fields().iter().map(|f| f.scaled(s)).collect())
}

/// Inverse of [`rescale_state`] on the first `n_species` components.
pub fn unscale_state(state: &SystemState, k1: f64, n_species: usize) -> Result<SystemState> {
    let s = (k1 * state.t()).exp();
    SystemState::new(
        state.t(),
        state.fields()[..n_species].iter().map(|f| f.scaled(s)).collect(),
    )
}

/// Initial data of the augmented system: base data plus a zero species.
pub fn augment_initial(state: &SystemState) -> Result<SystemState> {
    let mut fields = state.fields().to_vec();
    fields.push(Field::zeros(*state.grid()));
    SystemState::new(state.t(), fields)
}

pub fn augment_system(base: &ReactionSystem) -> AugmentedSystem {
    augment_system_with_defect(base, 0.0)
}

/// [`augment_system`] with `g_{N+1}` shifted by `defect`; used to confirm the
/// conservation audit detects a broken transform.
pub fn augment_system_with_defect(base: &ReactionSystem, defect: f64) -> AugmentedSystem {
    let MassControl { k0, k1 } = base.mass_control();
    let mut diffusion = base.diffusion().to_vec();
    diffusion.push(1.0);
    let kinetics = Kinetics::Augmented(AugmentedKinetics {
        base: Arc::new(base.clone()),
        k0,
        k1,
        defect,
    });
    let augmented = ReactionSystem::new(
        format!("{}+augmented", base.name()),
        diffusion,
        kinetics,
        MassControl { k0, k1: 0.0 },
        base.growth(),
    )
    .expect("augmented system inherits valid constants from its base");
    AugmentedSystem {
        base: base.clone(),
        augmented,
        k0,
        k1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationVerdict {
    pub passed: bool,
    /// Largest `|Σ g_i - K0 e^{-K1 t}| / (1 + K0 e^{-K1 t} + Σ |g_i|)`.
    pub worst_residual: f64,
    pub witness: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedGrowthVerdict {
    pub passed: bool,
    /// Smallest `C` with `|g_i| <= C e^{(1+eps)|K1| T} (1 + |w|^{2+eps})` on the samples.
    pub fitted_constant: f64,
    /// `K0 + N (K + |K1|)`, which bounds `C` whenever the base growth bound holds.
    pub bound_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedVerdict {
    pub conservation: ConservationVerdict,
    pub quasi_positive: QuasiPositivityVerdict,
    pub growth: AugmentedGrowthVerdict,
    /// Smallest `g_{N+1}` seen on the samples.
    pub min_extra_source: f64,
    pub samples_used: usize,
}

impl AugmentedVerdict {
    pub fn all_passed(&self) -> bool {
        self.conservation.passed && self.quasi_positive.passed && self.growth.passed
    }
}

/// Audit the augmented nonlinearity at `n_samples` random `(w, t)` with
/// `t` uniform in `[0, horizon]`.
pub fn verify_augmented(
    aug: &AugmentedSystem,
    sampler: &mut Sampler,
    n_samples: usize,
    horizon: f64,
) -> Result<AugmentedVerdict> {
    if n_samples == 0 {
        return Err(Error::Contract("verify_augmented needs n_samples >= 1".into()));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Contract(format!("horizon must be >= 0, got {horizon}")));
    }
    let sys = &aug.augmented;
    let n = sys.n_species();
    let Growth { k, epsilon } = aug.base.growth();
    let envelope_factor = ((1.0 + epsilon) * aug.k1.abs() * horizon).exp();
    let bound_constant = aug.k0 + (n - 1) as f64 * (k + aug.k1.abs());

    let mut g = vec![0.0; n];
    let mut conservation = ConservationVerdict {
        passed: true,
        worst_residual: 0.0,
        witness: None,
    };
    let mut qp = QuasiPositivityVerdict {
        passed: true,
        worst_value: f64::INFINITY,
        witness: None,
    };
    let mut fitted = 0.0_f64;
    let mut min_extra = f64::INFINITY;

    for _ in 0..n_samples {
        let w = sampler.point(n);
        let t = sampler.uniform(0.0, horizon);
        sys.eval_into(&w, t, &mut g)?;

        let target = aug.k0 * (-aug.k1 * t).exp();
        let mut total = 0.0;
        let mut scale = 1.0 + target;
        for gi in &g {
            total += gi;
            scale += gi.abs();
        }
        let residual = (total - target).abs() / scale;
        if residual > conservation.worst_residual || residual.is_nan() {
            conservation.worst_residual = residual;
        }
        if !(residual <= CONSERVATION_TOL) && conservation.passed {
            conservation.passed = false;
            conservation.witness = Some((w.clone(), t));
        }
        min_extra = min_extra.min(g[n - 1]);

        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let envelope = envelope_factor * (1.0 + norm.powf(2.0 + epsilon));
        for gi in &g {
            fitted = fitted.max(gi.abs() / envelope);
        }

        for i in 0..n {
            let mut face = w.clone();
            face[i] = 0.0;
            sys.eval_into(&face, t, &mut g)?;
            let scale: f64 = 1.0 + g.iter().map(|x| x.abs()).sum::<f64>();
            qp.worst_value = qp.worst_value.min(g[i]);
            if g[i] < -FACE_TOL * scale && qp.passed {
                qp.passed = false;
                qp.witness = Some((i, face));
            }
        }
    }

    Ok(AugmentedVerdict {
        conservation,
        quasi_positive: qp,
        growth: AugmentedGrowthVerdict {
            passed: fitted <= bound_constant * (1.0 + 1e-12),
            fitted_constant: fitted,
            bound_constant,
        },
        min_extra_source: min_extra,
        samples_used: n_samples,
    })
}

/// Worst margin of the weighted mass-control inequality
/// `Σ α_i f_i(u) <= K0 + K1 Σ u_i` on random samples (negative = violated).
pub fn weighted_mass_control_margin(
    sys: &ReactionSystem,
    weights: &[f64],
    sampler: &mut Sampler,
    n_samples: usize,
) -> Result<f64> {
    let n = sys.n_species();
    if weights.len() != n || weights.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::Contract(format!(
            "need {n} positive weights, got {weights:?}"
        )));
    }
    let MassControl { k0, k1 } = sys.mass_control();
    let mut f = vec![0.0; n];
    let mut worst = f64::INFINITY;
    for _ in 0..n_samples {
        let u = sampler.point(n);
        sys.eval_into(&u, 0.0, &mut f)?;
        let lhs: f64 = weights.iter().zip(&f).map(|(a, fi)| a * fi).sum();
        let sum_u: f64 = u.iter().sum();
        worst = worst.min(k0 + k1 * sum_u + 1e-9 * (1.0 + sum_u) - lhs);
    }
    Ok(worst)
}
