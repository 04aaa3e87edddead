use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{apply_laplacian, grad_sup, holder_modulus, Field};
use crate::models::{Kinetics, ReactionSystem};
use crate::solver::{implicit_diffusion_solve, AcceptedStep, StepHook, SystemState};

/// Below this total density `b` is set to `1/d_1`.
pub(crate) const B_FLOOR: f64 = 1e-12;

/// Source term of the `z` equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum K0Schedule {
    Constant {
        k0: f64,
    },
    /// `k0 e^{-k1 t}`, the source of an augmented system.
    Exponential {
        k0: f64,
        k1: f64,
    },
}

impl K0Schedule {
    pub fn for_system(sys: &ReactionSystem) -> Self {
        match sys.kinetics() {
            Kinetics::Augmented(a) => K0Schedule::Exponential { k0: a.k0, k1: a.k1 },
            _ => K0Schedule::Constant {
                k0: sys.mass_control().k0,
            },
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            K0Schedule::Constant { k0 } => k0,
            K0Schedule::Exponential { k0, k1 } => k0 * (-k1 * t).exp(),
        }
    }

    /// An upper bound for `∫_0^t K0(s) ds` that also dominates the
    /// left-endpoint sums of the time stepper.
    pub fn integral_bound(&self, t: f64) -> f64 {
        match *self {
            K0Schedule::Constant { k0 } => k0 * t,
            K0Schedule::Exponential { k0, k1 } if k1 >= 0.0 => k0 * t,
            K0Schedule::Exponential { k0, k1 } => k0 * ((-k1 * t).exp() - 1.0) / (-k1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxiliaryConfig {
    /// Diffusion of the mollified fields; strictly above every `d_i`.
    pub d: f64,
    pub species_diffusion: Vec<f64>,
    pub k0: K0Schedule,
}

impl AuxiliaryConfig {
    pub fn new(d: f64, species_diffusion: Vec<f64>, k0: K0Schedule) -> Result<Self> {
        let d_max = species_diffusion
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if species_diffusion.is_empty() {
            return Err(Error::Contract("auxiliary config needs species diffusion".into()));
        }
        if !(d.is_finite() && d > d_max) {
            return Err(Error::Contract(format!(
                "auxiliary diffusion d = {d} must exceed max d_i = {d_max}"
            )));
        }
        Ok(Self {
            d,
            species_diffusion,
            k0,
        })
    }

    pub fn for_system(sys: &ReactionSystem, d: f64) -> Result<Self> {
        Self::new(d, sys.diffusion().to_vec(), K0Schedule::for_system(sys))
    }

    fn d_min(&self) -> f64 {
        self.species_diffusion
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    fn d_max(&self) -> f64 {
        self.species_diffusion
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryState {
    pub t: f64,
    /// `∂_t v_i - d Δv_i = u_i`, `v_i(0) = 0`.
    pub v: Vec<Field>,
    /// `∂_t z - d Δz = K0(t)`, `z(0) = Σ u_i0`.
    pub z: Field,
    pub z_hat: Field,
    /// `∫_0^t Σ d_i u_i`.
    pub u_hat: Field,
    /// `Σ (d - d_i) v_i`.
    pub v_d: Field,
    /// `d ẑ - û`.
    pub v_d_alt: Field,
    /// `Σ u_i / Σ d_i u_i`.
    pub b: Field,
}

fn b_field(state: &SystemState, d: &[f64]) -> Field {
    let total = state.species_sum();
    let weighted = state.weighted_sum(d);
    let values = total
        .values()
        .iter()
        .zip(weighted.values())
        .map(|(s, w)| if *s > B_FLOOR { s / w } else { 1.0 / d[0] })
        .collect();
    Field::new(*state.grid(), values).expect("b is finite where defined")
}

fn v_d_of(v: &[Field], cfg: &AuxiliaryConfig) -> Result<Field> {
    let mut out = Field::zeros(*v[0].grid());
    for (vi, di) in v.iter().zip(&cfg.species_diffusion) {
        out = out.axpy(cfg.d - di, vi)?;
    }
    Ok(out)
}

impl AuxiliaryState {
    pub fn new(initial: &SystemState, cfg: &AuxiliaryConfig) -> Result<Self> {
        if initial.n_species() != cfg.species_diffusion.len() {
            return Err(Error::Contract(format!(
                "state has {} species, auxiliary config has {}",
                initial.n_species(),
                cfg.species_diffusion.len()
            )));
        }
        let grid = *initial.grid();
        let zero = Field::zeros(grid);
        Ok(Self {
            t: initial.t(),
            v: vec![zero.clone(); initial.n_species()],
            z: initial.species_sum(),
            z_hat: zero.clone(),
            u_hat: zero.clone(),
            v_d: zero.clone(),
            v_d_alt: zero,
            b: b_field(initial, &cfg.species_diffusion),
        })
    }

    fn advance(
        &mut self,
        old: &SystemState,
        new: &SystemState,
        dt: f64,
        cfg: &AuxiliaryConfig,
    ) -> Result<()> {
        let coeff = dt * cfg.d;
        for (vi, ui) in self.v.iter_mut().zip(old.fields()) {
            let rhs = vi.axpy(dt, ui)?;
            let mut next = implicit_diffusion_solve(&rhs, coeff)?;
            for x in next.values_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            *vi = next;
        }

        let source = cfg.k0.at(old.t());
        let rhs = Field::new(
            *self.z.grid(),
            self.z.values().iter().map(|z| z + dt * source).collect(),
        )?;
        let z_new = implicit_diffusion_solve(&rhs, coeff)?;
        self.z_hat = self.z_hat.axpy(0.5 * dt, &self.z)?.axpy(0.5 * dt, &z_new)?;
        self.z = z_new;

        let du_old = old.weighted_sum(&cfg.species_diffusion);
        let du_new = new.weighted_sum(&cfg.species_diffusion);
        self.u_hat = self.u_hat.axpy(0.5 * dt, &du_old)?.axpy(0.5 * dt, &du_new)?;

        self.v_d = v_d_of(&self.v, cfg)?;
        self.v_d_alt = self.z_hat.scaled(cfg.d).axpy(-1.0, &self.u_hat)?;
        self.b = b_field(new, &cfg.species_diffusion);
        self.t = new.t();
        Ok(())
    }
}

/// Advance the auxiliary fields across one accepted solver step.
pub fn evolve_auxiliary(
    step: &AcceptedStep<'_>,
    aux: &AuxiliaryState,
    cfg: &AuxiliaryConfig,
) -> Result<AuxiliaryState> {
    let mut next = aux.clone();
    next.advance(step.old, step.new, step.dt, cfg)?;
    Ok(next)
}

/// Per-record diagnostics, aligned with the solver's snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxRow {
    pub t: f64,
    pub z_sup: f64,
    /// `None` when no cell has `Σ u_i > 1e-12`.
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub vd_consistency: f64,
    pub zvd_residual: f64,
    pub grad_vd_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderSample {
    pub gamma: f64,
    pub v_d: f64,
    pub z_hat: f64,
    pub u_hat: f64,
}

/// Running extrema over the whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSummary {
    pub t_end: f64,
    pub d: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// `M = Σ_i ‖u_i0‖_∞`.
    pub m: f64,
    pub k0_integral: f64,
    pub z_sup: f64,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub u_hat_min: f64,
    /// `max (û - d ẑ)`.
    pub u_hat_excess: f64,
    pub u_hat_sup: f64,
    pub vd_consistency: f64,
    pub zvd_residual: f64,
    pub grad_vd_sup: f64,
    /// `sup |u_i|` over time and species.
    pub u_sup: f64,
    /// `sup |Σ (d - d_i) u_i|`.
    pub f_sup: f64,
    pub holder: Vec<HolderSample>,
}

fn b_extrema(state: &SystemState, b: &Field) -> (Option<f64>, Option<f64>) {
    let total = state.species_sum();
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    for (s, v) in total.values().iter().zip(b.values()) {
        if *s > B_FLOOR {
            lo = Some(lo.map_or(*v, |x| x.min(*v)));
            hi = Some(hi.map_or(*v, |x| x.max(*v)));
        }
    }
    (lo, hi)
}

fn merge_min(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn merge_max(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Solver hook that co-evolves [`AuxiliaryState`] and keeps the running
/// extrema and per-record rows.
#[derive(Debug)]
pub struct AuxTracker {
    cfg: AuxiliaryConfig,
    state: AuxiliaryState,
    gammas: Vec<f64>,
    record_every: usize,
    t_end: f64,
    rows: Vec<AuxRow>,
    summary: AuxSummary,
}

impl AuxTracker {
    /// `record_every` and `t_end` must match the solver configuration so
    /// rows line up with snapshots.
    pub fn new(
        cfg: AuxiliaryConfig,
        initial: &SystemState,
        gammas: Vec<f64>,
        record_every: usize,
        t_end: f64,
    ) -> Result<Self> {
        if record_every == 0 {
            return Err(Error::Contract("record_every must be >= 1".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !(0.0..1.0).contains(*g)) {
            return Err(Error::Domain(format!(
                "Hölder exponent must lie in [0, 1), got {g}"
            )));
        }
        let state = AuxiliaryState::new(initial, &cfg)?;
        let m: f64 = initial.sup_norms().iter().sum();
        let u_d = initial.weighted_sum(
            &cfg.species_diffusion
                .iter()
                .map(|di| cfg.d - di)
                .collect::<Vec<_>>(),
        );
        let (b_min, b_max) = b_extrema(initial, &state.b);
        let summary = AuxSummary {
            t_end,
            d: cfg.d,
            d_min: cfg.d_min(),
            d_max: cfg.d_max(),
            m,
            k0_integral: cfg.k0.integral_bound(t_end - initial.t()),
            z_sup: state.z.sup_norm(),
            b_min,
            b_max,
            u_hat_min: 0.0,
            u_hat_excess: 0.0,
            u_hat_sup: 0.0,
            vd_consistency: 0.0,
            zvd_residual: 0.0,
            grad_vd_sup: 0.0,
            u_sup: initial.sup_norms().into_iter().fold(0.0, f64::max),
            f_sup: u_d.sup_norm(),
            holder: gammas
                .iter()
                .map(|&gamma| HolderSample {
                    gamma,
                    v_d: 0.0,
                    z_hat: 0.0,
                    u_hat: 0.0,
                })
                .collect(),
        };
        let mut tracker = Self {
            cfg,
            state,
            gammas,
            record_every,
            t_end,
            rows: Vec::new(),
            summary,
        };
        let row = tracker.row(initial);
        tracker.rows.push(row);
        Ok(tracker)
    }

    /// Shift `z` by `offset`; a fault-injection probe for the `z` bound.
    pub fn corrupt_z(&mut self, offset: f64) {
        self.state.z = Field::new(
            *self.state.z.grid(),
            self.state.z.values().iter().map(|z| z + offset).collect(),
        )
        .expect("shifted z stays finite");
        self.summary.z_sup = self.summary.z_sup.max(self.state.z.sup_norm());
    }

    pub fn config(&self) -> &AuxiliaryConfig {
        &self.cfg
    }

    pub fn state(&self) -> &AuxiliaryState {
        &self.state
    }

    pub fn rows(&self) -> &[AuxRow] {
        &self.rows
    }

    pub fn summary(&self) -> &AuxSummary {
        &self.summary
    }

    pub fn into_parts(self) -> (AuxiliaryState, Vec<AuxRow>, AuxSummary) {
        (self.state, self.rows, self.summary)
    }

    fn row(&self, u: &SystemState) -> AuxRow {
        let (b_min, b_max) = b_extrema(u, &self.state.b);
        AuxRow {
            t: u.t(),
            z_sup: self.state.z.sup_norm(),
            b_min,
            b_max,
            vd_consistency: vd_consistency_of(&self.state),
            zvd_residual: zvd_of(u, &self.state),
            grad_vd_sup: grad_sup(&self.state.v_d),
        }
    }

    fn sample_holder(&mut self) -> Result<()> {
        for (sample, &gamma) in self.summary.holder.iter_mut().zip(&self.gammas) {
            sample.v_d = sample.v_d.max(holder_modulus(&self.state.v_d, gamma)?);
            sample.z_hat = sample.z_hat.max(holder_modulus(&self.state.z_hat, gamma)?);
            sample.u_hat = sample.u_hat.max(holder_modulus(&self.state.u_hat, gamma)?);
        }
        Ok(())
    }
}

pub(crate) fn vd_consistency_of(aux: &AuxiliaryState) -> f64 {
    aux.v_d
        .values()
        .iter()
        .zip(aux.v_d_alt.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

pub(crate) fn zvd_of(u: &SystemState, aux: &AuxiliaryState) -> f64 {
    let lap = apply_laplacian(&aux.v_d);
    let total = u.species_sum();
    aux.z
        .values()
        .iter()
        .zip(lap.values())
        .zip(total.values())
        .fold(0.0_f64, |m, ((z, l), s)| m.max((z - l - s).abs()))
}

impl StepHook for AuxTracker {
    fn on_accepted_step(&mut self, step: &AcceptedStep<'_>) -> Result<()> {
        self.state.advance(step.old, step.new, step.dt, &self.cfg)?;
        let new = step.new;
        let row = self.row(new);
        let s = &mut self.summary;
        s.z_sup = s.z_sup.max(row.z_sup);
        s.b_min = merge_min(s.b_min, row.b_min);
        s.b_max = merge_max(s.b_max, row.b_max);
        s.vd_consistency = s.vd_consistency.max(row.vd_consistency);
        s.zvd_residual = s.zvd_residual.max(row.zvd_residual);
        s.grad_vd_sup = s.grad_vd_sup.max(row.grad_vd_sup);
        s.u_sup = new.sup_norms().into_iter().fold(s.u_sup, f64::max);
        let weights: Vec<f64> = self
            .cfg
            .species_diffusion
            .iter()
            .map(|di| self.cfg.d - di)
            .collect();
        s.f_sup = s.f_sup.max(new.weighted_sum(&weights).sup_norm());
        let d = self.cfg.d;
        for (uh, zh) in self.state.u_hat.values().iter().zip(self.state.z_hat.values()) {
            s.u_hat_min = s.u_hat_min.min(*uh);
            s.u_hat_excess = s.u_hat_excess.max(uh - d * zh);
            s.u_hat_sup = s.u_hat_sup.max(uh.abs());
        }
        let recorded = (step.index + 1).is_multiple_of(self.record_every) || new.t() >= self.t_end;
        if recorded {
            self.sample_holder()?;
            self.rows.push(row);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::Grid1D;
    use crate::models::{instantiate_model, Growth, MassControl, ModelSpec};
    use crate::solver::{simulate, SolverConfig};

    fn frozen(d1: f64) -> ReactionSystem {
        ReactionSystem::new(
            "frozen",
            vec![d1],
            Kinetics::Custom(Arc::new(|_u, _t, out| out[0] = 0.0)),
            MassControl { k0: 0.0, k1: 0.0 },
            Growth { k: 1.0, epsilon: 0.0 },
        )
        .unwrap()
    }

    fn run(
        sys: &ReactionSystem,
        init: &SystemState,
        cfg: AuxiliaryConfig,
        dt: f64,
        t_end: f64,
    ) -> AuxTracker {
        let mut tracker = AuxTracker::new(cfg, init, vec![0.5], 1, t_end).unwrap();
        let scfg = SolverConfig::new(dt, t_end).unwrap();
        simulate(sys, init, &scfg, &mut [&mut tracker])
            .into_result()
            .unwrap();
        tracker
    }

    #[test]
    fn homogeneous_single_species() {
        let g = Grid1D::new(8, 1.0).unwrap();
        let c = 1.5;
        let (d1, d) = (0.5, 2.0);
        let sys = frozen(d1);
        let init = SystemState::new(0.0, vec![Field::constant(g, c)]).unwrap();
        let cfg = AuxiliaryConfig::for_system(&sys, d).unwrap();
        let tr = run(&sys, &init, cfg, 0.125, 1.0);
        let s = tr.state();
        let t = s.t;
        assert_eq!(t, 1.0);
        for v in s.v[0].values() {
            assert!((v - c * t).abs() < 1e-12);
        }
        for z in s.z.values() {
            assert!((z - c).abs() < 1e-12);
        }
        for v in s.v_d.values() {
            assert!((v - (d - d1) * c * t).abs() < 1e-12);
        }
        assert!(vd_consistency_of(s) < 1e-12);
        assert!(tr.summary().zvd_residual < 1e-12);
        assert_eq!(tr.rows().len(), 9);
    }

    #[test]
    fn equilibrium_keeps_z_constant() {
        let g = Grid1D::new(16, 1.0).unwrap();
        let sys = instantiate_model(ModelSpec::QuadraticReversible, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let init = SystemState::new(0.0, vec![Field::constant(g, 1.0); 4]).unwrap();
        let cfg = AuxiliaryConfig::for_system(&sys, 1.0).unwrap();
        let tr = run(&sys, &init, cfg, 0.01, 0.5);
        for z in tr.state().z.values() {
            assert!((z - 4.0).abs() < 1e-12);
        }
        assert!(tr.summary().zvd_residual < 1e-10);
        assert!((tr.summary().z_sup - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_source_drives_z_linearly() {
        let g = Grid1D::new(8, 1.0).unwrap();
        let cfg = AuxiliaryConfig::new(1.0, vec![0.5], K0Schedule::Constant { k0: 2.0 }).unwrap();
        let init = SystemState::new(0.0, vec![Field::constant(g, 3.0)]).unwrap();
        let mut aux = AuxiliaryState::new(&init, &cfg).unwrap();
        let dt = 0.1;
        let mut old = init.clone();
        for k in 0..10 {
            let new = SystemState::new(old.t() + dt, old.fields().to_vec()).unwrap();
            let step = AcceptedStep {
                index: k,
                dt,
                old: &old,
                new: &new,
            };
            aux = evolve_auxiliary(&step, &aux, &cfg).unwrap();
            old = new;
        }
        for z in aux.z.values() {
            assert!((z - (3.0 + 2.0 * aux.t)).abs() < 1e-12);
        }
    }

    #[test]
    fn config_requires_strictly_larger_d() {
        assert!(AuxiliaryConfig::new(0.4, vec![0.1, 0.4], K0Schedule::Constant { k0: 0.0 }).is_err());
        assert!(AuxiliaryConfig::new(0.41, vec![0.1, 0.4], K0Schedule::Constant { k0: 0.0 }).is_ok());
    }

    #[test]
    fn exponential_schedule_integral() {
        let s = K0Schedule::Exponential { k0: 2.0, k1: -1.0 };
        assert!((s.integral_bound(1.0) - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-14);
        let s = K0Schedule::Exponential { k0: 2.0, k1: 1.0 };
        assert_eq!(s.integral_bound(3.0), 6.0);
        assert!((s.at(1.0) - 2.0 * (-1f64).exp()).abs() < 1e-15);
    }
}
