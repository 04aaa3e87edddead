//! IMEX-Euler time stepping: implicit Neumann diffusion, explicit reaction
//! at the old state, with reject-and-halve positivity control.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{integrate, Field, Grid1D};
use crate::models::ReactionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Values below this reject the step; values in `[floor, 0)` are clamped.
    pub positivity_floor: f64,
    pub max_step_halvings: u32,
    pub record_every: usize,
}

impl SolverConfig {
    pub const DEFAULT_FLOOR: f64 = -1e-12;
    pub const DEFAULT_MAX_HALVINGS: u32 = 20;

    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            positivity_floor: Self::DEFAULT_FLOOR,
            max_step_halvings: Self::DEFAULT_MAX_HALVINGS,
            record_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Contract(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Contract(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.dt > self.t_end {
            return Err(Error::Contract(format!(
                "dt = {} exceeds t_end = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.positivity_floor <= 0.0) {
            return Err(Error::Contract("positivity_floor must be <= 0".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Contract("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// All species at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    t: f64,
    fields: Vec<Field>,
}

impl SystemState {
    pub fn new(t: f64, fields: Vec<Field>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::Contract("state needs at least one species".into()));
        };
        let grid = *first.grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::Contract("all species must share one grid".into()));
        }
        if !t.is_finite() {
            return Err(Error::Contract(format!("non-finite time {t}")));
        }
        Ok(Self { t, fields })
    }

    /// Rejects states with any negative value.
    pub fn nonnegative(t: f64, fields: Vec<Field>) -> Result<Self> {
        let state = Self::new(t, fields)?;
        for (i, f) in state.fields.iter().enumerate() {
            if f.min() < 0.0 {
                return Err(Error::Contract(format!(
                    "species {} has negative value {}",
                    i + 1,
                    f.min()
                )));
            }
        }
        Ok(state)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn species(&self, i: usize) -> &Field {
        &self.fields[i]
    }

    pub fn n_species(&self) -> usize {
        self.fields.len()
    }

    pub fn grid(&self) -> &Grid1D {
        self.fields[0].grid()
    }

    /// The state vector `(u_1(x_j), ..., u_N(x_j))` at cell `j`.
    pub fn point(&self, j: usize) -> Vec<f64> {
        self.fields.iter().map(|f| f.values()[j]).collect()
    }

    pub(crate) fn point_into(&self, j: usize, out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.fields) {
            *o = f.values()[j];
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.fields.iter().map(integrate).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    pub fn sup_norms(&self) -> Vec<f64> {
        self.fields.iter().map(Field::sup_norm).collect()
    }

    /// Pointwise `Σ_i w_i u_i`.
    pub fn weighted_sum(&self, weights: &[f64]) -> Field {
        let n = self.grid().n_cells();
        let mut out = vec![0.0; n];
        for (w, f) in weights.iter().zip(&self.fields) {
            for (o, v) in out.iter_mut().zip(f.values()) {
                *o += w * v;
            }
        }
        Field::from_raw(*self.grid(), out)
    }

    /// Pointwise `Σ_i u_i`.
    pub fn species_sum(&self) -> Field {
        self.weighted_sum(&vec![1.0; self.n_species()])
    }

    pub fn max_distance(&self, other: &SystemState) -> Result<f64> {
        if self.n_species() != other.n_species() {
            return Err(Error::Contract("species count mismatch".into()));
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.fields.iter().zip(&other.fields) {
            worst = worst.max(a.sup_distance(b)?);
        }
        Ok(worst)
    }

    fn min_entry(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, f) in self.fields.iter().enumerate() {
            for &v in f.values() {
                // NaN compares false everywhere; surface it as -inf
                let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
                if v < best.1 {
                    best = (i, v);
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: SystemState,
    pub sup_norms: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Snapshot {
    fn of(state: &SystemState) -> Self {
        Self {
            t: state.t,
            sup_norms: state.sup_norms(),
            masses: state.masses(),
            state: state.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Thomas algorithm for a tridiagonal system. `lower` and `upper` hold the
/// `n - 1` sub- and super-diagonal entries.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::Contract(format!(
            "tridiagonal shapes: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::numerical(
            f64::NAN,
            "zero pivot in tridiagonal solve at row 0",
        ));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::numerical(
                f64::NAN,
                format!("zero pivot in tridiagonal solve at row {i}"),
            ));
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solve `(I - coeff L) x = rhs` with the Neumann Laplacian `L`.
pub fn implicit_diffusion_solve(rhs: &Field, coeff: f64) -> Result<Field> {
    let grid = *rhs.grid();
    let n = grid.n_cells();
    let h = grid.spacing();
    let r = coeff / (h * h);
    let off = vec![-r; n - 1];
    let mut diag = vec![1.0 + 2.0 * r; n];
    diag[0] = 1.0 + r;
    diag[n - 1] = 1.0 + r;
    let x = solve_tridiagonal(&off, &diag, &off, rhs.values())?;
    Ok(Field::from_raw(grid, x))
}

/// One IMEX-Euler step: `(I - dt d_i L) u_i' = u_i + dt f_i(u, t)`.
/// No positivity handling.
pub fn imex_step(state: &SystemState, sys: &ReactionSystem, dt: f64) -> Result<SystemState> {
    let n_species = sys.n_species();
    if state.n_species() != n_species {
        return Err(Error::Contract(format!(
            "state has {} species, system has {n_species}",
            state.n_species()
        )));
    }
    let grid = *state.grid();
    let n = grid.n_cells();
    let mut rhs: Vec<Vec<f64>> = state.fields.iter().map(|f| f.values().to_vec()).collect();
    let mut u = vec![0.0; n_species];
    let mut f = vec![0.0; n_species];
    for j in 0..n {
        state.point_into(j, &mut u);
        sys.eval_into(&u, state.t, &mut f)
            .map_err(|e| Error::numerical(state.t, format!("reaction evaluation failed at cell {j}: {e}")))?;
        for (r, fi) in rhs.iter_mut().zip(&f) {
            r[j] += dt * fi;
        }
    }
    let mut fields = Vec::with_capacity(n_species);
    for (i, r) in rhs.into_iter().enumerate() {
        let field = Field::from_raw(grid, r);
        let next = implicit_diffusion_solve(&field, dt * sys.diffusion()[i]).map_err(|e| match e {
            Error::Numerical { message, .. } => Error::Numerical {
                time: state.t,
                species: Some(i),
                min_value: None,
                message,
            },
            other => other,
        })?;
        fields.push(next);
    }
    Ok(SystemState {
        t: state.t + dt,
        fields,
    })
}

/// What a hook sees after each accepted step.
#[derive(Debug)]
pub struct AcceptedStep<'a> {
    pub index: usize,
    pub dt: f64,
    pub old: &'a SystemState,
    pub new: &'a SystemState,
}

pub trait StepHook {
    fn on_accepted_step(&mut self, step: &AcceptedStep<'_>) -> Result<()>;
}

impl<F> StepHook for F
where
    F: FnMut(&AcceptedStep<'_>) -> Result<()>,
{
    fn on_accepted_step(&mut self, step: &AcceptedStep<'_>) -> Result<()> {
        self(step)
    }
}

/// Trajectory up to the point of failure, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn into_result(self) -> Result<Trajectory> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self.trajectory),
        }
    }
}

/// Step from `initial` to `cfg.t_end`, returning the partial trajectory on
/// failure.
pub fn simulate(
    sys: &ReactionSystem,
    initial: &SystemState,
    cfg: &SolverConfig,
    hooks: &mut [&mut dyn StepHook],
) -> RunOutcome {
    let mut traj = Trajectory::default();
    if let Err(e) = cfg.validate() {
        return RunOutcome {
            trajectory: traj,
            failure: Some(e),
        };
    }
    if initial.n_species() != sys.n_species() {
        let e = Error::Contract(format!(
            "initial state has {} species, system has {}",
            initial.n_species(),
            sys.n_species()
        ));
        return RunOutcome {
            trajectory: traj,
            failure: Some(e),
        };
    }
    let (_, min0) = initial.min_entry();
    if min0 < 0.0 {
        let e = Error::Contract(format!("initial data must be nonnegative, found {min0}"));
        return RunOutcome {
            trajectory: traj,
            failure: Some(e),
        };
    }

    let mut state = initial.clone();
    traj.snapshots.push(Snapshot::of(&state));
    let t_end = cfg.t_end;
    let mut since_record = 0usize;

    while state.t < t_end {
        let remaining = t_end - state.t;
        let mut dt = cfg.dt;
        let mut lands_on_end = false;
        if remaining <= cfg.dt * (1.0 + 1e-9) {
            dt = remaining;
            lands_on_end = true;
        }

        let mut halvings = 0u32;
        let next = loop {
            let trial = match imex_step(&state, sys, dt) {
                Ok(s) => s,
                Err(e) => {
                    return RunOutcome {
                        trajectory: traj,
                        failure: Some(e),
                    }
                }
            };
            let (species, min) = trial.min_entry();
            if min >= cfg.positivity_floor {
                break trial;
            }
            traj.rejected_steps += 1;
            if halvings == cfg.max_step_halvings {
                let e = Error::Numerical {
                    time: state.t,
                    species: Some(species),
                    min_value: Some(min),
                    message: format!(
                        "positivity not restored after {halvings} step halvings (species {}, min {min})",
                        species + 1
                    ),
                };
                return RunOutcome {
                    trajectory: traj,
                    failure: Some(e),
                };
            }
            halvings += 1;
            dt *= 0.5;
            lands_on_end = false;
        };

        let mut next = next;
        for f in &mut next.fields {
            for v in f.values_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        next.t = if lands_on_end { t_end } else { state.t + dt };

        let step = AcceptedStep {
            index: traj.accepted_steps,
            dt,
            old: &state,
            new: &next,
        };
        for hook in hooks.iter_mut() {
            if let Err(e) = hook.on_accepted_step(&step) {
                return RunOutcome {
                    trajectory: traj,
                    failure: Some(e),
                };
            }
        }
        traj.accepted_steps += 1;
        since_record += 1;
        state = next;
        if since_record == cfg.record_every || state.t >= t_end {
            traj.snapshots.push(Snapshot::of(&state));
            since_record = 0;
        }
    }

    RunOutcome {
        trajectory: traj,
        failure: None,
    }
}

pub fn run_simulation(
    sys: &ReactionSystem,
    initial: &SystemState,
    cfg: &SolverConfig,
    hooks: &mut [&mut dyn StepHook],
) -> Result<Trajectory> {
    simulate(sys, initial, cfg, hooks).into_result()
}
