use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{FitConfig, FitQuantity, ModelConfig, RunConfig};
use crate::diagnostics::{
    b_range_check, check_z_bound, conservation_and_mass, interpolation_scaling_check,
    max_entropy_dissipation, refinement_check, source_matches_schedule, u_hat_checks, AuxRow, AuxSummary,
    AuxTracker, AuxiliaryConfig, CheckEntry, ConservationReport, K0Schedule, ScalingReport, ScalingSample,
    Verdict,
};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::models::{check_structure, ReactionSystem, Sampler, StructureVerdict};
use crate::solver::{simulate, SolverConfig, SystemState, Trajectory};
use crate::theory::{fit_rate_window, free_space_constants, quad_equilibrium, FitMode, FitResult};
use crate::transform::{augment_initial, augment_system_with_defect, verify_augmented, AugmentedVerdict};

const ENTROPY_TOL: f64 = 1e-12;
const MASS_IDENTITY_TOL: f64 = 1e-9;
const REFINEMENT_MIN_RATIO: f64 = 1.8;
const HOLDER_RATIO_RANGE: (f64, f64) = (0.5, 2.0);
/// Samples used to decide whether `Σ f_i = K0(t)` holds identically.
const SOURCE_PROBE_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverallVerdict {
    Pass,
    Fail,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureInfo {
    pub message: String,
    pub time: Option<f64>,
    pub species: Option<usize>,
    pub min_value: Option<f64>,
}

impl FailureInfo {
    fn of(e: &Error) -> Self {
        match e {
            Error::Numerical {
                time,
                species,
                min_value,
                ..
            } => Self {
                message: e.to_string(),
                time: Some(*time),
                species: species.map(|s| s + 1),
                min_value: *min_value,
            },
            other => Self {
                message: other.to_string(),
                time: None,
                species: None,
                min_value: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCounts {
    pub accepted: usize,
    pub rejected: usize,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub name: String,
    pub quantity: String,
    pub t_min: f64,
    pub t_max: f64,
    pub result: Option<FitResult>,
    /// Continuous-time rate `(1 - e^{-mu dt}) / dt` for exponential fits.
    pub corrected_rate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSection {
    pub aux_d: f64,
    pub identities_apply: bool,
    pub summary: AuxSummary,
    pub conservation: Option<ConservationReport>,
    pub refinement: Option<AuxSummary>,
    pub scaling: Option<ScalingReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    /// SHA-256 of the serialized configuration.
    pub config_hash: String,
    pub system: String,
    pub status: RunStatus,
    pub failure: Option<FailureInfo>,
    pub steps: StepCounts,
    pub structure: Option<StructureVerdict>,
    pub augmented: Option<AugmentedVerdict>,
    pub checks: Vec<CheckEntry>,
    pub fits: Vec<FitReport>,
    pub diagnostics: Option<DiagnosticsSection>,
    pub verdict: OverallVerdict,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&CheckEntry> {
        self.checks.iter().filter(|c| c.verdict.is_failure()).collect()
    }
}

/// A finished (or aborted) run: everything needed to write the outputs.
#[derive(Debug)]
pub struct Experiment {
    pub system: ReactionSystem,
    pub trajectory: Trajectory,
    pub aux_rows: Vec<AuxRow>,
    pub report: Report,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

struct Simulated {
    system: ReactionSystem,
    trajectory: Trajectory,
    failure: Option<Error>,
    tracker: Option<AuxTracker>,
}

struct Setup {
    base: ReactionSystem,
    system: ReactionSystem,
    augmented: Option<crate::transform::AugmentedSystem>,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let base = cfg.model.build()?;
    if cfg.augment {
        let aug = augment_system_with_defect(&base, cfg.faults.augmentation_offset);
        Ok(Setup {
            system: aug.augmented.clone(),
            base,
            augmented: Some(aug),
        })
    } else {
        Ok(Setup {
            system: base.clone(),
            base,
            augmented: None,
        })
    }
}

fn simulated_initial(cfg: &RunConfig, grid: Grid1D, scale: f64) -> Result<SystemState> {
    let init = cfg.initial_state(grid, scale)?;
    if cfg.augment {
        augment_initial(&init)
    } else {
        Ok(init)
    }
}

/// One simulation with an optional auxiliary tracker.
fn simulate_once(
    cfg: &RunConfig,
    system: &ReactionSystem,
    grid: Grid1D,
    solver: &SolverConfig,
    scale: f64,
    gammas: Vec<f64>,
    with_tracker: bool,
) -> Result<Simulated> {
    let init = simulated_initial(cfg, grid, scale)?;
    let mut tracker = if with_tracker {
        let aux = AuxiliaryConfig::for_system(system, cfg.aux_d())?;
        let mut t = AuxTracker::new(aux, &init, gammas, solver.record_every, solver.t_end)?;
        if cfg.faults.z_offset != 0.0 {
            t.corrupt_z(cfg.faults.z_offset);
        }
        Some(t)
    } else {
        None
    };
    let outcome = match tracker.as_mut() {
        Some(t) => simulate(system, &init, solver, &mut [t]),
        None => simulate(system, &init, solver, &mut []),
    };
    Ok(Simulated {
        system: system.clone(),
        trajectory: outcome.trajectory,
        failure: outcome.failure,
        tracker,
    })
}

fn structure_entries(v: &StructureVerdict) -> Vec<CheckEntry> {
    vec![
        CheckEntry {
            name: "quasi_positivity".into(),
            measured: v.quasi_positive.worst_value,
            bound: Some(0.0),
            tolerance: 1e-12,
            verdict: Verdict::from_bool(v.quasi_positive.passed),
        },
        CheckEntry {
            name: "mass_control".into(),
            measured: v.mass_control.worst_margin,
            bound: Some(0.0),
            tolerance: 0.0,
            verdict: Verdict::from_bool(v.mass_control.passed),
        },
        CheckEntry {
            name: "growth".into(),
            measured: v.growth.worst_ratio,
            bound: Some(1.0),
            tolerance: 0.0,
            verdict: Verdict::from_bool(v.growth.passed),
        },
    ]
}

fn augmented_entries(v: &AugmentedVerdict) -> Vec<CheckEntry> {
    vec![
        CheckEntry {
            name: "augmented_conservation".into(),
            measured: v.conservation.worst_residual,
            bound: Some(0.0),
            tolerance: 1e-10,
            verdict: Verdict::from_bool(v.conservation.passed),
        },
        CheckEntry {
            name: "augmented_quasi_positivity".into(),
            measured: v.quasi_positive.worst_value,
            bound: Some(0.0),
            tolerance: 1e-10,
            verdict: Verdict::from_bool(v.quasi_positive.passed),
        },
        CheckEntry::recorded("augmented_growth_constant", v.growth.fitted_constant),
    ]
}

fn series(traj: &Trajectory, f: impl Fn(&crate::solver::Snapshot) -> f64) -> Vec<(f64, f64)> {
    traj.snapshots.iter().map(|s| (s.t, f(s))).collect()
}

fn equilibrium_distance_series(traj: &Trajectory, length: f64) -> Result<Vec<(f64, f64)>> {
    let m = &traj.snapshots[0].masses;
    let eq = quad_equilibrium([
        (m[0] + m[2]) / length,
        (m[1] + m[2]) / length,
        (m[1] + m[3]) / length,
    ])?;
    Ok(series(traj, |s| {
        (0..4)
            .map(|i| {
                s.state
                    .species(i)
                    .values()
                    .iter()
                    .fold(0.0_f64, |a, v| a.max((v - eq.u[i]).abs()))
            })
            .fold(0.0, f64::max)
    }))
}

fn run_fit(name: &str, quantity: &str, data: Result<Vec<(f64, f64)>>, fc: &FitConfig, dt: f64) -> FitReport {
    let fitted = data.and_then(|d| fit_rate_window(&d, fc.mode, fc.t_min, fc.t_max));
    match fitted {
        Ok(r) => FitReport {
            name: name.into(),
            quantity: quantity.into(),
            t_min: fc.t_min,
            t_max: fc.t_max,
            corrected_rate: (fc.mode == FitMode::Exponential).then(|| (1.0 - (-r.rate * dt).exp()) / dt),
            result: Some(r),
            error: None,
        },
        Err(e) => FitReport {
            name: name.into(),
            quantity: quantity.into(),
            t_min: fc.t_min,
            t_max: fc.t_max,
            result: None,
            corrected_rate: None,
            error: Some(e.to_string()),
        },
    }
}

fn default_fits(cfg: &RunConfig) -> Vec<FitConfig> {
    let t_end = cfg.solver.t_end;
    match cfg.model {
        ModelConfig::QuadraticReversible { .. } => vec![FitConfig {
            quantity: FitQuantity::EquilibriumDistance,
            mode: FitMode::Exponential,
            t_min: 0.25 * t_end,
            t_max: t_end,
        }],
        ModelConfig::SkewLotkaVolterra { .. } => vec![FitConfig {
            quantity: FitQuantity::TotalMass,
            mode: FitMode::Exponential,
            t_min: 0.0,
            t_max: t_end,
        }],
        ModelConfig::Polynomial { .. } => Vec::new(),
    }
}

fn quantity_name(q: FitQuantity) -> &'static str {
    match q {
        FitQuantity::TotalMass => "total_mass",
        FitQuantity::SupNorm => "sup_norm",
        FitQuantity::EquilibriumDistance => "equilibrium_distance",
    }
}

/// `m(t_n) = (1 - tau dt)^n m0` for skew Lotka-Volterra with uniform `tau`.
fn mass_identity_check(cfg: &RunConfig, traj: &Trajectory) -> Option<CheckEntry> {
    let ModelConfig::SkewLotkaVolterra { tau, .. } = &cfg.model else {
        return None;
    };
    if cfg.augment || tau.windows(2).any(|w| w[0] != w[1]) {
        return None;
    }
    if traj.rejected_steps > 0 {
        return Some(CheckEntry::skipped("mass_identity"));
    }
    let dt = cfg.solver.dt;
    let factor = 1.0 - tau[0] * dt;
    let m0: f64 = traj.snapshots[0].masses.iter().sum();
    let mut worst = 0.0_f64;
    for s in &traj.snapshots {
        let n = (s.t / dt).round() as i32;
        let expected = factor.powi(n) * m0;
        let m: f64 = s.masses.iter().sum();
        worst = worst.max((m - expected).abs() / expected.abs().max(f64::MIN_POSITIVE));
    }
    Some(CheckEntry::upper("mass_identity", worst, 0.0, MASS_IDENTITY_TOL))
}

fn holder_ratio_checks(coarse: &AuxSummary, fine: &AuxSummary) -> Vec<CheckEntry> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (c, f) in coarse.holder.iter().zip(&fine.holder) {
        for (a, b) in [(c.v_d, f.v_d), (c.z_hat, f.z_hat), (c.u_hat, f.u_hat)] {
            if a > 1e-12 && b > 1e-12 {
                lo = lo.min(a / b);
                hi = hi.max(a / b);
            }
        }
    }
    if !lo.is_finite() {
        return vec![
            CheckEntry::skipped("holder_refinement_min"),
            CheckEntry::skipped("holder_refinement_max"),
        ];
    }
    vec![
        CheckEntry::lower("holder_refinement_min", lo, HOLDER_RATIO_RANGE.0, 0.0),
        CheckEntry::upper("holder_refinement_max", hi, HOLDER_RATIO_RANGE.1, 0.0),
    ]
}

/// Simulate, audit and fit as configured. Numerical failures abort the run
/// but still produce a report; setup errors are returned.
pub fn run_experiment(cfg: &RunConfig) -> Result<Experiment> {
    cfg.validate()?;
    let Setup {
        base,
        system,
        augmented,
    } = setup(cfg)?;
    let grid = cfg.grid()?;
    let solver = cfg.solver.solver_config();
    solver.validate()?;
    let diag = &cfg.diagnostics;
    let length = cfg.grid.length;

    let main = simulate_once(
        cfg,
        &system,
        grid,
        &solver,
        1.0,
        diag.gammas.clone(),
        diag.enabled,
    )?;
    let traj = &main.trajectory;
    let mut checks = Vec::new();

    let structure = if diag.enabled && diag.structure {
        let v = check_structure(&base, &mut Sampler::seeded(cfg.seed), diag.structure_samples)?;
        checks.extend(structure_entries(&v));
        Some(v)
    } else {
        None
    };
    let augmented_verdict = match &augmented {
        Some(aug) if diag.enabled => {
            let v = verify_augmented(
                aug,
                &mut Sampler::seeded(cfg.seed.wrapping_add(1)),
                diag.structure_samples.max(1),
                cfg.solver.t_end,
            )?;
            checks.extend(augmented_entries(&v));
            Some(v)
        }
        _ => None,
    };

    let mut diagnostics = None;
    if let Some(tracker) = &main.tracker {
        let summary = tracker.summary().clone();
        let schedule = K0Schedule::for_system(&system);
        let identities = source_matches_schedule(
            &system,
            &schedule,
            &mut Sampler::seeded(cfg.seed.wrapping_add(2)),
            SOURCE_PROBE_SAMPLES,
            cfg.solver.t_end,
        )?;
        if diag.z_bound {
            checks.push(check_z_bound(&summary));
        }
        if diag.b_range {
            checks.extend(b_range_check(&summary));
        }
        if diag.u_hat {
            let entries = u_hat_checks(&summary);
            for e in entries {
                if identities || e.name == "u_hat_nonnegative" {
                    checks.push(e);
                } else {
                    checks.push(CheckEntry::skipped(e.name));
                }
            }
        }
        if diag.identities {
            if identities {
                checks.push(CheckEntry::recorded("vd_consistency", summary.vd_consistency));
                checks.push(CheckEntry::recorded("zvd_residual", summary.zvd_residual));
            } else {
                checks.push(CheckEntry::skipped("vd_consistency"));
                checks.push(CheckEntry::skipped("zvd_residual"));
            }
        }
        checks.push(CheckEntry::recorded("grad_vd_sup", summary.grad_vd_sup));
        checks.push(CheckEntry::recorded("u_sup", summary.u_sup));

        let conservation = if diag.conservation && !traj.snapshots.is_empty() {
            let c = conservation_and_mass(traj, &system)?;
            checks.extend(c.checks.iter().cloned());
            Some(c)
        } else {
            None
        };

        let refinement = if diag.refinement && main.failure.is_none() {
            let fine_grid = grid.refined(2)?;
            let mut fine_solver = solver;
            fine_solver.dt = solver.dt / 2.0;
            fine_solver.record_every = solver.record_every * 2;
            let fine = simulate_once(
                cfg,
                &system,
                fine_grid,
                &fine_solver,
                1.0,
                diag.gammas.clone(),
                true,
            )?;
            if let Some(e) = fine.failure {
                return Err(e);
            }
            let fs = fine.tracker.expect("tracker requested").summary().clone();
            if identities {
                checks.push(refinement_check(
                    "vd_refinement_ratio",
                    summary.vd_consistency,
                    fs.vd_consistency,
                    REFINEMENT_MIN_RATIO,
                ));
                checks.push(refinement_check(
                    "zvd_refinement_ratio",
                    summary.zvd_residual,
                    fs.zvd_residual,
                    REFINEMENT_MIN_RATIO,
                ));
            }
            checks.extend(holder_ratio_checks(&summary, &fs));
            Some(fs)
        } else {
            None
        };

        let scaling = match &diag.scaling_amplitudes {
            Some(amps) if main.failure.is_none() => {
                let mut samples = Vec::with_capacity(amps.len());
                for &a in amps {
                    let run = simulate_once(cfg, &system, grid, &solver, a, vec![diag.scaling_gamma], true)?;
                    if let Some(e) = run.failure {
                        return Err(e);
                    }
                    let s = run.tracker.expect("tracker requested").summary().clone();
                    samples.push(ScalingSample {
                        amplitude: a,
                        grad_vd: s.grad_vd_sup,
                        holder: s.holder[0].v_d,
                        f_sup: s.f_sup,
                    });
                }
                let b = free_space_constants(1, cfg.aux_d(), diag.scaling_gamma)?.b;
                let r = interpolation_scaling_check(&samples, diag.scaling_gamma, b)?;
                checks.extend(r.checks.iter().cloned());
                Some(r)
            }
            _ => None,
        };

        diagnostics = Some(DiagnosticsSection {
            aux_d: cfg.aux_d(),
            identities_apply: identities,
            summary,
            conservation,
            refinement,
            scaling,
        });
    }

    if diag.enabled && system.has_entropy_structure() {
        let mut worst = f64::NEG_INFINITY;
        for s in &traj.snapshots {
            if let Some(e) = max_entropy_dissipation(&system, &s.state)? {
                worst = worst.max(e);
            }
        }
        if worst.is_finite() {
            checks.push(CheckEntry::upper("entropy_dissipation", worst, 0.0, ENTROPY_TOL));
        }
    }
    if diag.enabled {
        checks.extend(mass_identity_check(cfg, traj));
    }

    let mut fits = Vec::new();
    if diag.enabled && !traj.snapshots.is_empty() {
        let dt = cfg.solver.dt;
        let configured = diag.fits.clone().unwrap_or_else(|| default_fits(cfg));
        for (k, fc) in configured.iter().enumerate() {
            let name = quantity_name(fc.quantity);
            let data = match fc.quantity {
                FitQuantity::TotalMass => Ok(series(traj, |s| s.masses.iter().sum())),
                FitQuantity::SupNorm => Ok(series(traj, |s| s.sup_norms.iter().copied().fold(0.0, f64::max))),
                FitQuantity::EquilibriumDistance => equilibrium_distance_series(traj, length),
            };
            fits.push(run_fit(&format!("fit_{}", k + 1), name, data, fc, dt));
        }
        if let Some(aug) = &augmented {
            if aug.k0 == 0.0 && aug.k1 < 0.0 {
                let n = base.n_species();
                let k1 = aug.k1;
                let data = series(traj, |s| (k1 * s.t).exp() * s.masses[..n].iter().sum::<f64>());
                let fc = FitConfig {
                    quantity: FitQuantity::TotalMass,
                    mode: FitMode::Exponential,
                    t_min: 0.0,
                    t_max: cfg.solver.t_end,
                };
                let r = run_fit(
                    "reconstructed_decay",
                    "reconstructed_total_mass",
                    Ok(data),
                    &fc,
                    dt,
                );
                if let Some(fit) = &r.result {
                    let mu = fit.rate;
                    let ok = mu > 0.0 && mu <= -k1 * (1.0 + 1e-6);
                    checks.push(CheckEntry {
                        name: "reconstructed_decay_rate".into(),
                        measured: mu,
                        bound: Some(-k1),
                        tolerance: 1e-6 * k1.abs(),
                        verdict: Verdict::from_bool(ok),
                    });
                }
                fits.push(r);
            }
        }
    }

    let status = if main.failure.is_some() {
        RunStatus::Aborted
    } else {
        RunStatus::Completed
    };
    let verdict = if main.failure.is_some() {
        OverallVerdict::Aborted
    } else if checks.iter().any(|c| c.verdict.is_failure()) {
        OverallVerdict::Fail
    } else {
        OverallVerdict::Pass
    };
    let last_t = traj.last().map_or(0.0, |s| s.t);
    let (aux_rows, system_name) = (
        main.tracker.map(|t| t.into_parts().1).unwrap_or_default(),
        main.system.name().to_string(),
    );
    let report = Report {
        config: cfg.clone(),
        config_hash: config_hash(cfg),
        system: system_name,
        status,
        failure: main.failure.as_ref().map(FailureInfo::of),
        steps: StepCounts {
            accepted: traj.accepted_steps,
            rejected: traj.rejected_steps,
            t_final: last_t,
        },
        structure,
        augmented: augmented_verdict,
        checks,
        fits,
        diagnostics,
        verdict,
    };
    Ok(Experiment {
        system: main.system,
        trajectory: main.trajectory,
        aux_rows,
        report,
    })
}
