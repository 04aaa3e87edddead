//! C ABI over `rdcheck`.
//!
//! Every fallible function returns an [`RdStatus`]; on failure the message is
//! available from [`rd_last_error_message`] on the same thread. Handles are
//! opaque, created by `*_new`/`*_from_json`/`*_run_json` functions and released
//! by the matching `*_free`. Strings returned as `char *` are owned by the
//! caller and must be released with [`rd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rdcheck::app::{
    render_csv, render_report, run_experiment, Experiment, ModelConfig, OverallVerdict, RunConfig,
};
use rdcheck::models::ReactionSystem;
use rdcheck::solver::{simulate, SolverConfig, SystemState, Trajectory};
use rdcheck::theory::{exponent_algebra, free_space_constants, quad_equilibrium};
use rdcheck::transform::{augment_initial, augment_system_with_defect};
use rdcheck::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigParse = 3,
    ConfigInvalid = 4,
    Domain = 5,
    Contract = 6,
    Numerical = 7,
    Data = 8,
    Io = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdVerdict {
    Pass = 0,
    Fail = 1,
    Aborted = 2,
}

/// Free-space interpolation constants.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdConstants {
    pub b4: f64,
    pub b5: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdExponents {
    pub lambda: f64,
    /// NaN when not admissible.
    pub xi: f64,
    pub admissible: bool,
}

/// A reaction system.
pub struct RdModel {
    system: ReactionSystem,
}

/// A configured simulation and, once run, its trajectory.
pub struct RdSimulation {
    system: ReactionSystem,
    initial: SystemState,
    solver: SolverConfig,
    trajectory: Option<Trajectory>,
}

/// A completed experiment with its report.
pub struct RdExperiment {
    inner: Experiment,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Contract(_) => RdStatus::Contract,
            Error::Domain(_) | Error::BoundaryEquilibrium { .. } => RdStatus::Domain,
            Error::Numerical { .. } => RdStatus::Numerical,
            Error::Data(_) => RdStatus::Data,
            Error::ConfigParse(_) => RdStatus::ConfigParse,
            Error::ConfigInvalid(_) => RdStatus::ConfigInvalid,
            Error::Io { .. } => RdStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside rdcheck".into());
            RdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RdStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(RdStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, released once.
#[no_mangle]
pub unsafe extern "C" fn rd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must point to writable memory for one `RdConstants`.
#[no_mangle]
pub unsafe extern "C" fn rd_free_space_constants(
    n: u32,
    d: f64,
    gamma: f64,
    out: *mut RdConstants,
) -> RdStatus {
    guard(|| {
        let out = borrow_mut(out, "out")?;
        let c = free_space_constants(n, d, gamma)?;
        *out = RdConstants {
            b4: c.b4,
            b5: c.b5,
            b: c.b,
        };
        Ok(())
    })
}

/// Writes `u1..u4` to `out`.
///
/// # Safety
/// `out` must point to writable memory for four doubles.
#[no_mangle]
pub unsafe extern "C" fn rd_quad_equilibrium(m13: f64, m23: f64, m24: f64, out: *mut f64) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let eq = quad_equilibrium([m13, m23, m24])?;
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&eq.u);
        Ok(())
    })
}

/// # Safety
/// `out` must point to writable memory for one `RdExponents`.
#[no_mangle]
pub unsafe extern "C" fn rd_exponent_algebra(epsilon: f64, delta: f64, out: *mut RdExponents) -> RdStatus {
    guard(|| {
        let out = borrow_mut(out, "out")?;
        let e = exponent_algebra(epsilon, delta)?;
        *out = RdExponents {
            lambda: e.lambda,
            xi: e.xi.unwrap_or(f64::NAN),
            admissible: e.admissible,
        };
        Ok(())
    })
}

/// Build a model from the JSON `model` object of a run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_model_from_json(json: *const c_char, out: *mut *mut RdModel) -> RdStatus {
    guard(|| {
        let out = borrow_mut(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Failure(RdStatus::ConfigParse, e.to_string()))?;
        let system = cfg.build()?;
        *out = Box::into_raw(Box::new(RdModel { system }));
        Ok(())
    })
}

/// Number of species, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_model_n_species(model: *const RdModel) -> usize {
    model.as_ref().map_or(0, |m| m.system.n_species())
}

/// Evaluate `f(u, t)` into `out`; both arrays have `n` entries.
///
/// # Safety
/// `u` and `out` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rd_model_eval(
    model: *const RdModel,
    u: *const f64,
    n: usize,
    t: f64,
    out: *mut f64,
) -> RdStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        if u.is_null() || out.is_null() {
            return Err(null("u or out"));
        }
        let expected = m.system.n_species();
        if n != expected {
            return Err(Failure(
                RdStatus::Contract,
                format!("expected {expected} species, got {n}"),
            ));
        }
        let f = m.system.eval_at(std::slice::from_raw_parts(u, n), t)?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&f);
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rd_model_free(model: *mut RdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Prepare a simulation from a full run configuration (JSON).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_from_json(
    json: *const c_char,
    out: *mut *mut RdSimulation,
) -> RdStatus {
    guard(|| {
        let out = borrow_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(read_str(json, "json")?)?;
        let base = cfg.model.build()?;
        let grid = cfg.grid()?;
        let mut initial = cfg.initial_state(grid, 1.0)?;
        let system = if cfg.augment {
            initial = augment_initial(&initial)?;
            augment_system_with_defect(&base, cfg.faults.augmentation_offset).augmented
        } else {
            base
        };
        *out = Box::into_raw(Box::new(RdSimulation {
            system,
            initial,
            solver: cfg.solver.solver_config(),
            trajectory: None,
        }));
        Ok(())
    })
}

/// Integrate to the configured end time. On a numerical failure the partial
/// trajectory is kept and `RD_STATUS_NUMERICAL` is returned.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_run(sim: *mut RdSimulation) -> RdStatus {
    guard(|| {
        let sim = borrow_mut(sim, "sim")?;
        let outcome = simulate(&sim.system, &sim.initial, &sim.solver, &mut []);
        sim.trajectory = Some(outcome.trajectory);
        match outcome.failure {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    })
}

/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_snapshot_count(sim: *const RdSimulation) -> usize {
    sim.as_ref()
        .and_then(|s| s.trajectory.as_ref())
        .map_or(0, |t| t.snapshots.len())
}

/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_n_species(sim: *const RdSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.system.n_species())
}

/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_n_cells(sim: *const RdSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.initial.grid().n_cells())
}

fn snapshot(sim: &RdSimulation, k: usize) -> Result<&rdcheck::solver::Snapshot, Failure> {
    let traj = sim
        .trajectory
        .as_ref()
        .ok_or_else(|| Failure(RdStatus::Contract, "simulation has not been run".into()))?;
    traj.snapshots.get(k).ok_or_else(|| {
        Failure(
            RdStatus::OutOfRange,
            format!("snapshot {k} out of range ({} recorded)", traj.snapshots.len()),
        )
    })
}

/// # Safety
/// `sim` must be a live handle and `t` writable.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_snapshot_time(
    sim: *const RdSimulation,
    k: usize,
    t: *mut f64,
) -> RdStatus {
    guard(|| {
        let sim = borrow(sim, "sim")?;
        let t = borrow_mut(t, "t")?;
        *t = snapshot(sim, k)?.t;
        Ok(())
    })
}

/// Copy species `species` (0-based) of snapshot `k` into `buf`, which must
/// hold exactly `n_cells` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_copy_species(
    sim: *const RdSimulation,
    k: usize,
    species: usize,
    buf: *mut f64,
    len: usize,
) -> RdStatus {
    guard(|| {
        let sim = borrow(sim, "sim")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let snap = snapshot(sim, k)?;
        let n = snap.state.n_species();
        if species >= n {
            return Err(Failure(
                RdStatus::OutOfRange,
                format!("species {species} out of range ({n})"),
            ));
        }
        let values = snap.state.species(species).values();
        if len != values.len() {
            return Err(Failure(
                RdStatus::Contract,
                format!("buffer holds {len} values, field has {}", values.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(values);
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_free(sim: *mut RdSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Run a full experiment (simulation, diagnostics, fits) without writing
/// the configured output files. An aborted run still yields a handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_run_json(
    json: *const c_char,
    out: *mut *mut RdExperiment,
) -> RdStatus {
    guard(|| {
        let out = borrow_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(read_str(json, "json")?)?;
        let inner = run_experiment(&cfg)?;
        *out = Box::into_raw(Box::new(RdExperiment { inner }));
        Ok(())
    })
}

/// Overall verdict; `RD_VERDICT_ABORTED` for NULL.
///
/// # Safety
/// `exp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_verdict(exp: *const RdExperiment) -> RdVerdict {
    match exp.as_ref().map(|e| e.inner.report.verdict) {
        Some(OverallVerdict::Pass) => RdVerdict::Pass,
        Some(OverallVerdict::Fail) => RdVerdict::Fail,
        Some(OverallVerdict::Aborted) | None => RdVerdict::Aborted,
    }
}

/// Number of failed checks, or 0 for NULL.
///
/// # Safety
/// `exp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_failed_checks(exp: *const RdExperiment) -> usize {
    exp.as_ref().map_or(0, |e| e.inner.report.failed_checks().len())
}

/// The JSON report; release with [`rd_string_free`]. NULL for a NULL handle.
///
/// # Safety
/// `exp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_report_json(exp: *const RdExperiment) -> *mut c_char {
    match exp.as_ref() {
        Some(e) => into_c_string(render_report(&e.inner.report)),
        None => ptr::null_mut(),
    }
}

/// The trajectory CSV; release with [`rd_string_free`]. NULL on failure.
///
/// # Safety
/// `exp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_csv(exp: *const RdExperiment) -> *mut c_char {
    let Some(e) = exp.as_ref() else {
        return ptr::null_mut();
    };
    match render_csv(&e.inner) {
        Ok(s) => into_c_string(s),
        Err(err) => {
            set_last_error(err.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `exp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rd_experiment_free(exp: *mut RdExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}
