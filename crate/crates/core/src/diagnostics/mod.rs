//! Auxiliary fields co-evolved with a run (`v_i`, `z`, `ẑ`, `û`, `v_d`, `b`)
//! and the identities and bounds they are expected to satisfy, each reported
//! as a measured value against a bound.

mod auxiliary;
mod checks;
mod heat;

use serde::Serialize;

pub use auxiliary::{
    evolve_auxiliary, AuxRow, AuxSummary, AuxTracker, AuxiliaryConfig, AuxiliaryState, HolderSample,
    K0Schedule,
};
pub use checks::{
    b_range_check, check_z_bound, conservation_and_mass, interpolation_scaling_check,
    max_entropy_dissipation, refinement_check, source_matches_schedule, u_hat_checks,
    vd_consistency_residual, zvd_residual, ConservationReport, ScalingReport, ScalingSample,
};
pub use heat::{forced_heat_probe, ForcedHeatConfig, ForcedHeatProbe};

/// Outcome of one check. `Recorded` values are reported without a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Recorded,
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub measured: f64,
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckEntry {
    /// Passes when `measured <= bound + tolerance`.
    pub fn upper(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let ok = measured.is_finite() && measured <= bound + tolerance;
        Self {
            name: name.into(),
            measured,
            bound: Some(bound),
            tolerance,
            verdict: Verdict::from_bool(ok),
        }
    }

    /// Passes when `measured >= bound - tolerance`.
    pub fn lower(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let ok = measured.is_finite() && measured >= bound - tolerance;
        Self {
            name: name.into(),
            measured,
            bound: Some(bound),
            tolerance,
            verdict: Verdict::from_bool(ok),
        }
    }

    pub fn recorded(name: impl Into<String>, measured: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: None,
            tolerance: 0.0,
            verdict: Verdict::Recorded,
        }
    }

    pub fn skipped(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            bound: None,
            tolerance: 0.0,
            verdict: Verdict::Skipped,
        }
    }
}
