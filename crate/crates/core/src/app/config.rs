use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue};
use crate::grid::{Field, Grid1D};
use crate::models::{
    instantiate_model, Growth, MassControl, ModelSpec, Monomial, PolynomialSpec, ReactionSystem, SkewLvSpec,
};
use crate::solver::{SolverConfig, SystemState};
use crate::theory::FitMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    QuadraticReversible {
        diffusion: Vec<f64>,
    },
    SkewLotkaVolterra {
        diffusion: Vec<f64>,
        interaction: Vec<Vec<f64>>,
        tau: Vec<f64>,
    },
    Polynomial {
        diffusion: Vec<f64>,
        terms: Vec<Vec<Monomial>>,
        k0: f64,
        k1: f64,
        k: f64,
        epsilon: f64,
    },
}

impl ModelConfig {
    pub fn diffusion(&self) -> &[f64] {
        match self {
            ModelConfig::QuadraticReversible { diffusion }
            | ModelConfig::SkewLotkaVolterra { diffusion, .. }
            | ModelConfig::Polynomial { diffusion, .. } => diffusion,
        }
    }

    fn n_species(&self) -> usize {
        match self {
            ModelConfig::QuadraticReversible { .. } => 4,
            ModelConfig::SkewLotkaVolterra { tau, .. } => tau.len(),
            ModelConfig::Polynomial { terms, .. } => terms.len(),
        }
    }

    pub fn build(&self) -> Result<ReactionSystem> {
        let spec = match self.clone() {
            ModelConfig::QuadraticReversible { .. } => ModelSpec::QuadraticReversible,
            ModelConfig::SkewLotkaVolterra { interaction, tau, .. } => {
                ModelSpec::SkewLotkaVolterra(SkewLvSpec::new(interaction, tau)?)
            }
            ModelConfig::Polynomial {
                terms,
                k0,
                k1,
                k,
                epsilon,
                ..
            } => ModelSpec::Polynomial(PolynomialSpec {
                terms,
                mass_control: MassControl { k0, k1 },
                growth: Growth { k, epsilon },
            }),
        };
        instantiate_model(spec, self.diffusion().to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    1.0
}

/// Initial data for one species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    Constant {
        value: f64,
    },
    /// `base + amplitude exp(-((x - center)/width)^2)`.
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        base: f64,
    },
    /// `values[k]` on the `k`-th interval cut by the increasing `breaks`.
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
}

impl InitialConfig {
    pub fn field(&self, grid: Grid1D, scale: f64) -> Result<Field> {
        match self {
            InitialConfig::Constant { value } => Ok(Field::constant(grid, scale * value)),
            InitialConfig::Gaussian {
                center,
                width,
                amplitude,
                base,
            } => Field::from_fn(grid, |x| {
                scale * (base + amplitude * (-((x - center) / width).powi(2)).exp())
            }),
            InitialConfig::Piecewise { breaks, values } => Field::from_fn(grid, |x| {
                let k = breaks.iter().take_while(|b| **b <= x).count();
                scale * values[k]
            }),
        }
    }

    fn validate(&self, path: &str, length: f64, issues: &mut Vec<ValidationIssue>) {
        let mut push = |field: &str, message: String| {
            issues.push(ValidationIssue {
                path: format!("{path}.{field}"),
                message,
            })
        };
        match self {
            InitialConfig::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    push(
                        "value",
                        format!("initial constant must be finite and >= 0, got {value}"),
                    );
                }
            }
            InitialConfig::Gaussian {
                center,
                width,
                amplitude,
                base,
            } => {
                if !center.is_finite() {
                    push("center", format!("must be finite, got {center}"));
                }
                if !(width.is_finite() && *width > 0.0) {
                    push("width", format!("must be positive, got {width}"));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    push("amplitude", format!("must be finite and >= 0, got {amplitude}"));
                }
                if !(base.is_finite() && *base >= 0.0) {
                    push("base", format!("must be finite and >= 0, got {base}"));
                }
            }
            InitialConfig::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    push(
                        "values",
                        format!(
                            "expected {} values for {} breaks, got {}",
                            breaks.len() + 1,
                            breaks.len(),
                            values.len()
                        ),
                    );
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1]))
                    || breaks.iter().any(|b| !(*b > 0.0 && *b < length))
                {
                    push(
                        "breaks",
                        format!("breaks must increase strictly inside (0, {length})"),
                    );
                }
                for (k, v) in values.iter().enumerate() {
                    if !(v.is_finite() && *v >= 0.0) {
                        issues.push(ValidationIssue {
                            path: format!("{path}.values[{k}]"),
                            message: format!("initial value must be finite and >= 0, got {v}"),
                        });
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_one")]
    pub record_every: usize,
    #[serde(default = "default_floor")]
    pub positivity_floor: f64,
    #[serde(default = "default_halvings")]
    pub max_step_halvings: u32,
}

fn default_one() -> usize {
    1
}

fn default_floor() -> f64 {
    SolverConfig::DEFAULT_FLOOR
}

fn default_halvings() -> u32 {
    SolverConfig::DEFAULT_MAX_HALVINGS
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            positivity_floor: self.positivity_floor,
            max_step_halvings: self.max_step_halvings,
            record_every: self.record_every,
        }
    }
}

/// Which series a rate fit is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitQuantity {
    /// `Σ_i ∫ u_i`.
    TotalMass,
    /// `max_i sup |u_i|`.
    SupNorm,
    /// `max_i sup |u_i - u_∞,i|`; reversible reaction only.
    EquilibriumDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub quantity: FitQuantity,
    pub mode: FitMode,
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Auxiliary diffusion; defaults to twice the largest `d_i`.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_true")]
    pub z_bound: bool,
    #[serde(default = "default_true")]
    pub b_range: bool,
    #[serde(default = "default_true")]
    pub u_hat: bool,
    #[serde(default = "default_true")]
    pub identities: bool,
    #[serde(default = "default_true")]
    pub conservation: bool,
    #[serde(default = "default_true")]
    pub structure: bool,
    #[serde(default = "default_samples")]
    pub structure_samples: usize,
    /// Repeat the run at `(dt/2, h/2)` and check the residual ratios.
    #[serde(default)]
    pub refinement: bool,
    /// Amplitude family for the gradient interpolation scaling check.
    #[serde(default)]
    pub scaling_amplitudes: Option<Vec<f64>>,
    #[serde(default = "default_scaling_gamma")]
    pub scaling_gamma: f64,
    /// Overrides the model's default rate fits.
    #[serde(default)]
    pub fits: Option<Vec<FitConfig>>,
}

fn default_true() -> bool {
    true
}

fn default_gammas() -> Vec<f64> {
    vec![0.25, 0.5]
}

fn default_samples() -> usize {
    1000
}

fn default_scaling_gamma() -> f64 {
    0.5
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all diagnostics fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub report: PathBuf,
}

/// Deliberate defects used to confirm that checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    /// Added to `z` after initialisation.
    #[serde(default)]
    pub z_offset: f64,
    /// Added to the extra species' reaction in the augmented system.
    #[serde(default)]
    pub augmentation_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    /// One entry per species of the base model.
    pub initial: Vec<InitialConfig>,
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    /// Simulate the rescaled, augmented system instead of the base one.
    #[serde(default)]
    pub augment: bool,
    #[serde(default)]
    pub faults: FaultConfig,
}

fn issue(path: &str, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue {
        path: path.into(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every constraint violation, each with its field path.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let n = self.model.n_species();
        let d = self.model.diffusion();
        if d.len() != n {
            issues.push(issue(
                "model.diffusion",
                format!("expected {n} coefficients, got {}", d.len()),
            ));
        }
        for (i, di) in d.iter().enumerate() {
            if !(di.is_finite() && *di > 0.0) {
                issues.push(issue(
                    &format!("model.diffusion[{i}]"),
                    format!("must be positive, got {di}"),
                ));
            }
        }
        if let Err(e) = self.model.build() {
            if d.len() == n {
                issues.push(issue("model", e.to_string()));
            }
        }

        if self.grid.n_cells < 2 {
            issues.push(issue(
                "grid.n_cells",
                format!("need at least 2 cells, got {}", self.grid.n_cells),
            ));
        }
        if !(self.grid.length.is_finite() && self.grid.length > 0.0) {
            issues.push(issue(
                "grid.length",
                format!("must be positive, got {}", self.grid.length),
            ));
        }

        if self.initial.len() != n {
            issues.push(issue(
                "initial",
                format!("expected one entry per species ({n}), got {}", self.initial.len()),
            ));
        }
        for (i, init) in self.initial.iter().enumerate() {
            init.validate(&format!("initial[{i}]"), self.grid.length, &mut issues);
        }

        let s = &self.solver;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            issues.push(issue("solver.dt", format!("must be positive, got {}", s.dt)));
        }
        if !(s.t_end.is_finite() && s.t_end > 0.0) {
            issues.push(issue(
                "solver.t_end",
                format!("must be positive, got {}", s.t_end),
            ));
        } else if s.dt > s.t_end {
            issues.push(issue(
                "solver.dt",
                format!("dt = {} exceeds t_end = {}", s.dt, s.t_end),
            ));
        }
        if s.record_every == 0 {
            issues.push(issue("solver.record_every", "must be >= 1"));
        }
        if !(s.positivity_floor <= 0.0) {
            issues.push(issue(
                "solver.positivity_floor",
                format!("must be <= 0, got {}", s.positivity_floor),
            ));
        }

        let diag = &self.diagnostics;
        if diag.enabled {
            let d_max = self.simulated_d_max();
            if let Some(aux_d) = diag.d {
                if !(aux_d.is_finite() && aux_d > d_max) {
                    issues.push(issue(
                        "diagnostics.d",
                        format!("auxiliary diffusion must exceed max d_i = {d_max}, got {aux_d}"),
                    ));
                }
            }
            for (k, g) in diag.gammas.iter().enumerate() {
                if !(0.0..1.0).contains(g) {
                    issues.push(issue(
                        &format!("diagnostics.gammas[{k}]"),
                        format!("must lie in [0, 1), got {g}"),
                    ));
                }
            }
            if !(0.0..1.0).contains(&diag.scaling_gamma) {
                issues.push(issue(
                    "diagnostics.scaling_gamma",
                    format!("must lie in [0, 1), got {}", diag.scaling_gamma),
                ));
            }
            if let Some(amps) = &diag.scaling_amplitudes {
                if amps.len() < 3 {
                    issues.push(issue(
                        "diagnostics.scaling_amplitudes",
                        format!("need at least 3 amplitudes, got {}", amps.len()),
                    ));
                }
                if amps.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    issues.push(issue(
                        "diagnostics.scaling_amplitudes",
                        "amplitudes must be finite and >= 0",
                    ));
                }
            }
            if diag.structure && diag.structure_samples == 0 {
                issues.push(issue("diagnostics.structure_samples", "must be >= 1"));
            }
            if let Some(fits) = &diag.fits {
                for (k, f) in fits.iter().enumerate() {
                    if !(f.t_min < f.t_max) {
                        issues.push(issue(
                            &format!("diagnostics.fits[{k}]"),
                            "t_min must be below t_max",
                        ));
                    }
                    if f.quantity == FitQuantity::EquilibriumDistance
                        && !matches!(self.model, ModelConfig::QuadraticReversible { .. })
                    {
                        issues.push(issue(
                            &format!("diagnostics.fits[{k}].quantity"),
                            "equilibrium_distance needs the quadratic-reversible model",
                        ));
                    }
                }
            }
        }

        if self.output.csv == self.output.report {
            issues.push(issue(
                "output.report",
                "report path must differ from the CSV path",
            ));
        }
        if !self.faults.z_offset.is_finite() {
            issues.push(issue("faults.z_offset", "must be finite"));
        }
        if !self.faults.augmentation_offset.is_finite() {
            issues.push(issue("faults.augmentation_offset", "must be finite"));
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(issues))
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.n_cells, self.grid.length)
    }

    /// Base-model initial state with every species multiplied by `scale`.
    pub fn initial_state(&self, grid: Grid1D, scale: f64) -> Result<SystemState> {
        let fields = self
            .initial
            .iter()
            .map(|c| c.field(grid, scale))
            .collect::<Result<Vec<_>>>()?;
        SystemState::nonnegative(0.0, fields)
    }

    /// Largest diffusion of the simulated system; the augmented species
    /// diffuses with coefficient 1.
    pub fn simulated_d_max(&self) -> f64 {
        let d_max = self
            .model
            .diffusion()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.augment {
            d_max.max(1.0)
        } else {
            d_max
        }
    }

    /// Auxiliary diffusion: configured value or twice the largest `d_i`.
    pub fn aux_d(&self) -> f64 {
        self.diagnostics.d.unwrap_or(2.0 * self.simulated_d_max())
    }
}

/// Read and validate a JSON run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": { "name": "quadratic-reversible", "diffusion": [0.1, 0.2, 0.3, 0.4] },
        "grid": { "n_cells": 16 },
        "initial": [
            { "kind": "constant", "value": 1.0 },
            { "kind": "constant", "value": 1.0 },
            { "kind": "constant", "value": 1.0 },
            { "kind": "constant", "value": 1.0 }
        ],
        "solver": { "dt": 0.01, "t_end": 0.1 },
        "output": { "csv": "a.csv", "report": "a.json" }
    }"#;

    fn issue_paths(text: &str) -> Vec<String> {
        match RunConfig::from_json(text) {
            Err(Error::ConfigInvalid(issues)) => issues.into_iter().map(|i| i.path).collect(),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.grid.length, 1.0);
        assert_eq!(cfg.solver.record_every, 1);
        assert!(cfg.diagnostics.enabled && cfg.diagnostics.z_bound);
        assert_eq!(cfg.diagnostics.gammas, vec![0.25, 0.5]);
        assert_eq!(cfg.seed, 0);
        assert!(!cfg.augment);
        assert_eq!(cfg.faults, FaultConfig::default());
        assert!((cfg.aux_d() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn aux_d_equal_to_max_di_is_rejected() {
        let text = MINIMAL.replace(r#""grid""#, r#""diagnostics": { "d": 0.4 }, "grid""#);
        assert_eq!(issue_paths(&text), vec!["diagnostics.d"]);
    }

    #[test]
    fn negative_initial_constant_names_the_species() {
        let text = MINIMAL.replacen(
            r#""value": 1.0 },
            { "kind": "constant", "value": 1.0 },
            { "kind": "constant", "value": 1.0 }
        ]"#,
            r#""value": 1.0 },
            { "kind": "constant", "value": -1.0 },
            { "kind": "constant", "value": 1.0 }
        ]"#,
            1,
        );
        let paths = issue_paths(&text);
        assert_eq!(paths.len(), 1);
        assert!(paths[0].starts_with("initial[2]"), "{paths:?}");
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        let text = MINIMAL.replace(r#""grid": {"#, r#""gird": {}, "grid": {"#);
        assert!(matches!(RunConfig::from_json(&text), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn issues_are_collected_not_short_circuited() {
        let text = MINIMAL
            .replace(r#""n_cells": 16"#, r#""n_cells": 1"#)
            .replace(r#""dt": 0.01"#, r#""dt": -1.0"#);
        let paths = issue_paths(&text);
        assert!(paths.contains(&"grid.n_cells".to_string()), "{paths:?}");
        assert!(paths.contains(&"solver.dt".to_string()), "{paths:?}");
    }
}
