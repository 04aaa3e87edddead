use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{grad_sup, Field, Grid1D};
use crate::solver::implicit_diffusion_solve;
use crate::theory::free_space_constants;

const BOUND_TOL: f64 = 1e-6;

/// `∂_t u - d u_xx = φ(x)`, `u(0) = 0`, with the compactly supported
/// forcing `φ(x) = F (1 - ((x - c)/w)^2)_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcedHeatConfig {
    pub n_cells: usize,
    pub length: f64,
    pub d: f64,
    pub dt: f64,
    pub t_end: f64,
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
}

impl ForcedHeatConfig {
    /// A bump of half-width 1 in the middle of `[0, 20]`.
    pub fn centered(amplitude: f64, d: f64) -> Self {
        Self {
            n_cells: 400,
            length: 20.0,
            d,
            dt: 1e-2,
            t_end: 2.0,
            amplitude,
            center: 10.0,
            half_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcedHeatProbe {
    /// `sup |φ|` on the grid.
    pub f_sup: f64,
    /// `sup |u|` over the run.
    pub u_sup: f64,
    /// Space-time oscillation `max u - min u` over the run.
    pub oscillation: f64,
    pub grad_sup: f64,
    pub b: f64,
    /// `B (2 sup|u|)^{1/2} F^{1/2}`.
    pub bound: f64,
    pub passed: bool,
}

/// Run the forced heat equation and compare `sup |∇u|` with the free-space
/// interpolation bound at exponent 0.
pub fn forced_heat_probe(cfg: &ForcedHeatConfig) -> Result<ForcedHeatProbe> {
    if !(cfg.d > 0.0 && cfg.dt > 0.0 && cfg.t_end > 0.0 && cfg.half_width > 0.0) {
        return Err(Error::Contract(format!(
            "invalid forced heat configuration {cfg:?}"
        )));
    }
    let grid = Grid1D::new(cfg.n_cells, cfg.length)?;
    let phi = Field::from_fn(grid, |x| {
        let r = (x - cfg.center) / cfg.half_width;
        cfg.amplitude * (1.0 - r * r).max(0.0)
    })?;
    let mut u = Field::zeros(grid);
    let (mut u_max, mut u_min, mut grad) = (0.0_f64, 0.0_f64, 0.0_f64);
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    for _ in 0..steps {
        let rhs = u.axpy(cfg.dt, &phi)?;
        u = implicit_diffusion_solve(&rhs, cfg.dt * cfg.d)?;
        u_max = u_max.max(u.max());
        u_min = u_min.min(u.min());
        grad = grad.max(grad_sup(&u));
    }
    let f_sup = phi.sup_norm();
    let u_sup = u_max.max(-u_min);
    let b = free_space_constants(1, cfg.d, 0.0)?.b;
    let bound = b * (2.0 * u_sup).sqrt() * f_sup.sqrt();
    Ok(ForcedHeatProbe {
        f_sup,
        u_sup,
        oscillation: u_max - u_min,
        grad_sup: grad,
        b,
        bound,
        passed: grad <= bound + BOUND_TOL,
    })
}
