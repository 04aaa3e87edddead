//! Closed-form side: special functions, the explicit interpolation
//! constants, exponent algebra, the reversible-reaction equilibrium, and
//! growth/decay rate fitting.

mod constants;
mod equilibrium;
mod exponents;
mod fit;
mod special;

pub use constants::{
    free_space_constants, interpolation_bound, interpolation_constants, optimal_k, ConstantsCase,
    InterpolationConstants,
};
pub use equilibrium::{quad_equilibrium, QuadEquilibrium};
pub use exponents::{exponent_algebra, threshold_admissible, ExponentAlgebra};
pub use fit::{fit_rate, fit_rate_window, FitMode, FitResult};
pub use special::{gamma_fn, gaussian_moment, sphere_area};

/// `‖f‖_p <= ‖f‖_∞^{(p-1)/p} ‖f‖_1^{1/p}`.
pub fn lp_interpolation_bound(linf: f64, l1: f64, p: f64) -> f64 {
    linf.powf((p - 1.0) / p) * l1.powf(1.0 / p)
}
