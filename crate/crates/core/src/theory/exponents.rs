use serde::Serialize;

use crate::error::{Error, Result};

/// Bootstrap exponent `lambda` of the a-priori bound `|U| <= C (1 + |U|^lambda)`
/// and the resulting growth exponent `xi = 1/(1 - lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentAlgebra {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub admissible: bool,
    pub xi: Option<f64>,
}

/// `lambda = (3 + ε)/4 + (1 - δ)/(2(2 - δ))`; admissible iff `lambda < 1`.
pub fn exponent_algebra(epsilon: f64, delta: f64) -> Result<ExponentAlgebra> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let lambda = (3.0 + epsilon) / 4.0 + (1.0 - delta) / (2.0 * (2.0 - delta));
    let admissible = lambda < 1.0;
    Ok(ExponentAlgebra {
        epsilon,
        delta,
        lambda,
        admissible,
        xi: admissible.then(|| 1.0 / (1.0 - lambda)),
    })
}

/// The equivalent threshold form `epsilon < delta / (2 - delta)`.
pub fn threshold_admissible(epsilon: f64, delta: f64) -> bool {
    epsilon < delta / (2.0 - delta)
}
