use serde::Serialize;

use crate::error::{Error, Result};

/// Positive constant equilibrium of `A1 + A2 <-> A3 + A4` for given
/// conserved totals `(M13, M23, M24)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadEquilibrium {
    pub masses: [f64; 3],
    pub u: [f64; 4],
}

impl QuadEquilibrium {
    /// Largest relative residual of the four defining equations.
    pub fn residual(&self) -> f64 {
        let [m13, m23, m24] = self.masses;
        let [u1, u2, u3, u4] = self.u;
        let r = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        r(u1 * u2, u3 * u4)
            .max(r(u1 + u3, m13))
            .max(r(u2 + u3, m23))
            .max(r(u2 + u4, m24))
    }
}

/// Closed form: `u3 = M13 M23 / (M13 + M24)`, then the three conservation laws.
pub fn quad_equilibrium(masses: [f64; 3]) -> Result<QuadEquilibrium> {
    let [m13, m23, m24] = masses;
    if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::Domain(format!("mass totals must be positive, got {m}")));
    }
    let u3 = m13 * m23 / (m13 + m24);
    let u1 = m13 - u3;
    let u2 = m23 - u3;
    let u4 = m24 - u2;
    let u = [u1, u2, u3, u4];
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::BoundaryEquilibrium {
            component: i + 1,
            value: *v,
        });
    }
    Ok(QuadEquilibrium { masses, u })
}
