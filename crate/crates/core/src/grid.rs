//! Uniform cell-centred grid on `[0, length]` with homogeneous Neumann
//! boundaries, and the field metrics used by the checks.

use crate::error::{Error, Result};

/// Above this many cells the Hölder modulus is estimated on a uniform
/// subsample of this size.
pub const HOLDER_EXHAUSTIVE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::Contract(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Contract(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n_cells, length })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Centre of cell `j` (zero-based): `(j + 1/2) h`.
    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// The same interval split into `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n_cells * factor, self.length)
    }
}

/// Values of one scalar unknown, one per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::Contract(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Contract(format!(
                "non-finite field value {} at cell {j}",
                values[j]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_cells()],
        }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().into_iter().map(f).collect())
    }

    pub(crate) fn from_raw(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^p` norm `(Σ |f_j|^p h)^{1/p}` for `p >= 1`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let h = self.grid.spacing();
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p) * h).sum();
        Ok(s.powf(1.0 / p))
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Contract(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn scaled(&self, scale: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| v * scale).collect())
    }

    /// Largest pointwise absolute difference.
    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Finite-volume Neumann Laplacian: face fluxes `(f_{j+1} - f_j)/h`
/// in the interior and zero flux on both boundary faces.
pub fn apply_laplacian(f: &Field) -> Field {
    let h = f.grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let v = &f.values;
    let n = v.len();
    let mut out = vec![0.0; n];
    for j in 0..n {
        let right = if j + 1 < n { v[j + 1] - v[j] } else { 0.0 };
        let left = if j > 0 { v[j] - v[j - 1] } else { 0.0 };
        out[j] = (right - left) * inv_h2;
    }
    Field::from_raw(f.grid, out)
}

/// Laplacian of `f` checked against the grid the caller expects.
pub fn apply_laplacian_on(grid: &Grid1D, f: &Field) -> Result<Field> {
    if f.grid() != grid {
        return Err(Error::Contract(format!(
            "field lives on {:?}, expected {:?}",
            f.grid(),
            grid
        )));
    }
    Ok(apply_laplacian(f))
}

/// Midpoint-rule integral `h Σ_j f_j`, summed left to right.
pub fn integrate(f: &Field) -> f64 {
    let mut acc = 0.0;
    for v in &f.values {
        acc += v;
    }
    acc * f.grid.spacing()
}

/// Largest one-sided difference quotient over interior faces.
pub fn grad_sup(f: &Field) -> f64 {
    let h = f.grid.spacing();
    f.values
        .windows(2)
        .fold(0.0_f64, |m, w| m.max((w[1] - w[0]).abs() / h))
}

/// Discrete Hölder modulus `max_{j != k} |f_j - f_k| / |x_j - x_k|^gamma`.
///
/// Exhaustive up to [`HOLDER_EXHAUSTIVE_LIMIT`] cells; larger fields are
/// subsampled uniformly to that many cells.
pub fn holder_modulus(f: &Field, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "Hölder exponent must lie in [0, 1), got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(f.max() - f.min());
    }
    Ok(pairwise_modulus(f, gamma))
}

fn sample_indices(n: usize) -> Vec<usize> {
    if n <= HOLDER_EXHAUSTIVE_LIMIT {
        return (0..n).collect();
    }
    let m = HOLDER_EXHAUSTIVE_LIMIT;
    (0..m).map(|k| k * (n - 1) / (m - 1)).collect()
}

fn pairwise_modulus(f: &Field, exponent: f64) -> f64 {
    let idx = sample_indices(f.len());
    let x: Vec<f64> = idx.iter().map(|&j| f.grid.center(j)).collect();
    let v: Vec<f64> = idx.iter().map(|&j| f.values[j]).collect();
    let mut best = 0.0_f64;
    for a in 0..v.len() {
        for b in (a + 1)..v.len() {
            let dv = (v[a] - v[b]).abs();
            if dv == 0.0 {
                continue;
            }
            best = best.max(dv / (x[b] - x[a]).powf(exponent));
        }
    }
    best
}

/// Pairwise Lipschitz quotient (exponent one); compares with [`grad_sup`].
pub fn lipschitz_modulus(f: &Field) -> f64 {
    pairwise_modulus(f, 1.0)
}
