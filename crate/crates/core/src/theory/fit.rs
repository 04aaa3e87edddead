use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `y = P e^{-mu t}`; reports `mu`.
    #[serde(alias = "exp")]
    Exponential,
    /// `y = P t^xi`; reports `xi`.
    #[serde(alias = "poly")]
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub mode: FitMode,
    /// Decay rate `mu` (exponential) or growth exponent `xi` (polynomial).
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `log y` against `t` (exponential) or `log t`
/// (polynomial).
pub fn fit_rate(series: &[(f64, f64)], mode: FitMode) -> Result<FitResult> {
    if series.len() < 4 {
        return Err(Error::Data(format!(
            "rate fit needs at least 4 samples, got {}",
            series.len()
        )));
    }
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    for &(t, y) in series {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Data(format!("nonpositive sample y = {y} at t = {t}")));
        }
        let x = match mode {
            FitMode::Exponential => t,
            FitMode::Polynomial => {
                if !(t > 0.0) {
                    return Err(Error::Data(format!("polynomial fit needs t > 0, got {t}")));
                }
                t.ln()
            }
        };
        xs.push(x);
        ys.push(y.ln());
    }

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Data(
            "degenerate abscissae: all sample times coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    // Flat data is fitted exactly by slope zero.
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };

    Ok(FitResult {
        mode,
        rate: match mode {
            FitMode::Exponential => -slope,
            FitMode::Polynomial => slope,
        },
        prefactor: intercept.exp(),
        r_squared,
        samples: series.len(),
    })
}

/// [`fit_rate`] restricted to samples with `t_min <= t <= t_max`.
pub fn fit_rate_window(series: &[(f64, f64)], mode: FitMode, t_min: f64, t_max: f64) -> Result<FitResult> {
    let window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= t_min && *t <= t_max)
        .collect();
    fit_rate(&window, mode)
}
