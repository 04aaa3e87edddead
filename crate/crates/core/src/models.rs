//! Reaction systems: the nonlinearity `f`, the diffusion coefficients and the
//! declared structure constants, plus sampling audits of those constants.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs in `[-CLAMP_BAND, 0)` are treated as zero by [`ReactionSystem::eval_into`].
pub const CLAMP_BAND: f64 = 1e-12;

/// Log-uniform sampling range for structure audits.
pub const SAMPLE_RANGE: (f64, f64) = (1e-6, 1e3);

const QUASI_POSITIVITY_TOL: f64 = 1e-12;
const MASS_CONTROL_TOL: f64 = 1e-9;

/// `Σ f_i(u) <= k0 + k1 Σ u_i` on the nonnegative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassControl {
    pub k0: f64,
    pub k1: f64,
}

/// `|f_i(u)| <= k (1 + |u|^{2+epsilon})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub k: f64,
    pub epsilon: f64,
}

/// `coeff * Π_j u_j^{powers[j]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    fn eval(&self, u: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(u)
            .fold(self.coeff, |acc, (&p, &x)| acc * x.powi(p as i32))
    }
}

/// Skew-symmetric Lotka-Volterra data: `f_i = (-tau_i + Σ_j a_ij u_j) u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewLvSpec {
    interaction: Vec<Vec<f64>>,
    tau: Vec<f64>,
}

impl SkewLvSpec {
    /// Rejects non-square matrices and any entry with `a_ij + a_ji != 0`.
    pub fn new(interaction: Vec<Vec<f64>>, tau: Vec<f64>) -> Result<Self> {
        let n = tau.len();
        if n == 0 {
            return Err(Error::Contract(
                "Lotka-Volterra system needs at least one species".into(),
            ));
        }
        if interaction.len() != n || interaction.iter().any(|row| row.len() != n) {
            return Err(Error::Contract(format!(
                "interaction matrix must be {n}x{n} to match tau"
            )));
        }
        for (i, row) in interaction.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                let sum = a + interaction[j][i];
                if sum != 0.0 {
                    return Err(Error::Contract(format!(
                        "interaction matrix is not skew-symmetric: a[{i}][{j}] + a[{j}][{i}] = {sum}"
                    )));
                }
            }
        }
        if let Some(t) = tau.iter().find(|t| !t.is_finite()) {
            return Err(Error::Contract(format!("non-finite tau entry {t}")));
        }
        Ok(Self { interaction, tau })
    }

    pub fn interaction(&self) -> &[Vec<f64>] {
        &self.interaction
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }
}

/// A polynomial nonlinearity with user-declared structure constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    /// One list of monomials per species.
    pub terms: Vec<Vec<Monomial>>,
    pub mass_control: MassControl,
    pub growth: Growth,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// `A1 + A2 <-> A3 + A4` with unit rate constants.
    QuadraticReversible,
    SkewLotkaVolterra(SkewLvSpec),
    Polynomial(PolynomialSpec),
}

pub type ReactionFn = dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync;

/// How `f(u, t)` is evaluated.
#[derive(Clone)]
pub enum Kinetics {
    QuadraticReversible,
    SkewLotkaVolterra(SkewLvSpec),
    Polynomial(Vec<Vec<Monomial>>),
    /// Rescaled and augmented system built by [`crate::transform::augment_system`].
    Augmented(crate::transform::AugmentedKinetics),
    /// Arbitrary closure; used for linear test problems.
    Custom(Arc<ReactionFn>),
}

impl fmt::Debug for Kinetics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kinetics::QuadraticReversible => write!(f, "QuadraticReversible"),
            Kinetics::SkewLotkaVolterra(s) => f.debug_tuple("SkewLotkaVolterra").field(s).finish(),
            Kinetics::Polynomial(t) => f.debug_tuple("Polynomial").field(t).finish(),
            Kinetics::Augmented(a) => f.debug_tuple("Augmented").field(a).finish(),
            Kinetics::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReactionSystem {
    name: String,
    diffusion: Vec<f64>,
    kinetics: Kinetics,
    mass_control: MassControl,
    growth: Growth,
}

fn check_diffusion(d: &[f64], n_species: usize) -> Result<()> {
    if d.len() != n_species {
        return Err(Error::Contract(format!(
            "expected {n_species} diffusion coefficients, got {}",
            d.len()
        )));
    }
    if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Contract(format!(
            "diffusion coefficient d_{} = {v} must be positive",
            i + 1
        )));
    }
    Ok(())
}

/// Build a [`ReactionSystem`] from a model description and diffusion vector.
pub fn instantiate_model(spec: ModelSpec, diffusion: Vec<f64>) -> Result<ReactionSystem> {
    match spec {
        ModelSpec::QuadraticReversible => {
            check_diffusion(&diffusion, 4)?;
            Ok(ReactionSystem {
                name: "quadratic-reversible".into(),
                diffusion,
                kinetics: Kinetics::QuadraticReversible,
                mass_control: MassControl { k0: 0.0, k1: 0.0 },
                // |u3 u4 - u1 u2| <= |u|^2 / 2
                growth: Growth { k: 1.0, epsilon: 0.0 },
            })
        }
        ModelSpec::SkewLotkaVolterra(lv) => {
            check_diffusion(&diffusion, lv.tau.len())?;
            let tau_min = lv.tau.iter().copied().fold(f64::INFINITY, f64::min);
            // |f_i| <= (|a_i| + |tau_i|) (1 + |u|^2)
            let k = lv
                .interaction
                .iter()
                .zip(&lv.tau)
                .map(|(row, t)| row.iter().map(|a| a * a).sum::<f64>().sqrt() + t.abs())
                .fold(0.0_f64, f64::max);
            Ok(ReactionSystem {
                name: "skew-lotka-volterra".into(),
                diffusion,
                kinetics: Kinetics::SkewLotkaVolterra(lv),
                mass_control: MassControl {
                    k0: 0.0,
                    k1: -tau_min,
                },
                growth: Growth {
                    k: if k > 0.0 { k } else { 1.0 },
                    epsilon: 0.0,
                },
            })
        }
        ModelSpec::Polynomial(p) => {
            let n = p.terms.len();
            if n == 0 {
                return Err(Error::Contract(
                    "polynomial model needs at least one species".into(),
                ));
            }
            check_diffusion(&diffusion, n)?;
            for (i, species) in p.terms.iter().enumerate() {
                for m in species {
                    if m.powers.len() != n {
                        return Err(Error::Contract(format!(
                            "monomial for species {} has {} exponents, expected {n}",
                            i + 1,
                            m.powers.len()
                        )));
                    }
                }
            }
            ReactionSystem::custom_checked(
                "polynomial",
                diffusion,
                Kinetics::Polynomial(p.terms),
                p.mass_control,
                p.growth,
            )
        }
    }
}

impl ReactionSystem {
    /// Assemble a system from parts; constants are validated but not audited.
    pub fn new(
        name: impl Into<String>,
        diffusion: Vec<f64>,
        kinetics: Kinetics,
        mass_control: MassControl,
        growth: Growth,
    ) -> Result<Self> {
        let n = diffusion.len();
        if n == 0 {
            return Err(Error::Contract("system needs at least one species".into()));
        }
        check_diffusion(&diffusion, n)?;
        Self::custom_checked(name, diffusion, kinetics, mass_control, growth)
    }

    fn custom_checked(
        name: impl Into<String>,
        diffusion: Vec<f64>,
        kinetics: Kinetics,
        mass_control: MassControl,
        growth: Growth,
    ) -> Result<Self> {
        if !(mass_control.k0 >= 0.0 && mass_control.k0.is_finite()) {
            return Err(Error::Contract(format!("K0 = {} must be >= 0", mass_control.k0)));
        }
        if !mass_control.k1.is_finite() {
            return Err(Error::Contract("K1 must be finite".into()));
        }
        if !(growth.k >= 0.0 && growth.epsilon >= 0.0) {
            return Err(Error::Contract(format!(
                "growth constants must be nonnegative, got K = {}, epsilon = {}",
                growth.k, growth.epsilon
            )));
        }
        Ok(Self {
            name: name.into(),
            diffusion,
            kinetics,
            mass_control,
            growth,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_species(&self) -> usize {
        self.diffusion.len()
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    pub fn kinetics(&self) -> &Kinetics {
        &self.kinetics
    }

    pub fn mass_control(&self) -> MassControl {
        self.mass_control
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn d_max(&self) -> f64 {
        self.diffusion.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn d_min(&self) -> f64 {
        self.diffusion.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The mass source `K0(t)` seen by `Σ f_i` at time `t`: constant for
    /// autonomous systems, `K0 e^{-K1 t}` for augmented ones.
    pub fn k0_at(&self, t: f64) -> f64 {
        match &self.kinetics {
            Kinetics::Augmented(a) => a.k0 * (-a.k1 * t).exp(),
            _ => self.mass_control.k0,
        }
    }

    /// Linear conservation laws as weight vectors `w` with `Σ w_i f_i ≡ 0`.
    ///
    /// An augmented system keeps its base laws (padded with a zero weight)
    /// when `K1 = 0`, and conserves total mass when `K0 = 0` and the base
    /// has no laws of its own.
    pub fn conservation_laws(&self) -> Vec<Vec<f64>> {
        match &self.kinetics {
            Kinetics::QuadraticReversible => vec![
                vec![1.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, 1.0],
            ],
            Kinetics::Augmented(a) => {
                let base = a.base.conservation_laws();
                let mut laws = Vec::new();
                if a.k1 == 0.0 {
                    laws.extend(base.iter().map(|w| {
                        let mut w = w.clone();
                        w.push(0.0);
                        w
                    }));
                }
                if a.k0 == 0.0 && base.is_empty() {
                    laws.push(vec![1.0; self.n_species()]);
                }
                laws
            }
            _ => Vec::new(),
        }
    }

    /// Whether `Σ f_i log u_i <= 0` holds structurally.
    pub fn has_entropy_structure(&self) -> bool {
        matches!(self.kinetics, Kinetics::QuadraticReversible)
    }

    /// `f(u, t)` into `out`, for `u` already in the nonnegative orthant.
    pub(crate) fn eval_raw(&self, u: &[f64], t: f64, out: &mut [f64]) {
        match &self.kinetics {
            Kinetics::QuadraticReversible => {
                let r = -u[0] * u[1] + u[2] * u[3];
                out[0] = r;
                out[1] = r;
                out[2] = -r;
                out[3] = -r;
            }
            Kinetics::SkewLotkaVolterra(lv) => {
                for i in 0..u.len() {
                    let mut rate = -lv.tau[i];
                    for (a, uj) in lv.interaction[i].iter().zip(u) {
                        rate += a * uj;
                    }
                    out[i] = rate * u[i];
                }
            }
            Kinetics::Polynomial(terms) => {
                for (o, species) in out.iter_mut().zip(terms) {
                    *o = species.iter().map(|m| m.eval(u)).sum();
                }
            }
            Kinetics::Augmented(a) => a.eval(u, t, out),
            Kinetics::Custom(f) => f(u, t, out),
        }
    }

    /// Evaluate `f(u, t)` into `out`, clamping inputs in the tolerance band
    /// below zero and rejecting anything more negative.
    pub fn eval_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.n_species();
        if u.len() != n || out.len() != n {
            return Err(Error::Contract(format!(
                "state has {} components, system has {n} species",
                u.len()
            )));
        }
        if let Some((i, v)) = u
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -CLAMP_BAND)
        {
            return Err(Error::Domain(format!(
                "u_{} = {v} lies outside the nonnegative orthant",
                i + 1
            )));
        }
        if u.iter().any(|v| *v < 0.0) {
            let clamped: Vec<f64> = u.iter().map(|v| v.max(0.0)).collect();
            self.eval_raw(&clamped, t, out);
        } else {
            self.eval_raw(u, t, out);
        }
        Ok(())
    }

    /// `f(u)` at time `t`.
    pub fn eval_at(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_species()];
        self.eval_into(u, t, &mut out)?;
        Ok(out)
    }
}

/// `f(u)` at `t = 0`.
pub fn eval_reaction(sys: &ReactionSystem, u: &[f64]) -> Result<Vec<f64>> {
    sys.eval_at(u, 0.0)
}

/// `Σ_i f_i(u) log u_i` for a strictly positive state.
pub fn entropy_dissipation(sys: &ReactionSystem, u: &[f64]) -> Result<f64> {
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "entropy dissipation needs u_{} > 0, got {v}",
            i + 1
        )));
    }
    let f = eval_reaction(sys, u)?;
    Ok(f.iter().zip(u).map(|(fi, ui)| fi * ui.ln()).sum())
}

/// Seeded source of sample points for structure audits.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Log-uniform draw from `[lo, hi]`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let (a, b) = (lo.ln(), hi.ln());
        (a + (b - a) * self.rng.gen::<f64>()).exp()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    /// A point of the positive orthant with log-uniform coordinates.
    pub fn point(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| self.log_uniform(SAMPLE_RANGE.0, SAMPLE_RANGE.1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiPositivityVerdict {
    pub passed: bool,
    /// Smallest `f_i` seen on a face `u_i = 0`.
    pub worst_value: f64,
    /// `(species index, point)` of the first violation.
    pub witness: Option<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassControlVerdict {
    pub passed: bool,
    /// Smallest `K0 + K1 Σu + tol - Σf` seen; negative means violated.
    pub worst_margin: f64,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthVerdict {
    pub passed: bool,
    /// Largest `|f_i| / (K (1 + |u|^{2+eps}))` seen.
    pub worst_ratio: f64,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureVerdict {
    pub quasi_positive: QuasiPositivityVerdict,
    pub mass_control: MassControlVerdict,
    pub growth: GrowthVerdict,
    pub samples_used: usize,
}

impl StructureVerdict {
    pub fn all_passed(&self) -> bool {
        self.quasi_positive.passed && self.mass_control.passed && self.growth.passed
    }
}

fn euclid(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Audit quasi-positivity, mass control and growth of `sys` at
/// `n_samples` random points (evaluated at `t = 0`).
pub fn check_structure(
    sys: &ReactionSystem,
    sampler: &mut Sampler,
    n_samples: usize,
) -> Result<StructureVerdict> {
    if n_samples == 0 {
        return Err(Error::Contract("check_structure needs n_samples >= 1".into()));
    }
    let n = sys.n_species();
    let MassControl { k0, k1 } = sys.mass_control();
    let Growth { k, epsilon } = sys.growth();
    let mut f = vec![0.0; n];

    let mut qp = QuasiPositivityVerdict {
        passed: true,
        worst_value: f64::INFINITY,
        witness: None,
    };
    let mut mc = MassControlVerdict {
        passed: true,
        worst_margin: f64::INFINITY,
        witness: None,
    };
    let mut gr = GrowthVerdict {
        passed: true,
        worst_ratio: 0.0,
        witness: None,
    };

    for _ in 0..n_samples {
        let u = sampler.point(n);

        sys.eval_into(&u, 0.0, &mut f)?;
        let sum_u: f64 = u.iter().sum();
        let sum_f: f64 = f.iter().sum();
        let margin = k0 + k1 * sum_u + MASS_CONTROL_TOL * (1.0 + sum_u) - sum_f;
        if margin < mc.worst_margin {
            mc.worst_margin = margin;
        }
        if margin < 0.0 && mc.passed {
            mc.passed = false;
            mc.witness = Some(u.clone());
        }

        let envelope = k * (1.0 + euclid(&u).powf(2.0 + epsilon));
        for fi in &f {
            let ratio = fi.abs() / envelope;
            if ratio > gr.worst_ratio || ratio.is_nan() {
                gr.worst_ratio = ratio;
            }
            if !(ratio <= 1.0) && gr.passed {
                gr.passed = false;
                gr.witness = Some(u.clone());
            }
        }

        for i in 0..n {
            let mut face = u.clone();
            face[i] = 0.0;
            sys.eval_into(&face, 0.0, &mut f)?;
            qp.worst_value = qp.worst_value.min(f[i]);
            if f[i] < -QUASI_POSITIVITY_TOL && qp.passed {
                qp.passed = false;
                qp.witness = Some((i, face));
            }
        }
    }

    Ok(StructureVerdict {
        quasi_positive: qp,
        mass_control: mc,
        growth: gr,
        samples_used: n_samples,
    })
}
