//! Isotropic correlation functions, their spectral densities and
//! uniform positive definiteness constants.

use crate::error::{param, Error, Result};
use crate::point::Point;
use crate::quad;
use crate::special::matern_kernel;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use libm::lgamma as ln_gamma;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Nugget,
    Exponential,
    Matern,
    SquaredExponential,
    Wendland,
}

impl CorrelationKind {
    pub fn name(self) -> &'static str {
        match self {
            CorrelationKind::Nugget => "nugget",
            CorrelationKind::Exponential => "exponential",
            CorrelationKind::Matern => "matern",
            CorrelationKind::SquaredExponential => "squared_exponential",
            CorrelationKind::Wendland => "wendland",
        }
    }
}

fn default_smoothness() -> f64 {
    0.5
}

fn default_dimension() -> u32 {
    2
}

/// An isotropic correlation function `ρ(x, y) = ρ0(‖x − y‖)`.
///
/// `scale` is the decorrelation length in km. `smoothness` is the Matérn `ν`
/// or the Wendland `k`; it is ignored for the other kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub kind: CorrelationKind,
    #[serde(default)]
    pub scale: f64,
    #[serde(default = "default_smoothness")]
    pub smoothness: f64,
    #[serde(default = "default_dimension")]
    pub dimension: u32,
}

impl CorrelationModel {
    pub fn nugget() -> Self {
        Self { kind: CorrelationKind::Nugget, scale: 1.0, smoothness: 0.5, dimension: 2 }
    }

    pub fn exponential(scale: f64) -> Self {
        Self { kind: CorrelationKind::Exponential, scale, smoothness: 0.5, dimension: 2 }
    }

    pub fn matern(scale: f64, nu: f64) -> Self {
        Self { kind: CorrelationKind::Matern, scale, smoothness: nu, dimension: 2 }
    }

    pub fn squared_exponential(scale: f64) -> Self {
        Self { kind: CorrelationKind::SquaredExponential, scale, smoothness: 0.5, dimension: 2 }
    }

    pub fn wendland(scale: f64, k: u32) -> Self {
        Self { kind: CorrelationKind::Wendland, scale, smoothness: k as f64, dimension: 2 }
    }

    pub fn with_dimension(mut self, d: u32) -> Self {
        self.dimension = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(param("dimension", "must be at least 1"));
        }
        if self.kind == CorrelationKind::Nugget {
            return Ok(());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(param("scale", format!("must be positive, got {}", self.scale)));
        }
        match self.kind {
            CorrelationKind::Matern if !(self.smoothness > 0.0 && self.smoothness.is_finite()) => {
                Err(param("smoothness", format!("Matérn ν must be positive, got {}", self.smoothness)))
            }
            CorrelationKind::Wendland
                if self.smoothness < 0.0 || self.smoothness.fract() != 0.0 || self.smoothness > 10.0 =>
            {
                Err(param("smoothness", format!("Wendland k must be an integer in 0..=10, got {}", self.smoothness)))
            }
            _ => Ok(()),
        }
    }

    /// Matérn smoothness for the kinds that belong to the Matérn family.
    fn matern_nu(&self) -> Option<f64> {
        match self.kind {
            CorrelationKind::Exponential => Some(0.5),
            CorrelationKind::Matern => Some(self.smoothness),
            _ => None,
        }
    }

    fn unsupported(&self, op: &'static str) -> Error {
        Error::UnsupportedModel { op, model: self.kind.name() }
    }
}

/// `ρ0(r)`.
pub fn eval_rho(model: &CorrelationModel, r: f64) -> Result<f64> {
    model.validate()?;
    if !(r >= 0.0) {
        return Err(param("r", format!("lag must be non-negative, got {r}")));
    }
    Ok(rho_unchecked(model, r))
}

pub(crate) fn rho_unchecked(model: &CorrelationModel, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let x = r / model.scale;
    match model.kind {
        CorrelationKind::Nugget => 0.0,
        CorrelationKind::Exponential => (-x).exp(),
        CorrelationKind::Matern => matern_kernel(model.smoothness, x),
        CorrelationKind::SquaredExponential => (-0.5 * x * x).exp(),
        CorrelationKind::Wendland => {
            if x >= 1.0 {
                0.0
            } else {
                let p = wendland_poly(model.dimension, model.smoothness as u32);
                poly_eval(&p, x) / p[0]
            }
        }
    }
}

/// The non-increasing function `ρ̃` with `ρ(x, y) ≤ ρ̃(‖x − y‖)`.
///
/// Every model here is isotropic and non-increasing, so this is `ρ0` itself.
pub fn radial_dominator(model: &CorrelationModel, r: f64) -> f64 {
    rho_unchecked(model, r.max(0.0))
}

/// Outcome of [`check_p2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2Check {
    pub holds: bool,
    pub first_violation: Option<f64>,
}

pub const P2_GRID_POINTS: usize = 10_000;
pub const P2_R_MAX: f64 = 1e3;

/// Checks that `r ↦ r ρ̃²(R + √3 R (r − 1))` is non-increasing on `[1, 1000]`.
pub fn check_p2(model: &CorrelationModel, big_r: f64) -> P2Check {
    check_p2_with(model, big_r, P2_GRID_POINTS, P2_R_MAX)
}

/// [`check_p2`] on a geometric grid of `n` points over `[1, r_max]`.
pub fn check_p2_with(model: &CorrelationModel, big_r: f64, n: usize, r_max: f64) -> P2Check {
    let map = |r: f64| {
        let rho = radial_dominator(model, big_r + 3f64.sqrt() * big_r * (r - 1.0));
        r * rho * rho
    };
    let n = n.max(2);
    let ratio = r_max.ln() / (n - 1) as f64;
    let mut prev = map(1.0);
    for i in 1..n {
        let r = (ratio * i as f64).exp();
        let v = map(r);
        if v > prev + 1e-12 {
            return P2Check { holds: false, first_violation: Some(r) };
        }
        prev = v;
    }
    P2Check { holds: true, first_violation: None }
}

/// Spectral density `f(w)` at frequency magnitude `w`, normalized so that
/// `ρ(x) = ∫ e^{i w·x} f(w) dw`.
pub fn spectral_density(model: &CorrelationModel, w: f64) -> Result<f64> {
    Ok(ln_spectral_density(model, w)?.exp())
}

pub fn ln_spectral_density(model: &CorrelationModel, w: f64) -> Result<f64> {
    model.validate()?;
    let d = model.dimension as f64;
    let theta = model.scale;
    if let Some(nu) = model.matern_nu() {
        let ln_c = ln_gamma(nu + d / 2.0) + d * theta.ln() - ln_gamma(nu) - d / 2.0 * PI.ln();
        return Ok(ln_c - (nu + d / 2.0) * (theta * theta * w * w).ln_1p());
    }
    match model.kind {
        CorrelationKind::SquaredExponential => {
            Ok(d * (theta / (2.0 * PI).sqrt()).ln() - 0.5 * theta * theta * w * w)
        }
        _ => Err(model.unsupported("spectral_density")),
    }
}

/// Smallest `H` admitted by the u.p.d. theorem for separation `eps`.
pub fn upd_h_min(d: u32, eps: f64) -> f64 {
    let d = d as f64;
    let g = ln_gamma(d / 2.0 + 1.0).exp();
    24.0 / eps * (PI * g * g / 9.0).powf(1.0 / (d + 1.0))
}

/// Maximizer of `H^d f(2H)` over `H > 0`.
fn upd_h_peak(model: &CorrelationModel) -> Option<f64> {
    let d = model.dimension as f64;
    if let Some(nu) = model.matern_nu() {
        return Some((d / (8.0 * nu)).sqrt() / model.scale);
    }
    match model.kind {
        CorrelationKind::SquaredExponential => Some((d / 4.0).sqrt() / model.scale),
        _ => None,
    }
}

/// The `H` used by [`upd_delta`]: the theorem's lower limit, raised to the
/// maximizer of `H^d f(2H)` when that is larger.
pub fn upd_h(model: &CorrelationModel, eps: f64) -> Result<f64> {
    model.validate()?;
    let peak = upd_h_peak(model).ok_or_else(|| model.unsupported("upd_delta"))?;
    let h_min = if eps.is_infinite() { 0.0 } else { upd_h_min(model.dimension, eps) };
    Ok(h_min.max(peak))
}

/// Lower bound `δ(ε)` on the smallest eigenvalue of the correlation matrix of
/// any point set with pairwise distances at least `eps`.
pub fn upd_delta(model: &CorrelationModel, eps: f64) -> Result<f64> {
    model.validate()?;
    if !(eps > 0.0) {
        return Err(param("eps", format!("separation must be positive, got {eps}")));
    }
    if model.kind == CorrelationKind::Nugget {
        return Ok(1.0);
    }
    Ok(upd_ln_delta(model, eps)?.exp())
}

/// `ln δ(ε)`. Stays finite where `δ` itself underflows (squared exponential
/// at small `ε`).
pub fn upd_ln_delta(model: &CorrelationModel, eps: f64) -> Result<f64> {
    model.validate()?;
    if !(eps > 0.0) {
        return Err(param("eps", format!("separation must be positive, got {eps}")));
    }
    if model.kind == CorrelationKind::Nugget {
        return Ok(0.0);
    }
    let h = upd_h(model, eps)?;
    let d = model.dimension as f64;
    let ln_f0 = ln_spectral_density(model, 2.0 * h)?;
    let ln_c = d / 2.0 * PI.ln() - (d + 1.0) * 2f64.ln() - ln_gamma(d / 2.0 + 1.0);
    Ok(ln_c + d * h.ln() + ln_f0)
}

/// Correlation matrix of `points`.
pub fn corr_matrix(model: &CorrelationModel, points: &[Point]) -> Result<DMatrix<f64>> {
    model.validate()?;
    let n = points.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let r = points[i].dist(points[j]);
            if r == 0.0 {
                return Err(Error::DegenerateConfiguration(format!(
                    "points {j} and {i} coincide at ({}, {})",
                    points[i].x, points[i].y
                )));
            }
            let v = rho_unchecked(model, r);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// `∫_R^∞ s ρ̃²(s) ds`.
pub fn tail_integral(model: &CorrelationModel, big_r: f64) -> Result<f64> {
    model.validate()?;
    let big_r = big_r.max(0.0);
    let theta = model.scale;
    match model.kind {
        CorrelationKind::Nugget => Ok(0.0),
        CorrelationKind::Exponential => {
            Ok((-2.0 * big_r / theta).exp() * (theta * big_r / 2.0 + theta * theta / 4.0))
        }
        CorrelationKind::Wendland => {
            let u0 = big_r / theta;
            if u0 >= 1.0 {
                return Ok(0.0);
            }
            let p = wendland_poly(model.dimension, model.smoothness as u32);
            let norm = p[0];
            let sq = poly_mul(&p, &p);
            let integrand = poly_mul(&[0.0, 1.0], &sq);
            let anti = poly_antiderivative(&integrand);
            Ok(theta * theta * (poly_eval(&anti, 1.0) - poly_eval(&anti, u0)) / (norm * norm))
        }
        CorrelationKind::Matern | CorrelationKind::SquaredExponential => {
            // substitute s = R + θ v so the integrand has unit scale in v
            let r = quad::integrate_to_inf(
                |v| {
                    let s = big_r + theta * v;
                    let rho = rho_unchecked(model, s);
                    theta * s * rho * rho
                },
                0.0,
                1e-13,
                1e-11,
            )?;
            Ok(r.value.max(0.0))
        }
    }
}

// Polynomials are coefficient vectors in increasing degree.

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_antiderivative(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] = c / (i + 1) as f64;
    }
    out
}

/// Unnormalized Wendland function `φ_{d,k}` on `[0, 1]`, built by applying
/// `(Iφ)(r) = ∫_r^1 t φ(t) dt` k times to `(1 − r)^ℓ`, `ℓ = ⌊d/2⌋ + k + 1`.
pub(crate) fn wendland_poly(d: u32, k: u32) -> Vec<f64> {
    let ell = d / 2 + k + 1;
    let mut p = vec![1.0];
    for _ in 0..ell {
        p = poly_mul(&p, &[1.0, -1.0]);
    }
    for _ in 0..k {
        let anti = poly_antiderivative(&poly_mul(&[0.0, 1.0], &p));
        let top = poly_eval(&anti, 1.0);
        p = anti.iter().map(|c| -c).collect();
        p[0] += top;
    }
    p
}
