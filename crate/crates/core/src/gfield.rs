//! Gaussian field sampling at configuration points, shadow variables and
//! conditional Gaussian statistics.

use crate::corrfuncs::{corr_matrix, min_eigenvalue, rho_unchecked, CorrelationKind, CorrelationModel};
use crate::error::{ensure_positive, param, Error, Result};
use crate::point::Point;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

/// Dense factorization is refused above this many points.
pub const MAX_DENSE_POINTS: usize = 8000;

/// Diagonal ridges tried, in order, when a plain factorization fails.
pub const RIDGES: [f64; 2] = [1e-10, 1e-8];

pub const DEFAULT_SPECTRAL_FEATURES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    ExactCholesky,
    Spectral,
}

/// Field values and shadow variables at the configuration points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub sigma: f64,
    pub beta: f64,
    /// Diagonal ridge added before factorizing; 0 when none was needed.
    pub ridge: f64,
}

impl FieldSample {
    pub fn new(z: Vec<f64>, sigma: f64, beta: f64, ridge: f64) -> Self {
        let s = shadow(&z, sigma, beta);
        FieldSample { z, s, sigma, beta, ridge }
    }
}

/// `S = exp(σ Z − σ²/β)` elementwise.
pub fn shadow(z: &[f64], sigma: f64, beta: f64) -> Vec<f64> {
    let shift = sigma * sigma / beta;
    z.iter().map(|&v| (sigma * v - shift).exp()).collect()
}

/// Natural-log shadowing scale from a dB standard deviation.
pub fn sigma_from_db(sigma_db: f64) -> f64 {
    sigma_db * std::f64::consts::LN_10 / 10.0
}

/// Cholesky factorization under the ridge policy.
pub fn factorize(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok((c, 0.0));
    }
    for ridge in RIDGES {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += ridge;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok((c, ridge));
        }
    }
    Err(Error::IllConditioned { min_eigenvalue: min_eigenvalue(m) })
}

/// Exact sampler: a lower-triangular factor of the correlation matrix, built
/// once and applied to fresh standard normal vectors.
#[derive(Debug, Clone)]
pub struct CholeskyField {
    factor: DMatrix<f64>,
    ridge: f64,
}

impl CholeskyField {
    pub fn new(model: &CorrelationModel, points: &[Point]) -> Result<Self> {
        if points.len() > MAX_DENSE_POINTS {
            return Err(Error::Infeasible(format!(
                "{} points exceed the dense factorization limit of {MAX_DENSE_POINTS}; reduce the disc radius or use the spectral sampler",
                points.len()
            )));
        }
        let m = corr_matrix(model, points)?;
        let (chol, ridge) = factorize(&m)?;
        Ok(CholeskyField { factor: chol.unpack(), ridge })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn len(&self) -> usize {
        self.factor.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.factor.nrows() == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.nrows();
        let e: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let data = self.factor.as_slice();
        let mut z = vec![0.0; n];
        // column-major: column j holds L[j.., j]
        for j in 0..n {
            let ej = e[j];
            let col = &data[j * n..(j + 1) * n];
            for i in j..n {
                z[i] += col[i] * ej;
            }
        }
        z
    }
}

/// Random Fourier feature sampler
/// `Z(x) = J^{-1/2} Σ_j [A_j cos(ω_j·x) + B_j sin(ω_j·x)]`
/// with `ω_j` drawn from the normalized spectral density and `A_j, B_j` standard normal.
///
/// Each draw has exactly standard normal marginals and, averaged over the
/// frequencies, exactly the target covariance. Joint laws are Gaussian scale
/// mixtures that approach the Gaussian field as `J` grows.
#[derive(Debug, Clone, Copy)]
pub struct SpectralField {
    model: CorrelationModel,
    features: usize,
}

impl SpectralField {
    pub fn new(model: &CorrelationModel, features: usize) -> Result<Self> {
        model.validate()?;
        if features == 0 {
            return Err(param("spectral_features", "must be positive"));
        }
        match model.kind {
            CorrelationKind::Wendland => Err(Error::UnsupportedModel { op: "spectral sampler", model: "wendland" }),
            _ => Ok(SpectralField { model: *model, features }),
        }
    }

    fn frequency<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let scale = match self.model.kind {
            CorrelationKind::SquaredExponential => 1.0 / self.model.scale,
            _ => {
                let nu = if self.model.kind == CorrelationKind::Exponential { 0.5 } else { self.model.smoothness };
                let w: f64 = Gamma::new(nu, 2.0).expect("ν > 0").sample(rng);
                1.0 / (self.model.scale * w.sqrt())
            }
        };
        (g1 * scale, g2 * scale)
    }

    pub fn sample<R: Rng + ?Sized>(&self, points: &[Point], rng: &mut R) -> Vec<f64> {
        if self.model.kind == CorrelationKind::Nugget {
            return points.iter().map(|_| rng.sample(StandardNormal)).collect();
        }
        let j = self.features;
        let mut z = vec![0.0; points.len()];
        for _ in 0..j {
            let (wx, wy) = self.frequency(rng);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            for (zi, p) in z.iter_mut().zip(points) {
                let (s, c) = (wx * p.x + wy * p.y).sin_cos();
                *zi += a * c + b * s;
            }
        }
        let norm = 1.0 / (j as f64).sqrt();
        z.iter_mut().for_each(|v| *v *= norm);
        z
    }
}

/// Draw of the field at `points` by exact factorization.
pub fn sample_field<R: Rng + ?Sized>(model: &CorrelationModel, points: &[Point], rng: &mut R) -> Result<FieldDraw> {
    if model.kind == CorrelationKind::Nugget {
        return Ok(FieldDraw { z: points.iter().map(|_| rng.sample(StandardNormal)).collect(), ridge: 0.0 });
    }
    let f = CholeskyField::new(model, points)?;
    Ok(FieldDraw { z: f.sample(rng), ridge: f.ridge() })
}

/// Field values with the ridge used to factorize.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDraw {
    pub z: Vec<f64>,
    pub ridge: f64,
}

/// Conditional mean and variance of `Z` at `points[i]` given the values
/// `z_cond` at `points[cond_set]`.
pub fn conditional_stats(
    model: &CorrelationModel,
    points: &[Point],
    i: usize,
    cond_set: &[usize],
    z_cond: &[f64],
) -> Result<(f64, f64)> {
    if cond_set.len() != z_cond.len() {
        return Err(Error::LengthMismatch { expected: cond_set.len(), got: z_cond.len() });
    }
    if i >= points.len() || cond_set.iter().any(|&j| j >= points.len()) {
        return Err(param("index", "out of range"));
    }
    if cond_set.contains(&i) {
        return Err(param("cond_set", "must not contain the target index"));
    }
    if cond_set.is_empty() {
        return Ok((0.0, 1.0));
    }
    let (w, chol) = whitened_cross(model, points[i], &cond_set.iter().map(|&j| points[j]).collect::<Vec<_>>())?;
    let zt = chol.l().solve_lower_triangular(&DVector::from_column_slice(z_cond)).ok_or(Error::IllConditioned { min_eigenvalue: 0.0 })?;
    let mu = w.dot(&zt);
    let tau2 = 1.0 - w.norm_squared();
    Ok((mu, tau2))
}

/// `L⁻¹γ` where `LLᵀ = Γ` is the correlation matrix of `cond` and `γ` the
/// correlations between `x0` and `cond`.
pub(crate) fn whitened_cross(
    model: &CorrelationModel,
    x0: Point,
    cond: &[Point],
) -> Result<(DVector<f64>, Cholesky<f64, Dyn>)> {
    let gamma_m = corr_matrix(model, cond)?;
    let (chol, _) = factorize(&gamma_m)?;
    let gamma = DVector::from_iterator(cond.len(), cond.iter().map(|p| rho_unchecked(model, p.dist(x0))));
    let w = chol.l().solve_lower_triangular(&gamma).ok_or(Error::IllConditioned { min_eigenvalue: 0.0 })?;
    Ok((w, chol))
}

pub(crate) fn validate_shadowing(sigma: f64, beta: f64) -> Result<()> {
    ensure_positive("sigma", sigma)?;
    if !(beta > 2.0 && beta.is_finite()) {
        return Err(param("beta", format!("must exceed 2, got {beta}")));
    }
    Ok(())
}
