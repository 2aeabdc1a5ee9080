//! The inverse signal strength process `Y_i = g(x_i)/S_i` and its mean measure.

use crate::error::{ensure_positive, param, Error, Result};
use crate::gfield::{validate_shadowing, FieldSample};
use crate::point::Point;
use crate::quad;
use crate::special::{log_q, q};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Path loss `g(x) = (K‖x‖)^β`, shadowing scale `σ` and transmitter intensity `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    /// Path-loss constant, km⁻¹.
    pub k: f64,
    pub beta: f64,
    pub sigma: f64,
    /// Transmitter intensity, km⁻².
    pub kappa: f64,
}

impl PropagationParams {
    pub fn new(k: f64, beta: f64, sigma: f64, kappa: f64) -> Result<Self> {
        let p = PropagationParams { k, beta, sigma, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("K", self.k)?;
        ensure_positive("kappa", self.kappa)?;
        validate_shadowing(self.sigma, self.beta)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// `b` as an affine function of `u = ln r`: returns `(slope, intercept)`.
    fn b_affine(&self, t: f64) -> (f64, f64) {
        let a = self.beta / self.sigma;
        (a, (self.beta * self.k.ln() - t.ln()) / self.sigma + self.sigma / self.beta)
    }

    /// Radius at which `g = t`.
    pub fn reach(&self, t: f64) -> f64 {
        t.powf(1.0 / self.beta) / self.k
    }
}

pub fn pathloss(params: &PropagationParams, x: Point) -> Result<f64> {
    h_of(params, x.norm())
}

pub fn h_of(params: &PropagationParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(param("x", "path loss is undefined at the origin"));
    }
    Ok((params.k * r).powf(params.beta))
}

/// `b = (1/σ) ln(g/t) + σ/β`.
pub fn b_of(params: &PropagationParams, g_val: f64, t: f64) -> f64 {
    (g_val / t).ln() / params.sigma + params.sigma / params.beta
}

/// `b` at distance `r`, computed without forming `g`.
pub fn b_at_radius(params: &PropagationParams, r: f64, t: f64) -> f64 {
    (params.beta * (params.k * r).ln() - t.ln()) / params.sigma + params.sigma / params.beta
}

/// `P(g(x)/S_x ≤ t) = Q(b_x)`.
pub fn marginal_prob(params: &PropagationParams, x: Point, t: f64) -> Result<f64> {
    if x.norm() == 0.0 {
        return Err(param("x", "the origin is excluded"));
    }
    Ok(q(b_at_radius(params, x.norm(), t)))
}

/// `M(t) = Σ_i Q(b_{x_i})`.
pub fn mean_measure_det(params: &PropagationParams, points: &[Point], t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    points.iter().map(|p| q(b_at_radius(params, p.norm(), t))).sum()
}

/// `L(t) = κπ t^{2/β} / K²`.
pub fn mean_measure_limit(params: &PropagationParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    params.kappa * PI * t.powf(2.0 / params.beta) / (params.k * params.k)
}

/// `κ 2π ∫_0^C Q(b(r)) r dr`, the mean measure of a Poisson placement on the disc.
pub fn mean_measure_poisson_disc(params: &PropagationParams, c: f64, t: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(param("C", format!("must be non-negative, got {c}")));
    }
    if t <= 0.0 || c == 0.0 {
        return Ok(0.0);
    }
    Ok(params.kappa * 2.0 * PI * radial_q_integral(params, t, 0.0, c, 1)?)
}

/// `∫_{r_lo}^{r_hi} Q(b(r))^p r dr`.
///
/// Works in `u = ln r`, where `b` is affine. Below the point where `b < −9`
/// the tail factor is 1 to double precision and that part is integrated in
/// closed form; above the Gaussian peak the window is cut once the integrand
/// has dropped by `e^{-98}`.
pub fn radial_q_integral(params: &PropagationParams, t: f64, r_lo: f64, r_hi: f64, p: u32) -> Result<f64> {
    if !(r_hi > r_lo) || t <= 0.0 {
        return Ok(0.0);
    }
    let pf = p as f64;
    let (a, c0) = params.b_affine(t);
    let u_lo = if r_lo > 0.0 { r_lo.ln() } else { f64::NEG_INFINITY };
    let u_hi = r_hi.ln();
    let u_flat = (-9.0 - c0) / a;
    let mut total = 0.0;
    if u_lo < u_flat {
        let top = u_flat.min(u_hi);
        let low = if u_lo.is_finite() { (2.0 * u_lo).exp() } else { 0.0 };
        total += 0.5 * ((2.0 * top).exp() - low);
    }
    let b_peak = (2.0 / (pf * a)).max(1.0);
    let u_end = (b_peak + 14.0 - c0) / a;
    let start = u_lo.max(u_flat);
    let end = u_hi.min(u_end);
    if end > start {
        let r0 = params.reach(t);
        let abs_tol = 1e-14 * r0 * r0;
        let res = quad::integrate(|u| (pf * log_q(a * u + c0) + 2.0 * u).exp(), start, end, abs_tol, 1e-11)?;
        total += res.value;
    }
    Ok(total)
}

/// Realized inverse signal strengths and counts `N(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    /// Values `≤ max threshold`, ascending.
    pub y: Vec<f64>,
    /// `(t, N(t))` in the order the thresholds were given.
    pub counts: Vec<(f64, usize)>,
}

impl SpectrumSample {
    pub fn count_at(&self, t: f64) -> usize {
        self.y.partition_point(|&v| v <= t)
    }
}

/// Builds `Y_i = g(x_i)/S_i` and counts them at each threshold.
pub fn realize_spectrum(
    params: &PropagationParams,
    points: &[Point],
    field: &FieldSample,
    thresholds: &[f64],
) -> Result<SpectrumSample> {
    if field.s.len() != points.len() {
        return Err(Error::LengthMismatch { expected: points.len(), got: field.s.len() });
    }
    let tmax = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut y: Vec<f64> = Vec::new();
    for (p, &s) in points.iter().zip(&field.s) {
        let v = pathloss(params, *p)? / s;
        if v <= tmax {
            y.push(v);
        }
    }
    y.sort_by(f64::total_cmp);
    let counts = thresholds.iter().map(|&t| (t, y.partition_point(|&v| v <= t))).collect();
    Ok(SpectrumSample { y, counts })
}

/// Counts `N(t)` at `thresholds` directly from log path losses and field values,
/// using `g/S ≤ t ⇔ ln g − σz + σ²/β ≤ ln t`.
pub fn counts_from_field(log_g: &[f64], z: &[f64], sigma: f64, beta: f64, thresholds: &[f64], out: &mut Vec<usize>) {
    let shift = sigma * sigma / beta;
    let mut ly: Vec<f64> = log_g.iter().zip(z).map(|(lg, zi)| lg - sigma * zi + shift).collect();
    ly.sort_by(f64::total_cmp);
    out.clear();
    out.extend(thresholds.iter().map(|t| ly.partition_point(|&v| v <= t.ln())));
}

/// Two-sided bounds on the Mills ratio `∫_r^∞ e^{−u²/2} du / e^{−r²/2}`.
pub fn mills_bounds(r: f64) -> Result<(f64, f64)> {
    ensure_positive("r", r)?;
    let lower = (1.0 / (r + 1.0)).max(r / (r * r + 1.0));
    let upper = (PI / 2.0).sqrt().min(1.0 / r);
    Ok((lower, upper))
}

/// The Mills ratio itself, `Q(r)√(2π) e^{r²/2}`.
pub fn mills_ratio(r: f64) -> f64 {
    (log_q(r) + 0.5 * (2.0 * PI).ln() + 0.5 * r * r).exp()
}

/// For `X ~ N(m, v²)`: `E e^{−X²/2}`, `E X e^{−X²/2}`, and the bound `√(v² + m²)` on `E X 1[X>0]`.
pub fn gauss_expect_identities(m: f64, v: f64) -> Result<(f64, f64, f64)> {
    ensure_positive("v", v)?;
    let s = v * v + 1.0;
    let e = (-m * m / (2.0 * s)).exp();
    Ok((e / s.sqrt(), m * e / s.powf(1.5), (v * v + m * m).sqrt()))
}

/// Normalized threshold for a received power level in dBm and transmit power in mW.
pub fn threshold_from_dbm(dbm: f64, power_mw: f64) -> f64 {
    power_mw / 10f64.powf(dbm / 10.0)
}

pub fn dbm_from_threshold(t: f64, power_mw: f64) -> f64 {
    10.0 * (power_mw / t).log10()
}
