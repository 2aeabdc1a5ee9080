use crate::corrfuncs::{radial_dominator, tail_integral, CorrelationModel};
use crate::error::{ensure_positive, param, Error, Result};
use crate::gfield::whitened_cross;
use crate::point::Point;
use crate::quad;
use crate::special::normal_pdf;
use std::f64::consts::PI;

/// `ρ̃²(R) + (1/(√3 R²)) ∫_R^∞ s ρ̃²(s) ds`, the geometric part of `F`.
pub fn f_bracket(model: &CorrelationModel, big_r: f64) -> Result<f64> {
    ensure_positive("R", big_r)?;
    let rho = radial_dominator(model, big_r);
    Ok(rho * rho + tail_integral(model, big_r)? / (3f64.sqrt() * big_r * big_r))
}

/// `F = (1/δ)(4π + 1) T (ρ̃²(R) + (1/(√3 R²)) ∫_R^∞ s ρ̃²(s) ds)`.
pub fn f_factor(delta: f64, t_count: f64, model: &CorrelationModel, big_r: f64) -> Result<f64> {
    ensure_positive("delta", delta)?;
    if !(t_count >= 1.0) {
        return Err(param("T", format!("must be at least 1, got {t_count}")));
    }
    let bracket = f_bracket(model, big_r)?;
    Ok((4.0 * PI + 1.0) * t_count * bracket / delta)
}

/// Upper bound on `γᵀΓ⁻¹γ`; identical to [`f_factor`].
pub fn gamma_quadform_bound(delta: f64, t_count: f64, model: &CorrelationModel, big_r: f64) -> Result<f64> {
    f_factor(delta, t_count, model, big_r)
}

/// `γᵀΓ⁻¹γ` for the correlations `γ` between `x0` and `cond` and the
/// correlation matrix `Γ` of `cond`.
pub fn gamma_quadform_exact(model: &CorrelationModel, x0: Point, cond: &[Point]) -> Result<f64> {
    if cond.is_empty() {
        return Ok(0.0);
    }
    let (w, _) = whitened_cross(model, x0, cond)?;
    Ok(w.norm_squared())
}

/// `2|1 − s²| + √(π/2)|m|`, a bound on `dTV(N(m, s²), N(0, 1))`.
pub fn dtv_normal_bound(m: f64, s: f64) -> Result<f64> {
    ensure_positive("s", s)?;
    Ok(2.0 * (1.0 - s * s).abs() + (PI / 2.0).sqrt() * m.abs())
}

/// `dTV(N(m, s²), N(0, 1)) = ½ ∫ |φ_{m,s} − φ|` by quadrature, split at the
/// points where the two densities cross.
pub fn dtv_normal_exact(m: f64, s: f64) -> Result<f64> {
    ensure_positive("s", s)?;
    if m == 0.0 && s == 1.0 {
        return Ok(0.0);
    }
    // log-density difference is a x² + b x + c
    let a = 0.5 * (1.0 - 1.0 / (s * s));
    let b = m / (s * s);
    let c = -m * m / (2.0 * s * s) - s.ln();
    let mut cuts = Vec::new();
    if a.abs() < 1e-14 {
        if b != 0.0 {
            cuts.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc > 0.0 {
            let sq = disc.sqrt();
            cuts.push((-b - sq) / (2.0 * a));
            cuts.push((-b + sq) / (2.0 * a));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let f = |x: f64| (normal_pdf(x, m, s) - normal_pdf(x, 0.0, 1.0)).abs();
    let lo = (m - 40.0 * s).min(-40.0);
    let hi = (m + 40.0 * s).max(40.0);
    let mut edges = vec![lo];
    edges.extend(cuts.into_iter().filter(|x| *x > lo && *x < hi));
    edges.push(hi);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += quad::integrate(f, w[0], w[1], 1e-11, 1e-12)?.value;
    }
    Ok((0.5 * total).min(1.0))
}

/// Chernoff bound `exp{−s(ln(s/μ) − 1) − μ}` on `P(Po(μ) ≥ s)`.
pub fn poisson_chernoff(mu: f64, s: f64) -> Result<f64> {
    ensure_positive("mu", mu)?;
    if !(s >= mu) {
        return Err(param("s", format!("must be at least mu = {mu}, got {s}")));
    }
    Ok((-s * ((s / mu).ln() - 1.0) - mu).exp())
}

/// A mean-measure function on `[0, t]` for [`d2_poisson_poisson`].
pub enum MeanMeasure<'a> {
    Function(&'a dyn Fn(f64) -> f64),
    /// Piecewise-linear through `(s, Λ(s))` knots, ascending in `s`,
    /// constant after the last knot.
    Table(&'a [(f64, f64)]),
}

impl MeanMeasure<'_> {
    fn eval(&self, s: f64) -> f64 {
        match self {
            MeanMeasure::Function(f) => f(s),
            MeanMeasure::Table(tab) => table_eval(tab, s),
        }
    }
}

fn table_eval(tab: &[(f64, f64)], s: f64) -> f64 {
    if tab.is_empty() {
        return 0.0;
    }
    if s <= tab[0].0 {
        return if tab[0].0 > 0.0 { tab[0].1 * s / tab[0].0 } else { tab[0].1 };
    }
    let i = tab.partition_point(|k| k.0 <= s);
    if i >= tab.len() {
        return tab[tab.len() - 1].1;
    }
    let (s0, v0) = tab[i - 1];
    let (s1, v1) = tab[i];
    v0 + (v1 - v0) * (s - s0) / (s1 - s0)
}

const MONOTONE_GRID: usize = 1000;

fn check_monotone(l: &MeanMeasure<'_>, t: f64) -> Result<()> {
    let mut prev = l.eval(0.0);
    for i in 1..=MONOTONE_GRID {
        let s = t * i as f64 / MONOTONE_GRID as f64;
        let v = l.eval(s);
        if v < prev - 1e-12 * prev.abs().max(1.0) {
            return Err(Error::NonMonotone { at: s });
        }
        prev = v;
    }
    Ok(())
}

/// `∫_0^t |Λ1 − Λ2| ds + |Λ1(t) − Λ2(t)|`, a bound on `d̄2` between two
/// Poisson processes. Exact when both inputs are tables.
pub fn d2_poisson_poisson(l1: &MeanMeasure<'_>, l2: &MeanMeasure<'_>, t: f64) -> Result<f64> {
    ensure_positive("t", t)?;
    check_monotone(l1, t)?;
    check_monotone(l2, t)?;
    let end = (l1.eval(t) - l2.eval(t)).abs();
    let integral = match (l1, l2) {
        (MeanMeasure::Table(a), MeanMeasure::Table(b)) => {
            let mut knots: Vec<f64> = vec![0.0, t];
            knots.extend(a.iter().chain(b.iter()).map(|k| k.0).filter(|&s| s > 0.0 && s < t));
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            knots
                .windows(2)
                .map(|w| {
                    let d0 = table_eval(a, w[0]) - table_eval(b, w[0]);
                    let d1 = table_eval(a, w[1]) - table_eval(b, w[1]);
                    abs_linear_integral(d0, d1, w[1] - w[0])
                })
                .sum()
        }
        _ => quad::integrate(|s| (l1.eval(s) - l2.eval(s)).abs(), 0.0, t, 1e-12, 1e-10)?.value,
    };
    Ok(integral + end)
}

/// `∫_0^h |d0 + (d1 − d0) x/h| dx`.
fn abs_linear_integral(d0: f64, d1: f64, h: f64) -> f64 {
    if d0 * d1 >= 0.0 {
        0.5 * h * (d0.abs() + d1.abs())
    } else {
        let x = h * d0.abs() / (d0.abs() + d1.abs());
        0.5 * x * d0.abs() + 0.5 * (h - x) * d1.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_linear_integral_splits_at_zero() {
        assert!((abs_linear_integral(-1.0, 1.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((abs_linear_integral(1.0, 3.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tables_interpolate_from_origin() {
        let tab = [(1.0, 2.0), (3.0, 4.0)];
        assert_eq!(table_eval(&tab, 0.5), 1.0);
        assert_eq!(table_eval(&tab, 2.0), 3.0);
        assert_eq!(table_eval(&tab, 10.0), 4.0);
    }
}
