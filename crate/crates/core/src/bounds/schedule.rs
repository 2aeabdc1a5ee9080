use crate::corrfuncs::{radial_dominator, CorrelationModel};
use crate::error::{ensure_positive, Result};
use crate::spectrum::PropagationParams;
use std::f64::consts::E;

/// Which convergence argument the parameters are chosen for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleCase {
    DeterministicD2,
    DeterministicTv,
    /// Poisson placement; assumes an exponentially decaying `ρ̃`.
    Poisson,
    HardCore { eps_star: f64 },
}

/// Parameters `(C, R, d, ε₀, ε_C, T*)` as functions of `σ`.
///
/// In the deterministic cases `d` and `ε_C` come from the configuration itself
/// and `ε₀`, `T*` do not enter, so those fields are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub c: f64,
    pub r: f64,
    pub d: Option<f64>,
    pub eps0: Option<f64>,
    pub eps_c: Option<f64>,
    pub t_star: Option<f64>,
}

/// `a` is the tail exponent of `ρ̃(r) = O(r^{-(1+a)})`; it is unused in the
/// Poisson case.
pub fn convergence_schedule(
    sigma: f64,
    a: f64,
    params: &PropagationParams,
    model: &CorrelationModel,
    case: ScheduleCase,
) -> Result<Schedule> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("a", a)?;
    let beta = params.beta;
    let s11 = sigma.powf(1.1);
    let c = (sigma * sigma / (beta * beta) + s11).exp();
    let sched = match case {
        ScheduleCase::DeterministicD2 => Schedule {
            c,
            r: sigma.powf(2.0 / a),
            d: None,
            eps0: None,
            eps_c: None,
            t_star: None,
        },
        ScheduleCase::DeterministicTv => Schedule {
            c,
            r: (2.0 * sigma * sigma / (a * beta * beta) + 2.0 * s11 / a).exp(),
            d: None,
            eps0: None,
            eps_c: None,
            t_star: None,
        },
        ScheduleCase::Poisson => {
            let r = sigma.powi(3);
            Schedule {
                c,
                r,
                d: Some(sigma.powi(-2)),
                eps0: Some(eps0(model, sigma)),
                eps_c: Some((-sigma * sigma / (beta * beta) - 2.0 * s11).exp()),
                t_star: Some(16.0 * E * params.kappa * r * r),
            }
        }
        ScheduleCase::HardCore { eps_star } => {
            ensure_positive("eps_star", eps_star)?;
            let r = sigma.powf(2.0 / a);
            Schedule {
                c,
                r,
                d: Some(sigma.powi(-2)),
                eps0: None,
                eps_c: None,
                t_star: Some(hardcore_t_star(r, eps_star)),
            }
        }
    };
    Ok(sched)
}

/// `T* = 4((R + ε*/2)/ε*)²`.
pub fn hardcore_t_star(big_r: f64, eps_star: f64) -> f64 {
    let q = (big_r + eps_star / 2.0) / eps_star;
    4.0 * q * q
}

/// `ε₀ = σ⁻¹ + sup{ε ≥ 0 : 1 − ρ̃(ε) ≤ σ⁻¹}`, infinite when `σ ≤ 1`.
pub fn eps0(model: &CorrelationModel, sigma: f64) -> f64 {
    let inv = 1.0 / sigma;
    if inv >= 1.0 {
        return f64::INFINITY;
    }
    let level = 1.0 - inv;
    let inside = |e: f64| radial_dominator(model, e) >= level;
    if !inside(f64::MIN_POSITIVE) {
        return inv;
    }
    let mut lo = 0.0;
    let mut hi = model.scale.max(1e-300);
    while inside(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-10 * hi.max(1e-300) && hi - lo > 1e-300 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 {
            break;
        }
    }
    inv + 0.5 * (lo + hi)
}
