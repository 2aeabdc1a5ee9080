//! Poisson approximation error bounds for the signal spectrum, itemized term by term.

mod lemmas;
mod schedule;

pub use lemmas::{
    d2_poisson_poisson, dtv_normal_bound, dtv_normal_exact, f_bracket, f_factor, gamma_quadform_bound,
    gamma_quadform_exact, poisson_chernoff, MeanMeasure,
};
pub use schedule::{convergence_schedule, eps0, hardcore_t_star, Schedule, ScheduleCase};

use crate::corrfuncs::{check_p2, radial_dominator, upd_delta, CorrelationModel};
use crate::error::{ensure_positive, param, Error, Result};
use crate::harness::replication_rng;
use crate::placement::{gen_hardcore_matern2, geometry_stats, matern2_parent_intensity, PointConfig};
use crate::quad;
use crate::spectrum::{b_at_radius, mean_measure_det, mean_measure_limit, radial_q_integral, PropagationParams};
use crate::special::q;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    Deterministic,
    PoissonPlacement,
    HardCore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    D2,
    TotalVariation,
}

/// An itemized bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub case: BoundCase,
    pub metric: Metric,
    pub terms: Vec<(String, f64)>,
    pub preconditions: Vec<(String, bool)>,
    /// `None` when any precondition fails.
    pub total: Option<f64>,
    pub f_value: f64,
    /// Auxiliary quantities such as Monte Carlo standard errors.
    pub notes: Vec<(String, f64)>,
}

impl BoundReport {
    fn new(case: BoundCase, metric: Metric, terms: Vec<(String, f64)>, preconditions: Vec<(String, bool)>, f_value: f64) -> Self {
        let valid = preconditions.iter().all(|p| p.1);
        let total = valid.then(|| terms.iter().map(|t| t.1).sum());
        BoundReport { case, metric, terms, preconditions, total, f_value, notes: Vec::new() }
    }

    pub fn is_valid(&self) -> bool {
        self.total.is_some()
    }

    /// A valid bound below 1.
    pub fn informative(&self) -> bool {
        self.total.is_some_and(|t| t < 1.0)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == name).map(|t| t.1)
    }

    /// One `name value` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case {:?}", self.case);
        let _ = writeln!(s, "metric {:?}", self.metric);
        for (k, v) in &self.preconditions {
            let _ = writeln!(s, "precondition:{k} {}", if *v { "ok" } else { "FAILED" });
        }
        let _ = writeln!(s, "F {:e}", self.f_value);
        for (k, v) in &self.terms {
            let _ = writeln!(s, "{k} {v:e}");
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k} {v:e}");
        }
        match self.total {
            Some(t) => {
                let _ = writeln!(s, "total {t:e}");
                let _ = writeln!(s, "informative {}", t < 1.0);
            }
            None => {
                let _ = writeln!(s, "total invalid");
            }
        }
        s
    }

    /// `key = value` lines, readable as TOML.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case = \"{:?}\"", self.case);
        let _ = writeln!(s, "metric = \"{:?}\"", self.metric);
        let _ = writeln!(s, "valid = {}", self.is_valid());
        let _ = writeln!(s, "informative = {}", self.informative());
        let _ = writeln!(s, "f_value = {}", toml_float(self.f_value));
        if let Some(t) = self.total {
            let _ = writeln!(s, "total = {}", toml_float(t));
        }
        let _ = writeln!(s, "\n[terms]");
        for (k, v) in &self.terms {
            let _ = writeln!(s, "{k} = {}", toml_float(*v));
        }
        let _ = writeln!(s, "\n[preconditions]");
        for (k, v) in &self.preconditions {
            let _ = writeln!(s, "\"{k}\" = {v}");
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\n[notes]");
            for (k, v) in &self.notes {
                let _ = writeln!(s, "{k} = {}", toml_float(*v));
            }
        }
        s
    }
}

pub(crate) fn toml_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// How the contribution of transmitters beyond `C` is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// `2 Σ_{‖x‖>C} Q(b_x)` over configuration points beyond `C`.
    Exact,
    /// The configuration is complete and lies inside `B̄(0, C)`.
    AssertNone,
    /// `2κ 2π ∫_C^∞ Q(b(r)) r dr` with the configuration intensity.
    Surrogate,
}

/// Inputs of the deterministic-placement bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetInputs {
    pub params: PropagationParams,
    pub model: CorrelationModel,
    pub t: f64,
    pub r: f64,
    pub c: f64,
    pub d_star: f64,
    /// Smallest pairwise distance below `C`; infinite if there is none.
    pub eps_c: f64,
    /// `T_C(R)`; the conservative point-centred count in `B̄(p, 2R)`.
    pub t_count: usize,
    pub mean: f64,
    pub truncation: f64,
}

impl DetInputs {
    pub fn from_config(
        params: &PropagationParams,
        model: &CorrelationModel,
        config: &PointConfig,
        t: f64,
        big_r: f64,
        c: f64,
        mode: TruncationMode,
    ) -> Result<Self> {
        params.validate()?;
        ensure_positive("t", t)?;
        ensure_positive("R", big_r)?;
        if !(c >= big_r) {
            return Err(param("C", format!("must be at least R = {big_r}, got {c}")));
        }
        let stats = geometry_stats(config, big_r)?;
        let outside: Vec<_> = config.points.iter().filter(|p| p.norm() > c).copied().collect();
        let truncation = match mode {
            TruncationMode::Exact => 2.0 * outside.iter().map(|p| q(b_at_radius(params, p.norm(), t))).sum::<f64>(),
            TruncationMode::AssertNone => {
                if !outside.is_empty() {
                    return Err(param("truncation", format!("{} points lie beyond C = {c}", outside.len())));
                }
                0.0
            }
            TruncationMode::Surrogate => {
                2.0 * config.intensity * 2.0 * PI * radial_q_integral(params, t, c, f64::INFINITY, 1)?
            }
        };
        Ok(DetInputs {
            params: *params,
            model: *model,
            t,
            r: big_r,
            c,
            d_star: stats.d_star,
            eps_c: if stats.eps_min < c { stats.eps_min } else { f64::INFINITY },
            t_count: stats.t_upper,
            mean: mean_measure_det(params, &config.points, t),
            truncation,
        })
    }
}

/// `F` with the u.p.d. constant evaluated lazily, so that models without a
/// spectral density still work when the geometric bracket vanishes.
fn f_lazy(model: &CorrelationModel, eps: f64, t_count: f64, big_r: f64) -> Result<f64> {
    let bracket = f_bracket(model, big_r)?;
    if bracket == 0.0 {
        return Ok(0.0);
    }
    let delta = upd_delta(model, eps)?;
    Ok((4.0 * PI + 1.0) * t_count * bracket / delta)
}

/// `[8(B_C + σ⁻¹)√F/√(1 − F²), (1 + b⁻²)√F e^{−b²(1/F − 1)/2}]`.
fn f_terms(b: f64, b_c: f64, sigma: f64, f: f64) -> (f64, f64) {
    if f == 0.0 {
        return (0.0, 0.0);
    }
    let sf = f.sqrt();
    let t3 = if f < 1.0 { 8.0 * (b_c + 1.0 / sigma) * sf / (1.0 - f * f).sqrt() } else { f64::INFINITY };
    let t4 = (1.0 + 1.0 / (b * b)) * sf * (-b * b * (1.0 / f - 1.0) / 2.0).exp();
    (t3, t4)
}

/// `e^{−b²(1 − ρ̃(ε))/4}`.
fn decorrelation_term(model: &CorrelationModel, b: f64, eps: f64) -> f64 {
    (-b * b * (1.0 - radial_dominator(model, eps)) / 4.0).exp()
}

fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// The `d̄2` bound for a deterministic configuration.
pub fn d2_bound_det(inp: &DetInputs) -> Result<BoundReport> {
    let p = &inp.params;
    let b_star = b_at_radius(p, inp.d_star, inp.t);
    let b_c = b_at_radius(p, inp.c, inp.t);
    let tc = inp.t_count as f64;
    let f = f_lazy(&inp.model, inp.eps_c, tc, inp.r)?;
    let pre = inp.mean.min(1.0 + 2.0 * log_plus(inp.mean));
    let (t3, t4) = f_terms(b_star, b_c, p.sigma, f);
    let terms = vec![
        ("truncation".to_string(), inp.truncation),
        ("term1_tail".to_string(), pre * tc * q(b_star)),
        ("term2_decorrelation".to_string(), pre * tc * 5.0 * decorrelation_term(&inp.model, b_star, inp.eps_c)),
        ("term3_dependence".to_string(), pre * (inp.t + 1.0) * t3),
        ("term4_dependence".to_string(), pre * (inp.t + 1.0) * t4),
    ];
    let pre_conds = vec![
        ("b_star > 0".to_string(), b_star > 0.0),
        ("B_C > 1".to_string(), b_c > 1.0),
        ("B_C^2 F <= 1".to_string(), b_c * b_c * f <= 1.0),
        ("F < 1".to_string(), f < 1.0),
        ("P2 at R".to_string(), check_p2(&inp.model, inp.r).holds),
    ];
    Ok(BoundReport::new(BoundCase::Deterministic, Metric::D2, terms, pre_conds, f))
}

/// The total variation bound for a deterministic configuration.
pub fn dtv_bound_det(inp: &DetInputs) -> Result<BoundReport> {
    let p = &inp.params;
    let b_star = b_at_radius(p, inp.d_star, inp.t);
    let tc = inp.t_count as f64;
    let f = f_lazy(&inp.model, inp.eps_c, tc, inp.r)?;
    let ratio = inp.c / inp.r;
    let area = 4.0 / 3.0 * (PI * ratio * ratio + (5.0 * PI + 3.0) * ratio);
    let terms = vec![
        ("truncation".to_string(), inp.truncation),
        ("term1_tail".to_string(), inp.mean * tc * q(b_star)),
        ("term2_decorrelation".to_string(), inp.mean * tc * 5.0 * decorrelation_term(&inp.model, b_star, inp.eps_c)),
        ("term3_dependence".to_string(), area * tc * (f.sqrt() + 2.0 * f)),
    ];
    let pre_conds = vec![
        ("b_star > 0".to_string(), b_star > 0.0),
        ("P2 at R".to_string(), check_p2(&inp.model, inp.r).holds),
    ];
    Ok(BoundReport::new(BoundCase::Deterministic, Metric::TotalVariation, terms, pre_conds, f))
}

/// Inputs of the Poisson-placement bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonInputs {
    pub params: PropagationParams,
    pub model: CorrelationModel,
    pub t: f64,
    pub r: f64,
    pub c: f64,
    pub d: f64,
    pub eps0: f64,
    pub eps_c: f64,
    pub t_star: f64,
}

impl PoissonInputs {
    pub fn from_schedule(params: &PropagationParams, model: &CorrelationModel, t: f64, s: &Schedule) -> Result<Self> {
        let missing = |f: &'static str| param(f, "not set by the schedule for this case");
        Ok(PoissonInputs {
            params: *params,
            model: *model,
            t,
            r: s.r,
            c: s.c,
            d: s.d.ok_or_else(|| missing("d"))?,
            eps0: s.eps0.ok_or_else(|| missing("eps0"))?,
            eps_c: s.eps_c.ok_or_else(|| missing("eps_c"))?,
            t_star: s.t_star.ok_or_else(|| missing("t_star"))?,
        })
    }
}

/// `Var(M^Ξ(s)) = κ 2π ∫_0^∞ Q(b(r, s))² r dr` for a Poisson placement.
pub fn poisson_mean_variance(params: &PropagationParams, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    Ok(params.kappa * 2.0 * PI * radial_q_integral(params, s, 0.0, f64::INFINITY, 2)?)
}

/// `∫_0^t √V(s) ds` by quadrature.
fn integrate_sqrt<F: Fn(f64) -> Result<f64>>(v: F, t: f64) -> Result<f64> {
    let mut err = None;
    let r = quad::integrate(
        |s| match v(s) {
            Ok(x) => x.max(0.0).sqrt(),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t,
        1e-12,
        1e-8,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

fn random_truncation(params: &PropagationParams, kappa: f64, t: f64, c: f64) -> Result<f64> {
    Ok(2.0 * kappa * 2.0 * PI * radial_q_integral(params, t, c, f64::INFINITY, 1)?)
}

/// The `d̄2` bound for a homogeneous Poisson placement.
pub fn d2_bound_poisson(inp: &PoissonInputs) -> Result<BoundReport> {
    let p = &inp.params;
    ensure_positive("t", inp.t)?;
    let kappa = p.kappa;
    let t = inp.t;
    let m = mean_measure_limit(p, t);
    let b = b_at_radius(p, inp.d, t);
    let b_c = b_at_radius(p, inp.c, t);
    let f = f_lazy(&inp.model, inp.eps_c, inp.t_star, inp.r)?;
    let (t3, t4) = f_terms(b, b_c, p.sigma, f);
    let r2 = inp.r * inp.r;
    let mu = 16.0 * kappa * r2;
    let chernoff = if inp.t_star >= mu { poisson_chernoff(mu, inp.t_star)? } else { f64::INFINITY };
    let cr = inp.c / inp.r + 1.0;
    let ce = 2.0 * inp.c / inp.eps_c + 1.0;
    let pair = 4.0 * kappa * inp.eps_c * inp.eps_c;
    let terms = vec![
        ("truncation".to_string(), random_truncation(p, kappa, t, inp.c)?),
        ("mean_deviation_t".to_string(), poisson_mean_variance(p, t)?.sqrt()),
        ("mean_deviation_integral".to_string(), integrate_sqrt(|s| poisson_mean_variance(p, s), t)?),
        (
            "term_tail".to_string(),
            m * ((kappa * PI * r2 + 1.0) * q(b)
                + 5.0 * kappa * PI * (inp.eps0 * inp.eps0 + r2 * decorrelation_term(&inp.model, b, inp.eps0))),
        ),
        ("term3_dependence".to_string(), (t + 1.0) * m * t3),
        ("term4_dependence".to_string(), (t + 1.0) * m * t4),
        ("near_origin".to_string(), kappa * PI * inp.d * inp.d),
        ("crowding".to_string(), cr * cr * chernoff),
        ("close_pairs".to_string(), ce * ce * pair * pair),
    ];
    let pre_conds = vec![
        ("T* >= 16 kappa R^2".to_string(), inp.t_star >= mu),
        ("b(d) > 0".to_string(), b > 0.0),
        ("B_C > 1".to_string(), b_c > 1.0),
        ("B_C^2 F <= 1".to_string(), b_c * b_c * f <= 1.0),
        ("F < 1".to_string(), f < 1.0),
        ("P2 at R".to_string(), check_p2(&inp.model, inp.r).holds),
        ("d <= C".to_string(), inp.d <= inp.c),
        ("C >= R".to_string(), inp.c >= inp.r),
    ];
    Ok(BoundReport::new(BoundCase::PoissonPlacement, Metric::D2, terms, pre_conds, f))
}

/// How the mean-deviation terms of the hard-core bound are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanDeviationMode {
    /// Empirical estimate over `n_rep` Matérn II configurations.
    MonteCarlo { n_rep: usize, seed: u64 },
    /// Bound through a caller-supplied total positive variation `γ̆⁺` of the
    /// reduced covariance measure; needs `σ > 2/ε*`.
    UserGamma { gamma_plus: f64 },
}

pub const MIN_MC_REPLICATIONS: usize = 30;

/// Inputs of the hard-core bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardCoreInputs {
    pub params: PropagationParams,
    pub model: CorrelationModel,
    pub t: f64,
    pub r: f64,
    pub c: f64,
    pub d: f64,
    pub eps_star: f64,
}

/// Monte Carlo estimate of `E|M^Ξ(t) − M(t)|` and `E∫_0^t |M^Ξ(s) − M(s)| ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanDeviationEstimate {
    pub at_t: f64,
    pub at_t_se: f64,
    pub integral: f64,
    pub integral_se: f64,
    /// Radius of the simulated disc.
    pub disc_radius: f64,
    /// Deterministic allowance `2 × (mean beyond the disc)` included in both estimates.
    pub tail_allowance: f64,
}

/// Radius beyond which the mean measure at `t` is below `1e-9 · L(t)`.
pub fn negligible_tail_radius(params: &PropagationParams, t: f64) -> Result<f64> {
    let target = 1e-9 * mean_measure_limit(params, t);
    let mut r = params.reach(t);
    while params.kappa * 2.0 * PI * radial_q_integral(params, t, r, f64::INFINITY, 1)? > target {
        r *= 1.5;
    }
    Ok(r)
}

const S_NODES: usize = 65;

/// Estimates the mean-deviation terms for a Matérn II placement of intensity
/// `params.kappa` on a disc of radius `min(C, negligible_tail_radius)`.
pub fn hardcore_mean_deviation_mc(
    params: &PropagationParams,
    eps_star: f64,
    t: f64,
    c: f64,
    n_rep: usize,
    seed: u64,
) -> Result<MeanDeviationEstimate> {
    if n_rep < MIN_MC_REPLICATIONS {
        return Err(Error::InsufficientReplications { required: MIN_MC_REPLICATIONS, got: n_rep });
    }
    let radius = c.min(negligible_tail_radius(params, t)?);
    disc_mean_deviation(params, eps_star, t, radius, n_rep, seed)
}

/// As [`hardcore_mean_deviation_mc`] on a disc of the given radius.
pub fn disc_mean_deviation(
    params: &PropagationParams,
    eps_star: f64,
    t: f64,
    radius: f64,
    n_rep: usize,
    seed: u64,
) -> Result<MeanDeviationEstimate> {
    if n_rep < MIN_MC_REPLICATIONS {
        return Err(Error::InsufficientReplications { required: MIN_MC_REPLICATIONS, got: n_rep });
    }
    let kappa_parent = matern2_parent_intensity(params.kappa, eps_star)?;
    // Simpson nodes on [0, t]
    let nodes: Vec<f64> = (0..S_NODES).map(|i| t * i as f64 / (S_NODES - 1) as f64).collect();
    let weights: Vec<f64> = (0..S_NODES)
        .map(|i| {
            let w = if i == 0 || i == S_NODES - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * t / (3.0 * (S_NODES - 1) as f64)
        })
        .collect();
    let disc_mean = |s: f64| -> Result<f64> {
        Ok(params.kappa * 2.0 * PI * radial_q_integral(params, s, 0.0, radius, 1)?)
    };
    let tail_mean = |s: f64| -> Result<f64> {
        Ok(params.kappa * 2.0 * PI * radial_q_integral(params, s, radius, f64::INFINITY, 1)?)
    };
    let m_nodes: Vec<f64> = nodes.iter().map(|&s| disc_mean(s)).collect::<Result<_>>()?;
    let tail_t = tail_mean(t)?;
    let tail_int: f64 = nodes.iter().zip(&weights).map(|(&s, w)| tail_mean(s).map(|v| v * w)).sum::<Result<f64>>()?;
    let mut dev_t = Vec::with_capacity(n_rep);
    let mut dev_int = Vec::with_capacity(n_rep);
    for rep in 0..n_rep {
        let mut rng = replication_rng(seed, rep as u64);
        let cfg = gen_hardcore_matern2(kappa_parent, eps_star, radius, &mut rng)?;
        let mut integral = 0.0;
        let mut last = 0.0;
        for (i, &s) in nodes.iter().enumerate() {
            let mx = mean_measure_det(params, &cfg.points, s);
            let dev = (mx - m_nodes[i]).abs();
            integral += weights[i] * dev;
            last = dev;
        }
        dev_t.push(last);
        dev_int.push(integral);
    }
    let (mt, st) = mean_se(&dev_t);
    let (mi, si) = mean_se(&dev_int);
    Ok(MeanDeviationEstimate {
        at_t: mt + 2.0 * tail_t,
        at_t_se: st,
        integral: mi + 2.0 * tail_int,
        integral_se: si,
        disc_radius: radius,
        tail_allowance: 2.0 * tail_t,
    })
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// The `d̄2` bound for a Matérn-type hard-core placement.
pub fn d2_bound_hardcore(inp: &HardCoreInputs, mode: MeanDeviationMode) -> Result<BoundReport> {
    let p = &inp.params;
    ensure_positive("t", inp.t)?;
    ensure_positive("eps_star", inp.eps_star)?;
    let t = inp.t;
    let kappa = p.kappa;
    let m = mean_measure_limit(p, t);
    let b = b_at_radius(p, inp.d, t);
    let b_c = b_at_radius(p, inp.c, t);
    let t_star = hardcore_t_star(inp.r, inp.eps_star);
    let f = f_lazy(&inp.model, inp.eps_star, t_star, inp.r)?;
    let (t3, t4) = f_terms(b, b_c, p.sigma, f);
    let mut notes = Vec::new();
    let mut gamma_ok = true;
    let (dev_t, dev_int) = match mode {
        MeanDeviationMode::MonteCarlo { n_rep, seed } => {
            let est = hardcore_mean_deviation_mc(p, inp.eps_star, t, inp.c, n_rep, seed)?;
            notes.push(("mean_deviation_t_se".to_string(), est.at_t_se));
            notes.push(("mean_deviation_integral_se".to_string(), est.integral_se));
            notes.push(("mc_disc_radius".to_string(), est.disc_radius));
            (est.at_t, est.integral)
        }
        MeanDeviationMode::UserGamma { gamma_plus } => {
            if !(gamma_plus >= 0.0) {
                return Err(param("gamma_plus", "must be non-negative"));
            }
            gamma_ok = p.sigma > 2.0 / inp.eps_star;
            let var = |s: f64| -> Result<f64> {
                let extra = 2.0 * gamma_plus * mean_measure_limit(p, s) * q(b_at_radius(p, 1.0 / p.sigma, s));
                Ok(poisson_mean_variance(p, s)? + extra)
            };
            (var(t)?.sqrt(), integrate_sqrt(var, t)?)
        }
    };
    let terms = vec![
        ("truncation".to_string(), random_truncation(p, kappa, t, inp.c)?),
        ("mean_deviation_t".to_string(), dev_t),
        ("mean_deviation_integral".to_string(), dev_int),
        (
            "term_tail".to_string(),
            m * t_star * (q(b) + 5.0 * decorrelation_term(&inp.model, b, inp.eps_star)),
        ),
        ("near_origin".to_string(), kappa * PI * inp.d * inp.d),
        ("term3_dependence".to_string(), (t + 1.0) * m * t3),
        ("term4_dependence".to_string(), (t + 1.0) * m * t4),
    ];
    let mut pre_conds = vec![
        ("b(d) > 0".to_string(), b > 0.0),
        ("B_C > 1".to_string(), b_c > 1.0),
        ("B_C^2 F <= 1".to_string(), b_c * b_c * f <= 1.0),
        ("F < 1".to_string(), f < 1.0),
        ("P2 at R".to_string(), check_p2(&inp.model, inp.r).holds),
        ("d <= C".to_string(), inp.d <= inp.c),
        ("C >= R".to_string(), inp.c >= inp.r),
    ];
    if matches!(mode, MeanDeviationMode::UserGamma { .. }) {
        pre_conds.push(("sigma > 2/eps_star".to_string(), gamma_ok));
    }
    let mut report = BoundReport::new(BoundCase::HardCore, Metric::D2, terms, pre_conds, f);
    report.notes = notes;
    Ok(report)
}
