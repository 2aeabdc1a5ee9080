use super::config::ExperimentConfig;
use crate::corrfuncs::CorrelationKind;
use crate::error::{Error, Result};
use crate::gfield::{CholeskyField, SamplerKind, SpectralField, MAX_DENSE_POINTS};
use crate::metrics::{count_stats, CountStats};
use crate::placement::{
    explicit, gen_hardcore_matern2, gen_hex_grid, gen_poisson, matern2_parent_intensity, read_points_file,
    PlacementKind, PointConfig,
};
use crate::spectrum::{counts_from_field, mean_measure_det, mean_measure_poisson_disc, PropagationParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::time::Instant;

/// Random stream of replication `rep`: ChaCha12 keyed by `seed`, stream number `rep`.
///
/// Streams are independent of each other and of scheduling, so results do not
/// depend on the number of workers.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Per-replication output.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    /// `N(t)` at each configured threshold.
    pub counts: Vec<usize>,
    pub n_points: usize,
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub thresholds: Vec<f64>,
    pub replications: Vec<Replication>,
    /// Per threshold; `None` with fewer than two replications.
    pub stats: Vec<Option<CountStats>>,
    /// Expected count `M(t)` of the simulated placement.
    pub mean_measure: Vec<f64>,
    pub target_intensity: Option<f64>,
    pub mean_realized_intensity: f64,
    pub ridge_events: usize,
    pub max_ridge: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub workers: usize,
    pub notices: Vec<String>,
}

impl ExperimentResult {
    /// Counts at threshold index `j` over all replications.
    pub fn counts_at(&self, j: usize) -> Vec<usize> {
        self.replications.iter().map(|r| r.counts[j]).collect()
    }
}

enum Sampler {
    Dense(CholeskyField),
    Spectral(SpectralField),
    Iid,
}

struct Plan {
    params: PropagationParams,
    fixed: Option<(PointConfig, Vec<f64>, Sampler)>,
    spectral: Option<SpectralField>,
    kappa_parent: Option<f64>,
}

fn log_pathloss(params: &PropagationParams, cfg: &PointConfig) -> Vec<f64> {
    cfg.points.iter().map(|p| params.beta * (params.k * p.norm()).ln()).collect()
}

fn fixed_config(cfg: &ExperimentConfig) -> Result<PointConfig> {
    let p = &cfg.placement;
    match p.kind {
        PlacementKind::HexGrid => gen_hex_grid(p.kappa.expect("validated"), p.disc_radius.expect("validated")),
        PlacementKind::Explicit => {
            let path = p.points_file.as_ref().expect("validated");
            explicit(read_points_file(path)?, p.disc_radius)
        }
        _ => unreachable!("random placements are drawn per replication"),
    }
}

fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    cfg.validate()?;
    let params = cfg.params()?;
    let model = cfg.model();
    let spectral = match cfg.sampler {
        SamplerKind::Spectral => Some(SpectralField::new(&model, cfg.spectral_features)?),
        SamplerKind::ExactCholesky => None,
    };
    let nugget = model.kind == CorrelationKind::Nugget;
    if cfg.placement.kind.is_random() {
        if cfg.sampler == SamplerKind::ExactCholesky && !nugget {
            let p = &cfg.placement;
            let c = p.disc_radius.expect("validated");
            let expected = p.kappa.expect("validated") * std::f64::consts::PI * c * c;
            if expected > MAX_DENSE_POINTS as f64 {
                return Err(Error::Infeasible(format!(
                    "about {expected:.0} points per replication exceed the dense limit of {MAX_DENSE_POINTS}; reduce placement.disc_radius or set sampler = \"spectral\""
                )));
            }
        }
        let kappa_parent = match cfg.placement.kind {
            PlacementKind::HardCoreMatern2 => Some(matern2_parent_intensity(
                cfg.placement.kappa.expect("validated"),
                cfg.placement.hard_core.expect("validated"),
            )?),
            _ => None,
        };
        return Ok(Plan { params, fixed: None, spectral, kappa_parent });
    }
    let pc = fixed_config(cfg)?;
    let sampler = if nugget {
        Sampler::Iid
    } else if let Some(s) = spectral {
        Sampler::Spectral(s)
    } else {
        Sampler::Dense(CholeskyField::new(&model, &pc.points)?)
    };
    let lg = log_pathloss(&params, &pc);
    Ok(Plan { params, fixed: Some((pc, lg, sampler)), spectral, kappa_parent: None })
}

fn draw_iid<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn replicate(cfg: &ExperimentConfig, plan: &Plan, rep: u64) -> Result<Replication> {
    let mut rng = replication_rng(cfg.seed, rep);
    let params = &plan.params;
    let thresholds = &cfg.thresholds.values;
    let mut counts = Vec::with_capacity(thresholds.len());
    if let Some((pc, lg, sampler)) = &plan.fixed {
        let (z, ridge) = match sampler {
            Sampler::Dense(f) => (f.sample(&mut rng), f.ridge()),
            Sampler::Spectral(s) => (s.sample(&pc.points, &mut rng), 0.0),
            Sampler::Iid => (draw_iid(pc.len(), &mut rng), 0.0),
        };
        counts_from_field(lg, &z, params.sigma, params.beta, thresholds, &mut counts);
        return Ok(Replication { counts, n_points: pc.len(), ridge });
    }
    let p = &cfg.placement;
    let c = p.disc_radius.expect("validated");
    let pc = match p.kind {
        PlacementKind::Poisson => gen_poisson(p.kappa.expect("validated"), c, &mut rng)?,
        PlacementKind::HardCoreMatern2 => {
            gen_hardcore_matern2(plan.kappa_parent.expect("set"), p.hard_core.expect("validated"), c, &mut rng)?
        }
        _ => unreachable!(),
    };
    let model = cfg.model();
    let (z, ridge) = if model.kind == CorrelationKind::Nugget {
        (draw_iid(pc.len(), &mut rng), 0.0)
    } else if let Some(s) = &plan.spectral {
        (s.sample(&pc.points, &mut rng), 0.0)
    } else if pc.is_empty() {
        (Vec::new(), 0.0)
    } else {
        let f = CholeskyField::new(&model, &pc.points)?;
        (f.sample(&mut rng), f.ridge())
    };
    let lg = log_pathloss(params, &pc);
    counts_from_field(&lg, &z, params.sigma, params.beta, thresholds, &mut counts);
    Ok(Replication { counts, n_points: pc.len(), ridge })
}

/// Expected counts of the simulated placement at each threshold.
pub fn expected_counts(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let params = cfg.params()?;
    let t = &cfg.thresholds.values;
    if cfg.placement.kind.is_random() {
        let c = cfg.placement.disc_radius.expect("validated");
        t.iter().map(|&t| mean_measure_poisson_disc(&params, c, t)).collect()
    } else {
        let pc = fixed_config(cfg)?;
        Ok(t.iter().map(|&t| mean_measure_det(&params, &pc.points, t)).collect())
    }
}

/// Runs all replications on a pool of `cfg.workers` threads.
///
/// Random placements are redrawn in every replication; fixed placements and
/// their factorization are built once and shared.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let plan = plan(cfg)?;
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Infeasible(format!("cannot start worker pool: {e}")))?;
    let replications: Vec<Replication> = pool.install(|| {
        (0..cfg.n_reps as u64).into_par_iter().map(|r| replicate(cfg, &plan, r)).collect::<Result<Vec<_>>>()
    })?;
    let thresholds = cfg.thresholds.values.clone();
    let mut notices = Vec::new();
    let stats = (0..thresholds.len())
        .map(|j| {
            let counts: Vec<usize> = replications.iter().map(|r| r.counts[j]).collect();
            count_stats(&counts).ok().map(|s| s.with_threshold(thresholds[j]))
        })
        .collect::<Vec<_>>();
    if cfg.n_reps < 2 {
        notices.push("count statistics need at least 2 replications and were omitted".to_string());
    }
    let area = match &plan.fixed {
        Some((pc, _, _)) => std::f64::consts::PI * pc.disc_radius * pc.disc_radius,
        None => std::f64::consts::PI * cfg.placement.disc_radius.expect("validated").powi(2),
    };
    let mean_points = replications.iter().map(|r| r.n_points as f64).sum::<f64>() / replications.len() as f64;
    let ridge_events = replications.iter().filter(|r| r.ridge > 0.0).count();
    let max_ridge = replications.iter().map(|r| r.ridge).fold(0.0, f64::max);
    Ok(ExperimentResult {
        mean_measure: expected_counts(cfg)?,
        thresholds,
        replications,
        stats,
        target_intensity: cfg.placement.kappa,
        mean_realized_intensity: if area > 0.0 { mean_points / area } else { 0.0 },
        ridge_events,
        max_ridge,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
        workers,
        notices,
    })
}
