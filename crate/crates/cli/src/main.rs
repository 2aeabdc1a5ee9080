use clap::{Args, Parser, Subcommand, ValueEnum};
use signal_spectrum::bounds::{
    convergence_schedule, d2_bound_det, d2_bound_hardcore, d2_bound_poisson, dtv_bound_det, BoundReport, DetInputs,
    HardCoreInputs, MeanDeviationMode, PoissonInputs, ScheduleCase, TruncationMode,
};
use signal_spectrum::corrfuncs::{upd_delta, upd_h, CorrelationKind, CorrelationModel};
use signal_spectrum::error::Error;
use signal_spectrum::harness::{parse_records_csv, run_experiment, summary_text, write_outputs, ExperimentConfig};
use signal_spectrum::metrics::{check_window, count_stats, ospa, pp_points, pp_points_csv};
use signal_spectrum::placement::{explicit, gen_hex_grid, read_points_file, PlacementKind, PointConfig};
use signal_spectrum::spectrum::{mean_measure_det, mean_measure_limit, mean_measure_poisson_disc};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spectrum", version, about = "Signal spectrum simulation and Poisson approximation bounds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// Overrides the seed of randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replications.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path or prefix.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write per-replication counts and a summary.
    Simulate { config: PathBuf },
    /// Compute a bound report for the placement in a config file.
    Bounds(BoundsArgs),
    /// Print the u.p.d. constant of a correlation model.
    Upd {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Matérn ν or Wendland k.
        #[arg(long)]
        smoothness: Option<f64>,
        #[arg(long)]
        eps: f64,
    },
    /// OSPA distance between two files of spectrum values (one per line).
    Ospa {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// P-P data (`k,ecdf,pcdf`) from a per-replication counts file.
    Ppdata {
        result: PathBuf,
        #[arg(long)]
        t: f64,
        /// Poisson mean; defaults to the sample mean.
        #[arg(long)]
        mean: Option<f64>,
    },
    /// Print L(t) and, where applicable, the disc and configuration mean measures.
    Meanmeasure {
        config: PathBuf,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Nugget,
    Exponential,
    Matern,
    SquaredExponential,
    Wendland,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum CaseArg {
    Det,
    Poisson,
    Hardcore,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum MetricArg {
    D2,
    Tv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TruncArg {
    Exact,
    AssertNone,
    Surrogate,
}

#[derive(Args)]
struct BoundsArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value = "det")]
    case: CaseArg,
    #[arg(long, value_enum, default_value = "d2")]
    metric: MetricArg,
    /// Threshold t.
    #[arg(long)]
    t: f64,
    /// Neighbourhood radius R; taken from the schedule when omitted.
    #[arg(long)]
    r: Option<f64>,
    /// Truncation radius C; defaults to the placement disc radius or the schedule.
    #[arg(long)]
    c: Option<f64>,
    /// Exclusion radius d for random placements.
    #[arg(long)]
    d: Option<f64>,
    /// Tail exponent a of the correlation used by the schedule.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Sweep σ over `start:end:count` using the convergence schedule.
    #[arg(long)]
    sigma_sweep: Option<String>,
    #[arg(long, value_enum, default_value = "assert-none")]
    truncation: TruncArg,
    /// Replications for the Monte Carlo mean deviation (hard-core case).
    #[arg(long, default_value_t = 200)]
    mc_reps: usize,
    /// Use the γ̆⁺ bound instead of Monte Carlo (hard-core case).
    #[arg(long)]
    gamma_plus: Option<f64>,
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } | Error::Config { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = cli.common;
    match cli.cmd {
        Command::Simulate { config } => simulate(&config, &common),
        Command::Bounds(args) => bounds(&args, &common),
        Command::Upd { model, scale, smoothness, eps } => {
            let m = model_from(model, scale, smoothness);
            let delta = upd_delta(&m, eps)?;
            println!("delta {delta:e}");
            if m.kind != CorrelationKind::Nugget {
                println!("H {:e}", upd_h(&m, eps)?);
            }
            Ok(())
        }
        Command::Ospa { file1, file2, t } => {
            let a = read_values(&file1)?;
            let b = read_values(&file2)?;
            check_window(&a, t)?;
            check_window(&b, t)?;
            println!("{}", ospa(&a, &b));
            Ok(())
        }
        Command::Ppdata { result, t, mean } => {
            let text = std::fs::read_to_string(&result).map_err(Error::from)?;
            let records = parse_records_csv(&text)?;
            let counts = records
                .iter()
                .find(|r| ((r.0 - t) / t).abs() < 1e-12)
                .map(|r| &r.1)
                .ok_or_else(|| Failure::Usage(format!("threshold {t} not found in {}", result.display())))?;
            let stats = count_stats(counts)?;
            let mu = mean.unwrap_or(stats.mean);
            emit(&common, &pp_points_csv(&pp_points(&stats, mu)?))
        }
        Command::Meanmeasure { config, t } => {
            let cfg = load(&config, &common)?;
            let params = cfg.params()?;
            let mut out = format!("L {:e}\n", mean_measure_limit(&params, t));
            if let Some(c) = cfg.placement.disc_radius {
                if cfg.placement.kind != PlacementKind::Explicit {
                    out += &format!("M_disc {:e}\n", mean_measure_poisson_disc(&params, c, t)?);
                }
            }
            if !cfg.placement.kind.is_random() {
                let pc = fixed_placement(&cfg)?;
                out += &format!("M_det {:e}\n", mean_measure_det(&params, &pc.points, t));
            }
            emit(&common, &out)
        }
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn model_from(m: ModelArg, scale: f64, smoothness: Option<f64>) -> CorrelationModel {
    let mut model = match m {
        ModelArg::Nugget => CorrelationModel::nugget(),
        ModelArg::Exponential => CorrelationModel::exponential(scale),
        ModelArg::Matern => CorrelationModel::matern(scale, 0.5),
        ModelArg::SquaredExponential => CorrelationModel::squared_exponential(scale),
        ModelArg::Wendland => CorrelationModel::wendland(scale, 1),
    };
    if let Some(s) = smoothness {
        model.smoothness = s;
    }
    model
}

fn read_values(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let mut v = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line
            .parse()
            .map_err(|_| Error::Parse { line: i + 1, reason: format!("`{line}` is not a number") })?;
        v.push(x);
    }
    Ok(v)
}

fn load(path: &Path, common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(path: &Path, common: &Common) -> Result<(), Failure> {
    let cfg = load(path, common)?;
    let result = run_experiment(&cfg)?;
    let prefix = common
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| path.with_extension(""));
    let (csv, summary) = write_outputs(&cfg, &result, &prefix)?;
    print!("{}", summary_text(&cfg, &result));
    eprintln!("wrote {} and {}", csv.display(), summary.display());
    Ok(())
}

fn fixed_placement(cfg: &ExperimentConfig) -> Result<PointConfig, Failure> {
    let p = &cfg.placement;
    Ok(match p.kind {
        PlacementKind::HexGrid => gen_hex_grid(p.kappa.unwrap_or(1.0), p.disc_radius.unwrap_or(1.0))?,
        PlacementKind::Explicit => {
            let file = p.points_file.as_ref().ok_or_else(|| Failure::Usage("points_file missing".into()))?;
            explicit(read_points_file(file)?, p.disc_radius)?
        }
        _ => return Err(Failure::Usage("this placement is random; use --case poisson or hardcore".into())),
    })
}

fn parse_sweep(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--sigma-sweep expects start:end:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn bounds(args: &BoundsArgs, common: &Common) -> Result<(), Failure> {
    let cfg = load(&args.config, common)?;
    let base = cfg.params()?;
    let model = cfg.model();
    let sigmas = match &args.sigma_sweep {
        Some(s) => parse_sweep(s)?,
        None => vec![base.sigma],
    };
    let sweep = args.sigma_sweep.is_some();
    let fixed = if args.case == CaseArg::Det { Some(fixed_placement(&cfg)?) } else { None };
    let mut text = String::new();
    let mut all_valid = true;
    for sigma in sigmas {
        let params = base.with_sigma(sigma);
        params.validate()?;
        let case = match (args.case, args.metric) {
            (CaseArg::Det, MetricArg::D2) => ScheduleCase::DeterministicD2,
            (CaseArg::Det, MetricArg::Tv) => ScheduleCase::DeterministicTv,
            (CaseArg::Poisson, _) => ScheduleCase::Poisson,
            (CaseArg::Hardcore, _) => ScheduleCase::HardCore {
                eps_star: cfg.placement.hard_core.ok_or_else(|| Failure::Usage("placement.hard_core missing".into()))?,
            },
        };
        let sched = convergence_schedule(sigma, args.a, &params, &model, case)?;
        let pick = |v: Option<f64>, s: f64| if sweep { s } else { v.unwrap_or(s) };
        let r = pick(args.r, sched.r);
        let report: BoundReport = match args.case {
            CaseArg::Det => {
                let pc = fixed.as_ref().expect("built above");
                let c = if sweep { sched.c } else { args.c.unwrap_or(pc.disc_radius.max(r)) };
                let trunc = match args.truncation {
                    TruncArg::Exact => TruncationMode::Exact,
                    TruncArg::AssertNone => TruncationMode::AssertNone,
                    TruncArg::Surrogate => TruncationMode::Surrogate,
                };
                let inp = DetInputs::from_config(&params, &model, pc, args.t, r, c, trunc)?;
                match args.metric {
                    MetricArg::D2 => d2_bound_det(&inp)?,
                    MetricArg::Tv => dtv_bound_det(&inp)?,
                }
            }
            CaseArg::Poisson => {
                let mut s = sched;
                s.r = r;
                s.c = pick(args.c, sched.c);
                s.d = Some(pick(args.d, sched.d.expect("set")));
                d2_bound_poisson(&PoissonInputs::from_schedule(&params, &model, args.t, &s)?)?
            }
            CaseArg::Hardcore => {
                let inp = HardCoreInputs {
                    params,
                    model,
                    t: args.t,
                    r,
                    c: pick(args.c, sched.c),
                    d: pick(args.d, sched.d.expect("set")),
                    eps_star: cfg.placement.hard_core.expect("checked"),
                };
                let mode = match args.gamma_plus {
                    Some(g) => MeanDeviationMode::UserGamma { gamma_plus: g },
                    None => MeanDeviationMode::MonteCarlo { n_rep: args.mc_reps, seed: cfg.seed },
                };
                d2_bound_hardcore(&inp, mode)?
            }
        };
        all_valid &= report.is_valid();
        if sweep {
            text += &format!("# sigma = {sigma}\n");
        }
        text += &report.to_text();
        if let Some(out) = &common.out {
            let kv = report.to_key_value();
            let path = if sweep { out.with_extension(format!("sigma{sigma}.toml")) } else { out.clone() };
            std::fs::write(path, kv).map_err(Error::from)?;
        }
    }
    print!("{text}");
    if all_valid {
        Ok(())
    } else {
        Err(Failure::Invalid("bound preconditions failed; report marked invalid".into()))
    }
}
