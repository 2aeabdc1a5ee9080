//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use signal_spectrum::bounds::*;
use signal_spectrum::corrfuncs::{corr_matrix, min_eigenvalue, upd_delta, upd_ln_delta, CorrelationModel};
use signal_spectrum::gfield::CholeskyField;
use signal_spectrum::harness::{expected_counts, records_csv, run_experiment, ExperimentConfig, ExperimentResult};
use signal_spectrum::metrics::*;
use signal_spectrum::placement::*;
use signal_spectrum::point::Point;
use signal_spectrum::special::q;
use signal_spectrum::spectrum::{counts_from_field, mean_measure_det, mills_bounds, pathloss, PropagationParams};
use statrs::distribution::{Discrete, Poisson};
use std::f64::consts::{LN_10, PI};
use std::time::Instant;

const K: f64 = 4000.0;
const BETA: f64 = 3.6;
const KAPPA: f64 = 5.0;
/// Target expected counts for the mean-matched thresholds.
const MATCHED_MEANS: [f64; 3] = [0.35, 1.27, 4.56];

/// Threshold whose limiting mean measure `κπt^{2/β}/K²` equals `m`.
fn matched_threshold(m: f64) -> f64 {
    (m * K * K / (KAPPA * PI)).powf(BETA / 2.0)
}

fn thresholds() -> Vec<f64> {
    MATCHED_MEANS.iter().map(|&m| matched_threshold(m)).collect()
}

struct Setup<'a> {
    seed: u64,
    n_reps: usize,
    placement: &'a str,
    disc_radius: f64,
    correlation: String,
    sampler: &'a str,
}

impl Setup<'_> {
    fn config(&self) -> ExperimentConfig {
        let t: Vec<String> = thresholds().iter().map(|t| format!("{t:e}")).collect();
        let text = format!(
            "seed = {}\nn_reps = {}\nsampler = \"{}\"\nspectral_features = 64\n\n\
             [placement]\n{}\nkappa = {KAPPA}\ndisc_radius = {}\n\n\
             [propagation]\nk = {K}\nbeta = {BETA}\n\n\
             [shadowing]\nsigma = {LN_10}\n\n\
             [correlation]\n{}\n\n\
             [thresholds]\nvalues = [{}]\n",
            self.seed,
            self.n_reps,
            self.sampler,
            self.placement,
            self.disc_radius,
            self.correlation,
            t.join(", ")
        );
        ExperimentConfig::from_toml_str(&text).expect("acceptance config is valid")
    }
}

fn exponential(s: f64) -> String {
    format!("kind = \"exponential\"\nscale = {s}")
}

fn stats(res: &ExperimentResult, j: usize) -> &CountStats {
    res.stats[j].as_ref().expect("at least two replications")
}

type Outcome = (bool, String);

fn exact_poisson_baseline() -> Outcome {
    let cfg = Setup {
        seed: 101,
        n_reps: 10_000,
        placement: "kind = \"poisson\"",
        disc_radius: 10.0,
        correlation: "kind = \"nugget\"".into(),
        sampler: "exact_cholesky",
    }
    .config();
    let res = run_experiment(&cfg).unwrap();
    let se = dispersion_se_poisson(cfg.n_reps);
    let mut ok = true;
    let mut notes = Vec::new();
    for j in 0..res.thresholds.len() {
        let s = stats(&res, j);
        let chi = chi_square_poisson(s, res.mean_measure[j]).unwrap();
        let disp = dispersion(s).unwrap();
        ok &= chi.p_value > 0.01 && (disp - 1.0).abs() < 5.0 * se;
        notes.push(format!("m={:.2} p={:.3} disp={disp:.3}", res.mean_measure[j], chi.p_value));
    }
    (ok, notes.join("; "))
}

fn mean_measure_consistency() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let placements = [
        ("kind = \"hex_grid\"", "exact_cholesky"),
        ("kind = \"poisson\"", "spectral"),
        ("kind = \"hard_core_matern2\"\nhard_core = 0.1", "spectral"),
    ];
    let mut seed = 200;
    for (placement, sampler) in placements {
        for s in [0.1, 0.5] {
            seed += 1;
            let cfg = Setup { seed, n_reps: 10_000, placement, disc_radius: 10.0, correlation: exponential(s), sampler }
                .config();
            let res = run_experiment(&cfg).unwrap();
            let expected = expected_counts(&cfg).unwrap();
            for (j, m) in expected.iter().enumerate() {
                let st = stats(&res, j);
                let z = (st.mean - m).abs() / st.mean_se();
                worst = worst.max(z);
                if z >= 3.0 {
                    ok = false;
                    eprintln!("  criterion 2: {placement:?} s={s} M={m:.4} mean={:.4} z={z:.2}", st.mean);
                }
            }
        }
    }
    (ok, format!("18 checks, largest |mean − M|/SE = {worst:.2}"))
}

/// Criterion 3 runs; the Poisson s = 0.5 run also feeds criterion 4.
struct DesktopRuns {
    poisson: Vec<(f64, ExperimentResult)>,
    hex: Vec<(f64, ExperimentResult)>,
}

fn desk_scale_runs() -> DesktopRuns {
    let run = |placement: &str, s: f64, seed: u64| {
        let cfg = Setup {
            seed,
            n_reps: 10_000,
            placement,
            disc_radius: 4.0,
            correlation: exponential(s),
            sampler: "exact_cholesky",
        }
        .config();
        (s, run_experiment(&cfg).unwrap())
    };
    DesktopRuns {
        poisson: [0.1, 0.2, 0.5].iter().zip(301..).map(|(&s, seed)| run("kind = \"poisson\"", s, seed)).collect(),
        hex: [0.1, 0.2].iter().zip(311..).map(|(&s, seed)| run("kind = \"hex_grid\"", s, seed)).collect(),
    }
}

fn dispersion_trends(runs: &DesktopRuns) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (j, m) in MATCHED_MEANS.iter().enumerate() {
        let disp: Vec<f64> = runs.poisson.iter().map(|(_, r)| dispersion(stats(r, j)).unwrap()).collect();
        ok &= disp.windows(2).all(|w| w[1] > w[0]);
        let mut line = format!("m={m}: poisson var/mean {:.2} {:.2} {:.2}", disp[0], disp[1], disp[2]);
        for ((s, hex), (_, poi)) in runs.hex.iter().zip(&runs.poisson) {
            let (vh, vp) = (stats(hex, j).variance, stats(poi, j).variance);
            ok &= vh < vp;
            line += &format!(", s={s} var hex {vh:.2} < poisson {vp:.2}");
        }
        notes.push(line);
    }
    (ok, notes.join("; "))
}

fn pp_flipped_s(runs: &DesktopRuns) -> Outcome {
    let (s, res) = runs.poisson.last().unwrap();
    let j = MATCHED_MEANS.len() - 1;
    let m = res.mean_measure[j];
    let shape = pp_shape(&pp_points(stats(res, j), m).unwrap(), m);
    (
        shape.is_flipped_s(0.8),
        format!(
            "s={s} M={m:.2}: {:.0}% of {} low-k points above, {:.0}% of {} high-k points below",
            100.0 * shape.low_excess,
            shape.n_low,
            100.0 * shape.high_deficit,
            shape.n_high
        ),
    )
}

fn separated_points(rng: &mut ChaCha12Rng, n: usize, eps: f64) -> Vec<Point> {
    let side = eps * (n as f64).sqrt() * 2.0;
    let mut pts: Vec<Point> = Vec::new();
    let mut tries = 0;
    while pts.len() < n && tries < 100_000 {
        tries += 1;
        let p = Point::new(rng.random::<f64>() * side + 0.01, rng.random::<f64>() * side + 0.01);
        if pts.iter().all(|q| q.dist(p) >= eps) {
            pts.push(p);
        }
    }
    pts
}

fn eigenvalue_domination() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(501);
    let models = [
        CorrelationModel::matern(0.2, 0.5),
        CorrelationModel::matern(0.2, 1.5),
        CorrelationModel::squared_exponential(0.2),
    ];
    let mut violations = 0;
    let mut checked = 0;
    for m in &models {
        for k in 0..120 {
            let eps = [0.05, 0.1, 0.2][k % 3];
            let n = rng.random_range(2..=60);
            let pts = separated_points(&mut rng, n, eps);
            let lam = min_eigenvalue(&corr_matrix(m, &pts).unwrap());
            let delta = upd_delta(m, eps).unwrap();
            let ln_delta = upd_ln_delta(m, eps).unwrap();
            if lam < delta || !ln_delta.is_finite() {
                violations += 1;
            }
            checked += 1;
        }
    }
    (violations == 0, format!("{checked} configurations, {violations} violations"))
}

/// `P(X ≥ s)` summed upward from the pmf.
fn upper_tail(pois: &Poisson, s: f64) -> f64 {
    let k0 = s.ceil() as u64;
    (k0..k0 + 1000).map(|k| pois.pmf(k)).sum()
}

fn lemma_oracles() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(601);
    let mut violations = [0usize; 5];

    // (a) quadratic form
    let models = [CorrelationModel::exponential(0.2), CorrelationModel::matern(0.15, 1.5)];
    for k in 0..100 {
        let model = models[k % 2];
        let eps = [0.1, 0.2][k % 2];
        let big_r: f64 = rng.random_range(0.2..1.0);
        let x0 = Point::new(5.0, 5.0);
        let mut pts = vec![x0];
        for _ in 0..4000 {
            if pts.len() >= 60 {
                break;
            }
            let p = Point::new(rng.random_range(2.0..8.0), rng.random_range(2.0..8.0));
            if p.dist(x0) > big_r && pts.iter().all(|q| q.dist(p) >= eps) {
                pts.push(p);
            }
        }
        let g = geometry_stats(&explicit(pts.clone(), None).unwrap(), big_r).unwrap();
        let bound = gamma_quadform_bound(upd_delta(&model, eps).unwrap(), g.t_upper as f64, &model, big_r).unwrap();
        if gamma_quadform_exact(&model, x0, &pts[1..]).unwrap() > bound {
            violations[0] += 1;
        }
    }

    // (b) normal total variation
    for i in 0..20 {
        for j in 0..20 {
            let m = -3.0 + 6.0 * i as f64 / 19.0;
            let s = 0.2 + 2.8 * j as f64 / 19.0;
            if dtv_normal_exact(m, s).unwrap() > dtv_normal_bound(m, s).unwrap().min(1.0) + 1e-12 {
                violations[1] += 1;
            }
        }
    }

    // (c) Mills ratio sandwich
    for i in 0..50 {
        let r = 0.01 + (8.0 - 0.01) * i as f64 / 49.0;
        let (lo, hi) = mills_bounds(r).unwrap();
        let v = q(r) * (2.0 * PI).sqrt() * (0.5 * r * r).exp();
        if !(lo <= v && v <= hi) {
            violations[2] += 1;
        }
    }

    // (d) Chernoff tail
    for mu in [1.0, 5.0, 20.0] {
        let pois = Poisson::new(mu).unwrap();
        for ratio in [1.5, 2.0, 4.0] {
            let s = mu * ratio;
            if poisson_chernoff(mu, s).unwrap() < upper_tail(&pois, s) {
                violations[3] += 1;
            }
        }
    }

    // (e) annulus counts
    let big_r = 0.4;
    for k in 0..150 {
        let cfg = match k % 3 {
            0 => gen_poisson(4.0, 3.0, &mut rng).unwrap(),
            1 => gen_hardcore_matern2(8.0, 0.2, 3.0, &mut rng).unwrap(),
            _ => gen_hex_grid(rng.random_range(1.0..10.0), 3.0).unwrap(),
        };
        if cfg.is_empty() {
            continue;
        }
        let g = geometry_stats(&cfg, big_r).unwrap();
        let centre = cfg.points[rng.random_range(0..cfg.len())];
        let a = annulus_counts(&cfg, centre, big_r).unwrap();
        for (i, &n) in a.annuli.iter().enumerate() {
            if n as f64 > (4.0 * PI * (i + 1) as f64).ceil() * g.t_upper as f64 {
                violations[4] += 1;
            }
        }
    }

    let total: usize = violations.iter().sum();
    (total == 0, format!("violations (a)–(e): {violations:?}"))
}

/// All permutations of `0..n`, via Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            go(k - 1, p, out);
            let j = if k % 2 == 0 { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    go(n, &mut (0..n).collect(), &mut out);
    out
}

/// Exact rational minimum over all permutations, rounded once.
fn brute_ospa(psi: &[f64], upsilon: &[f64]) -> f64 {
    let n = psi.len().max(upsilon.len());
    if n == 0 {
        return 0.0;
    }
    let one = BigRational::one();
    let exact = |v: f64| BigRational::from_float(v).unwrap();
    let cost = |i: usize, j: usize| match (psi.get(i), upsilon.get(j)) {
        (Some(&x), Some(&y)) => (exact(x) - exact(y)).abs().min(one.clone()),
        _ => one.clone(),
    };
    let best = permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().fold(BigRational::zero(), |acc, (i, &j)| acc + cost(i, j)))
        .min()
        .unwrap();
    (best.to_f64().unwrap() / n as f64).clamp(0.0, 1.0)
}

fn ospa_correctness() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(701);
    let t = 1.0;
    let draw = |rng: &mut ChaCha12Rng| -> Vec<f64> {
        let n = rng.random_range(0..=6);
        (0..n).map(|_| rng.random::<f64>() * t).collect()
    };
    let mut mismatches = 0;
    for _ in 0..500 {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        if ospa(&a, &b) != brute_ospa(&a, &b) {
            mismatches += 1;
        }
    }
    let mut axiom_failures = 0;
    for _ in 0..200 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (ab, ba, bc, ac) = (ospa(&a, &b), ospa(&b, &a), ospa(&b, &c), ospa(&a, &c));
        let ok = ospa(&a, &a) == 0.0
            && ab == ba
            && (0.0..=1.0).contains(&ab)
            && ac <= ab + bc + 1e-12
            && (ab > 0.0 || a.len() == b.len());
        if !ok {
            axiom_failures += 1;
        }
    }
    (
        mismatches == 0 && axiom_failures == 0,
        format!("{mismatches} brute-force mismatches in 500 pairs, {axiom_failures} axiom failures in 200 triples"),
    )
}

fn unit_grid(n: usize) -> PointConfig {
    let off = (n as f64 - 1.0) / 2.0;
    let pts = (0..n)
        .flat_map(|i| (0..n).map(move |j| Point::new(i as f64 - off, j as f64 - off)))
        .collect();
    explicit(pts, None).unwrap()
}

fn bound_convergence() -> Outcome {
    let cfg = unit_grid(10);
    let model = CorrelationModel::exponential(0.2);
    let sigmas = [8.0, 12.0, 16.0, 24.0, 32.0, 40.0];
    let totals: Vec<Option<f64>> = sigmas
        .iter()
        .map(|&sigma| {
            let p = PropagationParams::new(1.0, 4.0, sigma, 1.0).unwrap();
            let s = convergence_schedule(sigma, 2.0, &p, &model, ScheduleCase::DeterministicD2).unwrap();
            let c = s.c.max(cfg.disc_radius).max(s.r);
            let inp = DetInputs::from_config(&p, &model, &cfg, 1.0, s.r, c, TruncationMode::AssertNone).unwrap();
            d2_bound_det(&inp).unwrap().total
        })
        .collect();
    let text = totals
        .iter()
        .map(|t| t.map_or("invalid".to_string(), |v| format!("{v:.3e}")))
        .collect::<Vec<_>>()
        .join(" ");
    let Some(first) = totals.iter().position(Option::is_some) else {
        return (false, "no valid point".into());
    };
    let after = &totals[first..];
    let monotone = after.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
    let last = totals.last().unwrap().unwrap_or(f64::INFINITY);
    (monotone && last < 1e-2, format!("totals over σ {sigmas:?}: {text}"))
}

fn bound_validity() -> Outcome {
    // (grid side, s, σ, t)
    let settings = [
        (6, 0.1, 2.0, 0.003),
        (6, 0.2, 3.0, 0.001),
        (10, 0.1, 4.0, 1e-4),
        (4, 0.2, 6.0, 1e-3),
        (6, 0.1, 4.0, 1e-4),
    ];
    let big_r = 4.0;
    let n_reps = 20_000;
    let mut rng = ChaCha12Rng::seed_from_u64(901);
    let mut ok = true;
    let mut checked = 0;
    let mut notes = Vec::new();
    for (side, s, sigma, t) in settings {
        let cfg = unit_grid(side);
        let model = CorrelationModel::exponential(s);
        let p = PropagationParams::new(1.0, 4.0, sigma, 1.0).unwrap();
        let c = cfg.disc_radius.max(big_r);
        let inp = DetInputs::from_config(&p, &model, &cfg, t, big_r, c, TruncationMode::AssertNone).unwrap();
        let report = dtv_bound_det(&inp).unwrap();
        let Some(total) = report.total.filter(|&b| b < 1.0) else {
            notes.push(format!("n={side} s={s} σ={sigma}: bound not informative"));
            continue;
        };
        let log_g: Vec<f64> = cfg.points.iter().map(|&x| pathloss(&p, x).unwrap().ln()).collect();
        let field = CholeskyField::new(&model, &cfg.points).unwrap();
        let mut out = Vec::new();
        let counts: Vec<usize> = (0..n_reps)
            .map(|_| {
                counts_from_field(&log_g, &field.sample(&mut rng), sigma, 4.0, &[t], &mut out);
                out[0]
            })
            .collect();
        let st = count_stats(&counts).unwrap();
        let m = mean_measure_det(&p, &cfg.points, t);
        let d = dtv_counts(&st, m).unwrap();
        let se = dtv_counts_bootstrap_se(&st, m, 200, &mut rng).unwrap();
        ok &= d + 3.0 * se <= total;
        checked += 1;
        notes.push(format!("n={side} s={s} σ={sigma}: {d:.4} + 3·{se:.4} ≤ {total:.4}"));
    }
    (ok && checked >= 3, format!("{checked} informative settings; {}", notes.join("; ")))
}

fn determinism() -> Outcome {
    let setups = [
        ("kind = \"hex_grid\"", exponential(0.2)),
        ("kind = \"poisson\"", exponential(0.5)),
        ("kind = \"hard_core_matern2\"\nhard_core = 0.1", exponential(0.1)),
    ];
    let mut ok = true;
    for (placement, correlation) in setups {
        let mut cfg =
            Setup { seed: 1001, n_reps: 500, placement, disc_radius: 3.0, correlation, sampler: "exact_cholesky" }
                .config();
        cfg.workers = Some(1);
        let one = records_csv(&run_experiment(&cfg).unwrap());
        cfg.workers = Some(8);
        let eight = records_csv(&run_experiment(&cfg).unwrap());
        let again = records_csv(&run_experiment(&cfg).unwrap());
        ok &= one == eight && eight == again;
    }
    (ok, "hex, Poisson and Matérn II records across workers {1, 8} and a repeat run".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let (ok, detail) = f();
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {n:>2} {name} [{:.1}s] {detail}", start.elapsed().as_secs_f64());
        if !ok {
            failed += 1;
        }
    };
    report(1, "exact Poisson baseline", &mut exact_poisson_baseline);
    report(2, "mean-measure consistency", &mut mean_measure_consistency);
    let runs = desk_scale_runs();
    report(3, "dispersion trends", &mut || dispersion_trends(&runs));
    report(4, "P-P flipped S", &mut || pp_flipped_s(&runs));
    report(5, "eigenvalue domination", &mut eigenvalue_domination);
    report(6, "lemma oracles", &mut lemma_oracles);
    report(7, "OSPA correctness", &mut ospa_correctness);
    report(8, "bound convergence", &mut bound_convergence);
    report(9, "bound validity vs simulation", &mut bound_validity);
    report(10, "determinism", &mut determinism);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
