//! Distances and diagnostics: OSPA between spectrum configurations, count
//! statistics, P-P data and count-distribution total variation.

use crate::error::{param, Error, Result};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};
use std::fmt::Write as _;

/// Optimal assignment for a square cost matrix given row-major.
/// Returns `assignment[row] = column` and the minimal total cost.
pub fn hungarian(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // potentials over 1-based indices, column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut col_row = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[col_row[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    (assignment, total)
}

/// OSPA distance with order 1 and cutoff 1 between two finite sets of reals.
///
/// Unpaired points cost 1, as does any pair at least 1 apart.
/// Two empty sets are at distance 0.
///
/// The optimal total is evaluated exactly from the input values and rounded
/// once, so tied optimal assignments, which are common on the line, give the
/// same bits and the distance is exactly symmetric.
pub fn ospa(psi: &[f64], upsilon: &[f64]) -> f64 {
    let n = psi.len().max(upsilon.len());
    if n == 0 {
        return 0.0;
    }
    // dummy rows and columns cost exactly the cutoff
    let mut cost = vec![1.0; n * n];
    for (i, x) in psi.iter().enumerate() {
        for (j, y) in upsilon.iter().enumerate() {
            cost[i * n + j] = (x - y).abs().min(1.0);
        }
    }
    let (assign, _) = hungarian(&cost, n);
    let mut terms = Vec::with_capacity(2 * n);
    for (i, &j) in assign.iter().enumerate() {
        match (psi.get(i), upsilon.get(j)) {
            (Some(&x), Some(&y)) if !at_least_one_apart(x, y) => {
                let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
                terms.push(hi);
                terms.push(-lo);
            }
            _ => terms.push(1.0),
        }
    }
    (exact_sum(&terms) / n as f64).clamp(0.0, 1.0)
}

/// Exact test of `|x − y| ≥ 1`.
fn at_least_one_apart(x: f64, y: f64) -> bool {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let d = hi - lo;
    // rounding error of the subtraction (two-sum)
    let v = d - hi;
    let err = (hi - (d - v)) + (-lo - v);
    d > 1.0 || (d == 1.0 && err >= 0.0)
}

/// Correctly rounded sum, kept as non-overlapping partials (Shewchuk).
fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // round half-way cases using the sign of the remaining partials
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Checks that every value lies in `[0, t]`.
pub fn check_window(values: &[f64], t: f64) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= t)) {
        return Err(param("configuration", format!("value {v} lies outside [0, {t}]")));
    }
    Ok(())
}

/// Summary of integer counts over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct CountStats {
    pub n_reps: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Empirical frequency of each count `0..=max`.
    pub pmf: Vec<f64>,
    pub threshold: Option<f64>,
}

pub fn count_stats(samples: &[usize]) -> Result<CountStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientReplications { required: 2, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&k| k as f64).sum::<f64>() / n;
    let variance = samples.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let max = *samples.iter().max().expect("non-empty");
    let mut hist = vec![0usize; max + 1];
    for &k in samples {
        hist[k] += 1;
    }
    let pmf = hist.iter().map(|&c| c as f64 / n).collect();
    Ok(CountStats { n_reps: samples.len(), mean, variance, pmf, threshold: None })
}

impl CountStats {
    pub fn with_threshold(mut self, t: f64) -> Self {
        self.threshold = Some(t);
        self
    }

    /// Standard error of the sample mean.
    pub fn mean_se(&self) -> f64 {
        (self.variance / self.n_reps as f64).sqrt()
    }

    /// Header `n_reps,mean,variance`, one row, then `k,pmf` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_reps,mean,variance\n");
        let _ = writeln!(s, "{},{},{}", self.n_reps, self.mean, self.variance);
        s.push_str("k,pmf\n");
        for (k, p) in self.pmf.iter().enumerate() {
            let _ = writeln!(s, "{k},{p}");
        }
        s
    }
}

fn poisson(mu: f64) -> Result<Poisson> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(param("poisson_mean", format!("must be positive, got {mu}")));
    }
    Poisson::new(mu).map_err(|e| param("poisson_mean", e.to_string()))
}

/// A point of a P-P plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpPoint {
    pub k: usize,
    pub ecdf: f64,
    pub pcdf: f64,
}

/// `(F̂(k), F_Po(k))` for every `k` carrying empirical mass, ascending in `k`.
pub fn pp_points(stats: &CountStats, poisson_mean: f64) -> Result<Vec<PpPoint>> {
    let po = poisson(poisson_mean)?;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for (k, &p) in stats.pmf.iter().enumerate() {
        acc += p;
        if p > 0.0 {
            out.push(PpPoint { k, ecdf: acc.min(1.0), pcdf: po.cdf(k as u64) });
        }
    }
    Ok(out)
}

pub fn pp_points_csv(points: &[PpPoint]) -> String {
    let mut s = String::from("k,ecdf,pcdf\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.k, p.ecdf, p.pcdf);
    }
    s
}

/// Shape of a P-P plot relative to the diagonal, split at the Poisson mean.
///
/// Overdispersion puts extra mass at both small and large counts, so the
/// empirical CDF exceeds the Poisson CDF for small `k` and falls short of it
/// for large `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpShape {
    /// Points with `k ≤ μ − 1`.
    pub n_low: usize,
    /// Fraction of those with `F̂ > F_Po`.
    pub low_excess: f64,
    /// Points with `k ≥ μ + 1`.
    pub n_high: usize,
    /// Fraction of those with `F̂ < F_Po`.
    pub high_deficit: f64,
}

impl PpShape {
    /// Both fractions at least `frac`.
    pub fn is_flipped_s(&self, frac: f64) -> bool {
        self.n_low > 0 && self.n_high > 0 && self.low_excess >= frac && self.high_deficit >= frac
    }
}

pub fn pp_shape(points: &[PpPoint], poisson_mean: f64) -> PpShape {
    let low: Vec<_> = points.iter().filter(|p| p.k as f64 <= poisson_mean - 1.0).collect();
    let high: Vec<_> = points.iter().filter(|p| p.k as f64 >= poisson_mean + 1.0).collect();
    let frac = |v: &[&PpPoint], f: fn(&PpPoint) -> bool| {
        if v.is_empty() { 0.0 } else { v.iter().filter(|p| f(p)).count() as f64 / v.len() as f64 }
    };
    PpShape {
        n_low: low.len(),
        low_excess: frac(&low, |p| p.ecdf > p.pcdf),
        n_high: high.len(),
        high_deficit: frac(&high, |p| p.ecdf < p.pcdf),
    }
}

/// `½ Σ_k |p̂_k − Po(μ)_k|`, with the Poisson mass beyond the largest observed count.
pub fn dtv_counts(stats: &CountStats, poisson_mean: f64) -> Result<f64> {
    let po = poisson(poisson_mean)?;
    let body: f64 = stats.pmf.iter().enumerate().map(|(k, &p)| (p - po.pmf(k as u64)).abs()).sum();
    let kmax = stats.pmf.len().saturating_sub(1) as u64;
    let tail = if stats.pmf.is_empty() { 1.0 } else { po.sf(kmax) };
    Ok((0.5 * (body + tail)).min(1.0))
}

/// Bootstrap standard error of [`dtv_counts`], resampling the empirical pmf.
pub fn dtv_counts_bootstrap_se<R: Rng + ?Sized>(
    stats: &CountStats,
    poisson_mean: f64,
    n_boot: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_boot < 2 {
        return Err(Error::InsufficientReplications { required: 2, got: n_boot });
    }
    let w = WeightedIndex::new(&stats.pmf).map_err(|e| param("pmf", e.to_string()))?;
    let mut vals = Vec::with_capacity(n_boot);
    let mut draw = vec![0usize; stats.n_reps];
    for _ in 0..n_boot {
        draw.iter_mut().for_each(|k| *k = w.sample(rng));
        vals.push(dtv_counts(&count_stats(&draw)?, poisson_mean)?);
    }
    let m = vals.iter().sum::<f64>() / n_boot as f64;
    let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n_boot as f64 - 1.0);
    Ok(v.sqrt())
}

/// Variance over mean.
pub fn dispersion(stats: &CountStats) -> Result<f64> {
    if !(stats.mean > 0.0) {
        return Err(param("mean", "dispersion needs a positive mean"));
    }
    Ok(stats.variance / stats.mean)
}

/// Standard error of the dispersion index under Poisson sampling, `√(2/(n−1))`.
pub fn dispersion_se_poisson(n_reps: usize) -> f64 {
    (2.0 / (n_reps as f64 - 1.0)).sqrt()
}

/// Pearson chi-square goodness of fit against `Po(μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Adjacent counts are pooled until each cell expects at least 5; the last
/// cell collects the whole upper tail. Degrees of freedom are `cells − 1`.
pub fn chi_square_poisson(stats: &CountStats, poisson_mean: f64) -> Result<ChiSquareTest> {
    let po = poisson(poisson_mean)?;
    let n = stats.n_reps as f64;
    // single counts up to `cap`, then the open tail
    let mut cap = stats.pmf.len();
    while n * po.sf(cap as u64) >= 5.0 {
        cap += 1;
    }
    let mut raw: Vec<(f64, f64)> = (0..cap)
        .map(|k| (stats.pmf.get(k).copied().unwrap_or(0.0) * n, po.pmf(k as u64) * n))
        .collect();
    raw.push((0.0, n * po.sf(cap as u64 - 1)));
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (o, e) in raw {
        obs += o;
        exp += e;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => cells.push((obs, exp)),
    }
    if cells.len() < 2 {
        return Err(Error::Infeasible("too few cells with expected count 5 for a chi-square test".into()));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| param("dof", e.to_string()))?;
    Ok(ChiSquareTest { statistic, dof, p_value: chi.sf(statistic) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_small() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (a, total) = hungarian(&c, 3);
        assert_eq!(total, 5.0);
        assert_eq!(a, vec![1, 0, 2]);
    }

    #[test]
    fn ospa_examples() {
        assert_eq!(ospa(&[0.4], &[0.4]), 0.0);
        assert_eq!(ospa(&[0.2], &[0.2, 0.9]), 0.5);
        assert_eq!(ospa(&[], &[]), 0.0);
        assert_eq!(ospa(&[], &[0.3]), 1.0);
    }

    #[test]
    fn count_stats_two_point() {
        let s = count_stats(&[0, 2]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 2.0);
        assert!(count_stats(&[1]).is_err());
    }

    #[test]
    fn dtv_point_mass() {
        let s = count_stats(&[0, 0]).unwrap();
        let d = dtv_counts(&s, std::f64::consts::LN_2).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }
}
