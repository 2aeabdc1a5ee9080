use super::config::ExperimentConfig;
use super::run::ExperimentResult;
use crate::bounds::toml_float;
use crate::error::{Error, Result};
use crate::metrics::{chi_square_poisson, dispersion, dtv_counts};
use crate::spectrum::dbm_from_threshold;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// `rep,threshold,count` with one row per replication and threshold.
pub fn records_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("rep,threshold,count\n");
    for (r, rep) in result.replications.iter().enumerate() {
        for (t, c) in result.thresholds.iter().zip(&rep.counts) {
            let _ = writeln!(s, "{r},{t:e},{c}");
        }
    }
    s
}

/// Parses a records file back into `(threshold, counts by replication)` pairs.
pub fn parse_records_csv(text: &str) -> Result<Vec<(f64, Vec<usize>)>> {
    let mut out: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 {
            if line != "rep,threshold,count" {
                return Err(Error::Parse { line: 1, reason: "expected header `rep,threshold,count`".into() });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Parse { line: i + 1, reason: reason.to_string() };
        let mut it = line.split(',');
        let rep: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad rep"))?;
        let t: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad threshold"))?;
        let c: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad count"))?;
        if it.next().is_some() {
            return Err(bad("too many fields"));
        }
        match out.iter_mut().find(|e| e.0 == t) {
            Some(e) => e.1.push((rep, c)),
            None => out.push((t, vec![(rep, c)])),
        }
    }
    Ok(out
        .into_iter()
        .map(|(t, mut v)| {
            v.sort_unstable();
            (t, v.into_iter().map(|x| x.1).collect())
        })
        .collect())
}

/// Key-value summary: run metadata followed by one `[[threshold]]` table per threshold.
pub fn summary_text(cfg: &ExperimentConfig, result: &ExperimentResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed = {}", result.seed);
    let _ = writeln!(s, "n_reps = {}", result.replications.len());
    let _ = writeln!(s, "workers = {}", result.workers);
    let _ = writeln!(s, "wall_time_s = {}", toml_float(result.wall_time_s));
    if let Some(k) = result.target_intensity {
        let _ = writeln!(s, "target_intensity = {}", toml_float(k));
    }
    let _ = writeln!(s, "mean_realized_intensity = {}", toml_float(result.mean_realized_intensity));
    let _ = writeln!(s, "ridge_events = {}", result.ridge_events);
    let _ = writeln!(s, "max_ridge = {}", toml_float(result.max_ridge));
    if !result.notices.is_empty() {
        let quoted: Vec<String> = result.notices.iter().map(|n| format!("{n:?}")).collect();
        let _ = writeln!(s, "notices = [{}]", quoted.join(", "));
    }
    for (j, &t) in result.thresholds.iter().enumerate() {
        let _ = writeln!(s, "\n[[threshold]]");
        let _ = writeln!(s, "t = {}", toml_float(t));
        if let Some(p) = cfg.thresholds.power_mw {
            let _ = writeln!(s, "dbm = {}", toml_float(dbm_from_threshold(t, p)));
        }
        let m = result.mean_measure[j];
        let _ = writeln!(s, "mean_measure = {}", toml_float(m));
        if let Some(st) = &result.stats[j] {
            let _ = writeln!(s, "mean = {}", toml_float(st.mean));
            let _ = writeln!(s, "mean_se = {}", toml_float(st.mean_se()));
            let _ = writeln!(s, "variance = {}", toml_float(st.variance));
            if let Ok(d) = dispersion(st) {
                let _ = writeln!(s, "dispersion = {}", toml_float(d));
            }
            if m > 0.0 {
                if let Ok(d) = dtv_counts(st, m) {
                    let _ = writeln!(s, "dtv_counts = {}", toml_float(d));
                }
                if let Ok(c) = chi_square_poisson(st, m) {
                    let _ = writeln!(s, "chi_square = {}", toml_float(c.statistic));
                    let _ = writeln!(s, "chi_square_dof = {}", c.dof);
                    let _ = writeln!(s, "chi_square_p = {}", toml_float(c.p_value));
                }
            }
        }
    }
    s
}

/// Writes `<prefix>.csv` and `<prefix>.summary.toml`; returns both paths.
pub fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = with_suffix(prefix, ".csv");
    let summary = with_suffix(prefix, ".summary.toml");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&csv, records_csv(result))?;
    std::fs::write(&summary, summary_text(cfg, result))?;
    Ok((csv, summary))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
