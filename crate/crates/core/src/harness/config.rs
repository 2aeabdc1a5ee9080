use crate::corrfuncs::{CorrelationKind, CorrelationModel};
use crate::error::{Error, Result};
use crate::gfield::{sigma_from_db, SamplerKind, DEFAULT_SPECTRAL_FEATURES};
use crate::placement::PlacementKind;
use crate::spectrum::{dbm_from_threshold, PropagationParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// A Monte Carlo experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_reps: usize,
    #[serde(default)]
    pub sampler: SamplerKind,
    #[serde(default = "default_features")]
    pub spectral_features: usize,
    /// Worker threads; all available cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Prefix of the output files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub placement: PlacementSection,
    pub propagation: PropagationSection,
    pub shadowing: ShadowingSection,
    pub correlation: CorrelationSection,
    pub thresholds: ThresholdSection,
}

fn default_features() -> usize {
    DEFAULT_SPECTRAL_FEATURES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    pub kind: PlacementKind,
    /// Intensity in km⁻²; for Matérn II this is the retained intensity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Disc radius `C` in km.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_core: Option<f64>,
    /// Point file for explicit configurations, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub k: f64,
    pub beta: f64,
}

/// Exactly one of `sigma` (natural log scale) and `sigma_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    pub kind: CorrelationKind,
    #[serde(default)]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
}

/// Thresholds in normalized units. `power_mw` only annotates output with dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_mw: Option<f64>,
}

fn field(name: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: name.to_string(), reason: reason.into() }
}

fn positive(name: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(field(name, format!("must be positive and finite, got {x}"))),
        None => Err(field(name, "missing")),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse { line, reason: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative point files are resolved against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(pf), Some(dir)) = (&cfg.placement.points_file, path.parent()) {
            if pf.is_relative() {
                cfg.placement.points_file = Some(dir.join(pf));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(field("n_reps", "must be at least 1"));
        }
        if self.spectral_features == 0 {
            return Err(field("spectral_features", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(field("workers", "must be positive"));
        }
        let p = &self.placement;
        match p.kind {
            PlacementKind::Explicit => {
                if p.points_file.is_none() {
                    return Err(field("placement.points_file", "required for explicit placements"));
                }
                if let Some(c) = p.disc_radius {
                    positive("placement.disc_radius", Some(c))?;
                }
            }
            kind => {
                let kappa = positive("placement.kappa", p.kappa)?;
                positive("placement.disc_radius", p.disc_radius)?;
                if kind == PlacementKind::HardCoreMatern2 {
                    let eps = positive("placement.hard_core", p.hard_core)?;
                    crate::placement::matern2_parent_intensity(kappa, eps)
                        .map_err(|e| field("placement.hard_core", e.to_string()))?;
                }
            }
        }
        self.params().map_err(|e| field("propagation", e.to_string()))?;
        self.model().validate().map_err(|e| field("correlation", e.to_string()))?;
        let t = &self.thresholds.values;
        if t.is_empty() {
            return Err(field("thresholds.values", "at least one threshold is required"));
        }
        if t.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(field("thresholds.values", "thresholds must be positive"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field("thresholds.values", "thresholds must be strictly ascending"));
        }
        if let Some(pw) = self.thresholds.power_mw {
            positive("thresholds.power_mw", Some(pw))?;
        }
        Ok(())
    }

    pub fn sigma(&self) -> Result<f64> {
        match (self.shadowing.sigma, self.shadowing.sigma_db) {
            (Some(s), None) => Ok(s),
            (None, Some(db)) => Ok(sigma_from_db(db)),
            _ => Err(field("shadowing", "give exactly one of sigma and sigma_db")),
        }
    }

    /// Propagation parameters; `κ` is the placement intensity, or 1 for explicit placements.
    pub fn params(&self) -> Result<PropagationParams> {
        let kappa = self.placement.kappa.unwrap_or(1.0);
        PropagationParams::new(self.propagation.k, self.propagation.beta, self.sigma()?, kappa)
    }

    pub fn model(&self) -> CorrelationModel {
        let c = &self.correlation;
        let default_smooth = if c.kind == CorrelationKind::Wendland { 1.0 } else { 0.5 };
        CorrelationModel {
            kind: c.kind,
            scale: if c.kind == CorrelationKind::Nugget && c.scale == 0.0 { 1.0 } else { c.scale },
            smoothness: c.smoothness.unwrap_or(default_smooth),
            dimension: 2,
        }
    }

    /// dBm level of each threshold when a transmit power is given.
    pub fn threshold_dbm(&self) -> Option<Vec<f64>> {
        let p = self.thresholds.power_mw?;
        Some(self.thresholds.values.iter().map(|&t| dbm_from_threshold(t, p)).collect())
    }
}
