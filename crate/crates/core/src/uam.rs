//! Uncertainty-aware post-processing.
//!
//! Each case's prediction is summarised by the sum of its per-voxel binary
//! Shannon entropies (nats). A population of such sums, gathered from
//! validation predictions, gives a mean and standard deviation; at inference
//! a case whose sum lies more than `sigma_factor` deviations above the mean is
//! an outlier and is thresholded at `outlier_threshold` (0.2) instead of
//! `normal_threshold` (0.5).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::sum::{mean_std, pairwise_sum};
use crate::volume::{Kind, Mask, Volume};
use crate::{Error, Result};

pub const DEFAULT_SIGMA_FACTOR: f64 = 3.0;
pub const DEFAULT_NORMAL_THRESHOLD: f64 = 0.5;
pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 0.2;
/// Fixed foreground threshold for scar probabilities.
pub const SCAR_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UamStats {
    pub mean: f64,
    pub std: f64,
    pub n_cases: usize,
    pub sigma_factor: f64,
    pub normal_threshold: f64,
    pub outlier_threshold: f64,
    /// Also flag cases far *below* the mean.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub two_sided: bool,
}

impl UamStats {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !self.mean.is_finite() {
            return bad(format!("mean must be finite, got {}", self.mean));
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return bad(format!("std must be finite and >= 0, got {}", self.std));
        }
        if self.n_cases == 0 {
            return bad("n_cases must be positive".into());
        }
        if !(self.sigma_factor.is_finite() && self.sigma_factor >= 0.0) {
            return bad(format!(
                "sigma_factor must be >= 0, got {}",
                self.sigma_factor
            ));
        }
        for t in [self.normal_threshold, self.outlier_threshold] {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("thresholds must lie in (0, 1), got {t}"));
            }
        }
        if self.outlier_threshold >= self.normal_threshold {
            return bad("outlier_threshold must be below normal_threshold".into());
        }
        Ok(())
    }

    pub fn with_sigma_factor(mut self, k: f64) -> Result<Self> {
        self.sigma_factor = k;
        self.validate()?;
        Ok(self)
    }

    pub fn two_sided(mut self, on: bool) -> Self {
        self.two_sided = on;
        self
    }

    pub fn is_outlier(&self, h: f64) -> bool {
        let limit = self.sigma_factor * self.std;
        if self.two_sided {
            (h - self.mean).abs() > limit
        } else {
            h > self.mean + limit
        }
    }

    /// Probability threshold for a case with entropy sum `h`.
    pub fn threshold_for(&self, h: f64) -> f64 {
        if self.is_outlier(h) {
            self.outlier_threshold
        } else {
            self.normal_threshold
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let stats: UamStats =
            serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
        stats.validate()?;
        Ok(stats)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }
}

fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

/// Sum over voxels of the binary Shannon entropy, in nats.
pub fn entropy_sum(p: &Volume) -> Result<f64> {
    p.require_kind(Kind::Probability)?;
    let h: Vec<f64> = p
        .data()
        .iter()
        .map(|&x| binary_entropy(f64::from(x)))
        .collect();
    Ok(pairwise_sum(&h))
}

/// Population mean and standard deviation of per-case entropy sums.
pub fn fit_population(entropies: &[f64]) -> Result<UamStats> {
    if entropies.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 cases to fit the population, got {}",
            entropies.len()
        )));
    }
    if let Some(bad) = entropies.iter().find(|h| !h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite entropy sum {bad}"
        )));
    }
    // Sort first so the result does not depend on input order.
    let mut sorted = entropies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mean, std) = mean_std(&sorted);
    Ok(UamStats {
        mean,
        std,
        n_cases: entropies.len(),
        sigma_factor: DEFAULT_SIGMA_FACTOR,
        normal_threshold: DEFAULT_NORMAL_THRESHOLD,
        outlier_threshold: DEFAULT_OUTLIER_THRESHOLD,
        two_sided: false,
    })
}

pub fn is_outlier(h: f64, stats: &UamStats) -> bool {
    stats.is_outlier(h)
}

/// Foreground where `p >= t`.
pub fn threshold(p: &Volume, t: f64) -> Result<Mask> {
    p.require_kind(Kind::Probability)?;
    let bits: Vec<bool> = p.data().iter().map(|&x| f64::from(x) >= t).collect();
    Mask::from_bools(p.dims(), p.spacing(), &bits)
}

/// Thresholds `p` at 0.2 for outlier cases and 0.5 otherwise.
pub fn apply_threshold(p: &Volume, stats: &UamStats, h: f64) -> Result<Mask> {
    threshold(p, stats.threshold_for(h))
}

pub fn scar_threshold(p: &Volume) -> Result<Mask> {
    threshold(p, SCAR_THRESHOLD)
}

/// Parses `case_id value` lines. Blank lines and `#` comments are skipped.
pub fn parse_entropy_manifest(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!(
                "line {}: expected `case_id value`",
                lineno + 1
            )));
        };
        let h: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value {value:?}", lineno + 1)))?;
        if !h.is_finite() || h < 0.0 {
            return Err(Error::Parse(format!(
                "line {}: entropy sum must be finite and >= 0",
                lineno + 1
            )));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::Parse(format!(
                "line {}: duplicate case {id}",
                lineno + 1
            )));
        }
        out.push((id.to_string(), h));
    }
    Ok(out)
}

pub fn format_entropy_manifest(rows: &[(String, f64)]) -> String {
    let mut s = String::new();
    for (id, h) in rows {
        s.push_str(&format!("{id} {h}\n"));
    }
    s
}
