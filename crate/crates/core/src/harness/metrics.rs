//! Run-level metrics and cross-seed aggregation.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_SCHEMA: u32 = 1;
/// Episodes considered for the final success rate and mean length.
pub const RECENT_EPISODES: usize = 100;
/// z-value of a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// One point of the trailing success curve, taken whenever an episode ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub steps: u64,
    pub episodes: u64,
    pub success_indicator: f64,
}

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: u32,
    pub policy: String,
    pub dims: String,
    pub seed: u64,
    pub num_envs: usize,
    pub total_step_cap: u64,
    /// Environment steps taken; equals the sum of all logged episode lengths.
    pub total_steps: u64,
    pub episodes_finished: u64,
    pub episodes_interrupted: u64,
    pub episodes_aborted: u64,
    /// Solved fraction of the last [`RECENT_EPISODES`] finished episodes.
    pub success_rate: f64,
    /// Mean length of the last [`RECENT_EPISODES`] finished episodes.
    pub mean_episode_length: f64,
    pub success_threshold: f64,
    /// First step count at which the trailing per-env success indicator,
    /// averaged over envs, reached the threshold; the cap when censored.
    pub steps_to_threshold: u64,
    pub censored: bool,
    pub early_terminated: bool,
    #[serde(skip)]
    pub curve: Vec<CurvePoint>,
}

impl MetricsReport {
    pub fn steps_to_threshold_millions(&self) -> f64 {
        self.steps_to_threshold as f64 / 1e6
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One header row and one value row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(self)?;
        csv_string(w)
    }

    pub fn curve_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.curve {
            w.serialize(p)?;
        }
        if self.curve.is_empty() {
            w.write_record(["steps", "episodes", "success_indicator"])?;
        }
        csv_string(w)
    }

    /// Writes `metrics.json`, `metrics.csv` and `success_curve.csv`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join("metrics.json"), &self.to_json()?)?;
        write_text(&dir.join("metrics.csv"), &self.to_csv()?)?;
        write_text(&dir.join("success_curve.csv"), &self.curve_csv()?)
    }
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Mean with a 95% confidence half-width (1.96 standard errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Interval {
    /// Uses the sample standard deviation; a single value has zero width.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let half_width = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z_95 * (var / n as f64).sqrt()
        };
        Some(Self { mean, half_width, n })
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}±{:.2}", self.mean, self.half_width)
    }
}

/// Per-seed reports folded into intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedAggregate {
    pub seeds: Vec<u64>,
    pub success_rate: Interval,
    /// In millions of steps.
    pub steps_to_threshold_millions: Interval,
    pub mean_episode_length: Interval,
    pub censored_runs: usize,
}

impl SeedAggregate {
    pub fn from_reports(reports: &[MetricsReport]) -> Option<Self> {
        let pick = |f: fn(&MetricsReport) -> f64| {
            Interval::from_values(&reports.iter().map(f).collect::<Vec<_>>())
        };
        Some(Self {
            seeds: reports.iter().map(|r| r.seed).collect(),
            success_rate: pick(|r| r.success_rate)?,
            steps_to_threshold_millions: pick(MetricsReport::steps_to_threshold_millions)?,
            mean_episode_length: pick(|r| r.mean_episode_length)?,
            censored_runs: reports.iter().filter(|r| r.censored).count(),
        })
    }
}
