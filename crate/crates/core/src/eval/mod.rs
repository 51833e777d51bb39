//! Evaluation: confusion-matrix metrics, detection AP, throughput
//! composition, fleet-impact arithmetic and dataset splitting.

mod confusion;
mod detection;
pub mod published;

pub use confusion::{ClassMetrics, ConfusionMatrix};
pub use detection::{average_precision, iou, map50, precision_recall_curve, DetectionSample, PrPoint, IOU_THRESHOLD};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("confusion matrix has no observations")]
    EmptyMatrix,

    #[error("no ground-truth boxes")]
    NoGroundTruth,

    #[error("matrix shape: {0}")]
    Shape(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("need at least 3 sequences to split, got {0}")]
    InsufficientData(usize),

    #[error("{0}")]
    InvalidInput(String),
}

impl From<csv::Error> for EvalError {
    fn from(e: csv::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}

/// Named processing stages with their standalone frame rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageProfile {
    stages: Vec<(String, f64)>,
}

impl StageProfile {
    pub fn new(stages: Vec<(String, f64)>) -> Result<Self, EvalError> {
        if stages.is_empty() {
            return Err(EvalError::InvalidInput("stage profile is empty".into()));
        }
        if let Some((name, rate)) = stages.iter().find(|(_, r)| !(r.is_finite() && *r > 0.0)) {
            return Err(EvalError::InvalidInput(format!("stage `{name}` has non-positive rate {rate}")));
        }
        Ok(StageProfile { stages })
    }

    /// Unnamed stages, labeled by position.
    pub fn from_rates(rates: &[f64]) -> Result<Self, EvalError> {
        StageProfile::new(rates.iter().enumerate().map(|(i, &r)| (format!("stage{i}"), r)).collect())
    }

    pub fn stages(&self) -> &[(String, f64)] {
        &self.stages
    }

    pub fn max_rate(&self) -> f64 {
        self.stages.iter().map(|s| s.1).fold(f64::MIN, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositionMode {
    /// Stages run one after another on each frame.
    Sequential,
    /// Stages overlap on consecutive frames; the slowest stage bounds.
    Pipelined,
}

impl std::str::FromStr for CompositionMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(CompositionMode::Sequential),
            "pipelined" => Ok(CompositionMode::Pipelined),
            other => Err(EvalError::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

/// End-to-end frame rate of a chain of stages.
pub fn compose_throughput(profile: &StageProfile, mode: CompositionMode) -> f64 {
    match mode {
        CompositionMode::Sequential => 1.0 / profile.stages.iter().map(|(_, r)| 1.0 / r).sum::<f64>(),
        CompositionMode::Pipelined => profile.stages.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FleetImpact {
    /// Share of the fleet already equipped.
    pub penetration: f64,
    /// Accidents prevented at the supplied fleet-wide reduction.
    pub prevented: u64,
}

/// Fleet-wide reduction from a projected equipped share and the accident
/// reduction within equipped vehicles.
pub fn effective_fraction(projected_penetration: f64, reduction: f64) -> f64 {
    projected_penetration * reduction
}

pub fn fleet_impact(
    equipped: u64,
    fleet: u64,
    effective_fraction: f64,
    accidents: u64,
) -> Result<FleetImpact, EvalError> {
    if fleet == 0 {
        return Err(EvalError::InvalidInput("fleet size must be positive".into()));
    }
    if !(0.0..=1.0).contains(&effective_fraction) {
        return Err(EvalError::InvalidInput("fraction must lie in [0, 1]".into()));
    }
    Ok(FleetImpact {
        penetration: equipped as f64 / fleet as f64,
        prevented: (accidents as f64 * effective_fraction).round() as u64,
    })
}

/// Sequence indices assigned to each partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    /// Share of all frames in each partition.
    pub fn frame_fractions(&self, frame_counts: &[u64]) -> [f64; 3] {
        let total: u64 = frame_counts.iter().sum();
        let share = |idx: &[usize]| idx.iter().map(|&i| frame_counts[i]).sum::<u64>() as f64 / total as f64;
        [share(&self.train), share(&self.validation), share(&self.test)]
    }
}

/// Split whole sequences, in order, into train/validation/test.
///
/// Each cut is placed at the sequence boundary whose cumulative frame
/// count is closest to the target (earlier boundary on ties), keeping at
/// least one sequence per partition. Splitting by sequence keeps frames of
/// one recording out of two partitions.
pub fn split_dataset(frame_counts: &[u64], ratios: [f64; 3]) -> Result<DatasetSplit, EvalError> {
    let n = frame_counts.len();
    if n < 3 {
        return Err(EvalError::InsufficientData(n));
    }
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(EvalError::InvalidInput(format!("ratios {ratios:?} must be in [0, 1] and sum to 1")));
    }
    let total: u64 = frame_counts.iter().sum();
    if total == 0 {
        return Err(EvalError::InvalidInput("sequences contain no frames".into()));
    }

    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0u64);
    for &c in frame_counts {
        cumulative.push(cumulative.last().unwrap() + c);
    }
    let nearest = |lo: usize, hi: usize, target: f64| {
        (lo..=hi)
            .min_by(|&a, &b| {
                let da = (cumulative[a] as f64 - target).abs();
                let db = (cumulative[b] as f64 - target).abs();
                da.total_cmp(&db)
            })
            .expect("non-empty range")
    };
    let first_cut = nearest(1, n - 2, ratios[0] * total as f64);
    let second_cut = nearest(first_cut + 1, n - 1, (ratios[0] + ratios[1]) * total as f64);

    Ok(DatasetSplit {
        train: (0..first_cut).collect(),
        validation: (first_cut..second_cut).collect(),
        test: (second_cut..n).collect(),
    })
}
