//! Single-class detection AP at IoU 0.5.
//!
//! Predictions from all images are ranked by confidence (stable, so equal
//! confidences keep image then list order). Walking down the ranking, each
//! prediction claims the unmatched ground-truth box of its image with the
//! highest IoU, provided that IoU is at least 0.5; otherwise it is a false
//! positive. AP is the area under the precision envelope (precision at
//! recall r replaced by the best precision at any recall >= r), summed as
//! rectangles at every point of the ranking.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::perception::BoundingBox;

pub const IOU_THRESHOLD: f64 = 0.5;

/// Intersection over union of two boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Ground truth and predictions for one image.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionSample {
    pub ground_truth: Vec<BoundingBox>,
    /// Predicted boxes; `confidence` is the detector score.
    pub predictions: Vec<BoundingBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub true_positive: bool,
    pub precision: f64,
    pub recall: f64,
}

/// Ranked precision/recall points, one per prediction.
pub fn precision_recall_curve(samples: &[DetectionSample]) -> Result<Vec<PrPoint>, EvalError> {
    let total_gt: usize = samples.iter().map(|s| s.ground_truth.len()).sum();
    if total_gt == 0 {
        return Err(EvalError::NoGroundTruth);
    }

    let mut ranked: Vec<(usize, &BoundingBox)> = samples
        .iter()
        .enumerate()
        .flat_map(|(img, s)| s.predictions.iter().map(move |p| (img, p)))
        .collect();
    ranked.sort_by(|a, b| b.1.confidence.total_cmp(&a.1.confidence));

    let mut claimed: Vec<Vec<bool>> = samples.iter().map(|s| vec![false; s.ground_truth.len()]).collect();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut curve = Vec::with_capacity(ranked.len());
    for (img, pred) in ranked {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in samples[img].ground_truth.iter().enumerate() {
            if claimed[img][g] {
                continue;
            }
            let overlap = iou(pred, gt);
            if overlap >= IOU_THRESHOLD && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((g, overlap));
            }
        }
        let hit = best.is_some();
        match best {
            Some((g, _)) => {
                claimed[img][g] = true;
                tp += 1;
            }
            None => fp += 1,
        }
        curve.push(PrPoint {
            confidence: pred.confidence,
            true_positive: hit,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / total_gt as f64,
        });
    }
    Ok(curve)
}

/// Average precision over the all-points precision envelope.
pub fn average_precision(curve: &[PrPoint]) -> f64 {
    let mut envelope: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (point, precision) in curve.iter().zip(envelope) {
        ap += (point.recall - prev_recall) * precision;
        prev_recall = point.recall;
    }
    ap
}

/// mAP@50 for a single class.
pub fn map50(samples: &[DetectionSample]) -> Result<f64, EvalError> {
    Ok(average_precision(&precision_recall_curve(samples)?))
}
