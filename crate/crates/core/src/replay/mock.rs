//! Mock inference backends driven by manifest ground truth.
//!
//! [`ScriptedBackend`] is an oracle: it finds the manifest tick each frame
//! or crop came from, reports the driver (plus a passenger where the cabin
//! layout has one), the true wrist positions, and one-hot distributions on
//! the true labels. [`NoisyBackend`] wraps it and, with a fixed probability
//! per stage, swaps the true label for a uniformly chosen different one.

use std::collections::HashMap;
use std::sync::Arc;

use super::layout::CabinLayout;
use super::manifest::{HandTruth, Manifest};
use super::rng::SeededRng;
use crate::model::{ClassLabel, Frame, Hand, LocationClass, Micros, ObjectClass, ProbVector, ViewId};
use crate::perception::{BackendError, BoundingBox, InferenceBackend, Keypoint, PoseEstimate, ViewCrops};

pub const DRIVER_CONFIDENCE: f64 = 0.95;
pub const PASSENGER_CONFIDENCE: f64 = 0.97;
pub const WRIST_CONFIDENCE: f64 = 0.9;

#[derive(Debug, Clone)]
struct TruthIndex {
    manifest: Arc<Manifest>,
    by_frame: HashMap<(ViewId, Micros), usize>,
}

impl TruthIndex {
    fn new(manifest: Arc<Manifest>) -> Self {
        let mut by_frame = HashMap::new();
        for (i, rec) in manifest.ticks.iter().enumerate() {
            for (view, ts) in rec.timestamps.iter() {
                if let Some(ts) = ts {
                    by_frame.insert((view, *ts), i);
                }
            }
        }
        TruthIndex { manifest, by_frame }
    }

    fn tick_of(&self, view: ViewId, ts: Micros) -> Result<usize, BackendError> {
        self.by_frame
            .get(&(view, ts))
            .copied()
            .ok_or_else(|| BackendError::Inference(format!("{view} frame at {ts} us is not in the manifest")))
    }

    fn hand_truth(&self, tick: usize, hand: Hand) -> Result<&HandTruth, BackendError> {
        self.manifest.ticks[tick]
            .truth
            .as_ref()
            .map(|t| t.hand(hand))
            .ok_or_else(|| BackendError::Inference(format!("tick {tick} has no ground truth")))
    }

    /// Manifest tick of the first usable crop in view order.
    fn tick_of_crops(&self, crops: &ViewCrops) -> Result<usize, BackendError> {
        let crop = crops
            .0
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| BackendError::Inference("no crops supplied".into()))?;
        self.tick_of(crop.view, crop.source_timestamp_us)
    }
}

/// Oracle backend: reproduces manifest ground truth exactly.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    truth: TruthIndex,
    layout: &'static CabinLayout,
}

impl ScriptedBackend {
    pub fn new(manifest: Arc<Manifest>) -> Self {
        ScriptedBackend { truth: TruthIndex::new(manifest), layout: CabinLayout::standard() }
    }

    /// Manifest tick index a crop set was cut from.
    pub fn manifest_tick(&self, crops: &ViewCrops) -> Result<usize, BackendError> {
        self.truth.tick_of_crops(crops)
    }

    pub fn true_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ObjectClass, BackendError> {
        let tick = self.truth.tick_of_crops(crops)?;
        Ok(self.truth.hand_truth(tick, hand)?.object)
    }

    pub fn true_location(&self, hand: Hand, crops: &ViewCrops) -> Result<LocationClass, BackendError> {
        let tick = self.truth.tick_of_crops(crops)?;
        Ok(self.truth.hand_truth(tick, hand)?.location)
    }
}

impl InferenceBackend for ScriptedBackend {
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError> {
        self.truth.tick_of(frame.view, frame.timestamp_us)?;
        let (w, h) = (frame.width(), frame.height());
        let mut people = Vec::with_capacity(2);
        people.extend(self.layout.passenger_box(frame.view, w, h, PASSENGER_CONFIDENCE));
        people.push(self.layout.driver_box(frame.view, w, h, DRIVER_CONFIDENCE));
        Ok(people)
    }

    fn estimate_pose(&self, frame: &Frame, _person: &BoundingBox) -> Result<PoseEstimate, BackendError> {
        let tick = self.truth.tick_of(frame.view, frame.timestamp_us)?;
        let keypoint = |hand| -> Result<Keypoint, BackendError> {
            Ok(match self.truth.hand_truth(tick, hand)?.wrists[frame.view] {
                Some([x, y]) => Keypoint { x, y, confidence: WRIST_CONFIDENCE },
                None => Keypoint { x: 0.0, y: 0.0, confidence: 0.0 },
            })
        };
        PoseEstimate::from_wrists(keypoint(Hand::Left)?, keypoint(Hand::Right)?)
            .map_err(|e| BackendError::Inference(e.to_string()))
    }

    fn classify_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError> {
        Ok(ProbVector::one_hot(ObjectClass::ALL, self.true_object(hand, crops)?)?)
    }

    fn classify_location(
        &self,
        hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError> {
        Ok(ProbVector::one_hot(admissible, self.true_location(hand, crops)?)?)
    }
}

/// Per-stage label-noise rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub object_error_rate: f64,
    pub location_error_rate: f64,
    /// Mass on the emitted label; the rest is spread evenly over the others.
    pub peak: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn symmetric(error_rate: f64, seed: u64) -> Self {
        NoiseSpec { object_error_rate: error_rate, location_error_rate: error_rate, peak: 0.9, seed }
    }
}

/// Scripted backend with seeded symmetric label noise.
///
/// Each (manifest tick, hand, stage) draws from its own RNG stream, so the
/// outcome does not depend on call order or threading.
#[derive(Debug, Clone)]
pub struct NoisyBackend {
    inner: ScriptedBackend,
    noise: NoiseSpec,
}

impl NoisyBackend {
    pub fn new(manifest: Arc<Manifest>, noise: NoiseSpec) -> Self {
        assert!((0.0..=1.0).contains(&noise.object_error_rate));
        assert!((0.0..=1.0).contains(&noise.location_error_rate));
        assert!(noise.peak > 0.0 && noise.peak <= 1.0);
        NoisyBackend { inner: ScriptedBackend::new(manifest), noise }
    }

    fn perturb<L: ClassLabel>(
        &self,
        labels: &[L],
        truth: L,
        rate: f64,
        tick: usize,
        hand: Hand,
        stage: u64,
    ) -> Result<ProbVector<L>, BackendError> {
        let stream = (tick as u64) * 4 + hand.index() as u64 * 2 + stage;
        let mut rng = SeededRng::new(self.noise.seed, stream);
        let mut emitted = truth;
        if labels.len() > 1 && rng.chance(rate) {
            let others: Vec<L> = labels.iter().copied().filter(|&l| l != truth).collect();
            emitted = others[rng.below(others.len() as u64) as usize];
        }
        if labels.len() == 1 {
            return Ok(ProbVector::one_hot(labels, emitted)?);
        }
        let rest = (1.0 - self.noise.peak) / (labels.len() - 1) as f64;
        let probs: Vec<f64> = labels.iter().map(|&l| if l == emitted { self.noise.peak } else { rest }).collect();
        Ok(ProbVector::from_probs(labels, &probs)?)
    }
}

impl InferenceBackend for NoisyBackend {
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError> {
        self.inner.detect(frame)
    }

    fn estimate_pose(&self, frame: &Frame, person: &BoundingBox) -> Result<PoseEstimate, BackendError> {
        self.inner.estimate_pose(frame, person)
    }

    fn classify_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError> {
        let tick = self.inner.manifest_tick(crops)?;
        let truth = self.inner.true_object(hand, crops)?;
        self.perturb(ObjectClass::ALL, truth, self.noise.object_error_rate, tick, hand, 0)
    }

    fn classify_location(
        &self,
        hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError> {
        let tick = self.inner.manifest_tick(crops)?;
        let truth = self.inner.true_location(hand, crops)?;
        self.perturb(admissible, truth, self.noise.location_error_rate, tick, hand, 1)
    }
}
