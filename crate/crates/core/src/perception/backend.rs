use thiserror::Error;

use crate::model::{Frame, Hand, LocationClass, ModelError, ObjectClass, PerView, ProbVector};

use super::geometry::{BoundingBox, HandCrop, PoseEstimate};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BackendError {
    #[error("inference failed: {0}")]
    Inference(String),

    #[error("backend returned an invalid distribution: {0}")]
    InvalidOutput(#[from] ModelError),

    #[error("backend output labels {got:?} do not match expected {expected:?}")]
    LabelMismatch { expected: Vec<String>, got: Vec<String> },
}

/// One optional crop per view, in [`ViewId`](crate::model::ViewId) order.
/// Views that are missing or produced no valid crop are `None`.
pub type ViewCrops = PerView<Option<HandCrop>>;

/// The models behind the pipeline: person detector, pose estimator and the
/// two multi-view fusion classifiers.
///
/// Implementations are shared across worker threads while ticks are
/// processed in parallel, so every method takes `&self`.
pub trait InferenceBackend: Send + Sync {
    /// Every person visible in the frame.
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError>;

    fn estimate_pose(&self, frame: &Frame, person: &BoundingBox) -> Result<PoseEstimate, BackendError>;

    /// Distribution over all of [`ObjectClass`], in taxonomy order.
    fn classify_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError>;

    /// Distribution over exactly `admissible`, in taxonomy order.
    fn classify_location(
        &self,
        hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError>;
}

impl<B: InferenceBackend + ?Sized> InferenceBackend for &B {
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError> {
        (**self).detect(frame)
    }

    fn estimate_pose(&self, frame: &Frame, person: &BoundingBox) -> Result<PoseEstimate, BackendError> {
        (**self).estimate_pose(frame, person)
    }

    fn classify_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError> {
        (**self).classify_object(hand, crops)
    }

    fn classify_location(
        &self,
        hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError> {
        (**self).classify_location(hand, crops, admissible)
    }
}

impl<B: InferenceBackend + ?Sized> InferenceBackend for Box<B> {
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError> {
        (**self).detect(frame)
    }

    fn estimate_pose(&self, frame: &Frame, person: &BoundingBox) -> Result<PoseEstimate, BackendError> {
        (**self).estimate_pose(frame, person)
    }

    fn classify_object(&self, hand: Hand, crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError> {
        (**self).classify_object(hand, crops)
    }

    fn classify_location(
        &self,
        hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError> {
        (**self).classify_location(hand, crops, admissible)
    }
}

pub(crate) fn check_labels<L: crate::model::ClassLabel>(
    v: &ProbVector<L>,
    expected: &[L],
) -> Result<(), BackendError> {
    if v.labels().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(BackendError::LabelMismatch {
            expected: expected.iter().map(|l| l.to_string()).collect(),
            got: v.labels().map(|l| l.to_string()).collect(),
        })
    }
}
