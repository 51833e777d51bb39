//! Per-tick perception: driver detection, pose, wrist crops and the
//! two-stage (object, then location) hand classification.
//!
//! Models sit behind [`InferenceBackend`]; everything here is pure given a
//! backend handle, so ticks may be processed in parallel.

mod backend;
mod geometry;

pub use backend::{BackendError, InferenceBackend, ViewCrops};
pub use geometry::{
    crop_hand, crop_rect, select_driver, BoundingBox, CropPixels, CropRect, GeometryError, HandCrop, Joint,
    Keypoint, PoseEstimate, SeatRoi,
};

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    admissible_classes, ClassLabel, Hand, HandLabel, LocationClass, Micros, ObjectClass, PerView, PipelineConfig,
    ProbVector, ViewId,
};
use crate::sync::SyncedFrameSet;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("no detection centered in the driver seat region")]
    NoDriverDetected,

    #[error("no valid {0:?} hand crop in any view")]
    NoValidCrop(Hand),

    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Classification outcome for one hand on one tick.
///
/// `location_probs` is present exactly when the object stage picked
/// [`ObjectClass::None`]. A hand that no view could crop is `Unknown` and
/// carries no distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct HandState {
    pub hand: Hand,
    pub object_probs: Option<ProbVector<ObjectClass>>,
    pub location_probs: Option<ProbVector<LocationClass>>,
    pub label: HandLabel,
}

impl HandState {
    pub fn unknown(hand: Hand) -> Self {
        HandState { hand, object_probs: None, location_probs: None, label: HandLabel::Unknown }
    }

    pub fn is_unknown(&self) -> bool {
        self.label == HandLabel::Unknown
    }
}

/// The two-stage decision: a held object if the object stage's argmax is
/// not `None`, otherwise the argmax of the location stage. Without a
/// location distribution to fall back on the result is `Unknown`.
pub fn two_stage_label(
    object: &ProbVector<ObjectClass>,
    location: Option<&ProbVector<LocationClass>>,
) -> HandLabel {
    match object.argmax() {
        ObjectClass::None => location.map_or(HandLabel::Unknown, |l| HandLabel::Location(l.argmax())),
        held => HandLabel::Object(held),
    }
}

/// Classify one hand from its per-view crops.
///
/// Invalid crops are handed to the backend as absent. Backend outputs are
/// checked against the taxonomy before use.
pub fn classify_hand(
    hand: Hand,
    crops: &PerView<Option<HandCrop>>,
    backend: &dyn InferenceBackend,
) -> Result<HandState, PerceptionError> {
    let usable: ViewCrops = crops.map(|_, c| c.as_ref().filter(|c| c.is_valid()).cloned());
    if usable.0.iter().all(Option::is_none) {
        return Err(PerceptionError::NoValidCrop(hand));
    }

    let object = backend.classify_object(hand, &usable)?;
    backend::check_labels(&object, ObjectClass::ALL)?;
    if object.argmax() != ObjectClass::None {
        let label = two_stage_label(&object, None);
        return Ok(HandState { hand, object_probs: Some(object), location_probs: None, label });
    }

    let admissible = admissible_classes(hand);
    let location = backend.classify_location(hand, &usable, admissible)?;
    backend::check_labels(&location, admissible)?;
    let label = two_stage_label(&object, Some(&location));
    Ok(HandState { hand, object_probs: Some(object), location_probs: Some(location), label })
}

/// Why a view contributed nothing (or only part) to a tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ViewIssue {
    Missing,
    DetectorFailed(String),
    NoDriverDetected,
    PoseFailed(String),
    InvalidCrop(Hand),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TickDiagnostics {
    pub views: PerView<Vec<ViewIssue>>,
    /// Hands that fell back to `Unknown` because no view had a valid crop.
    pub no_valid_crop: Vec<Hand>,
}

impl TickDiagnostics {
    pub fn count(&self, issue: &ViewIssue) -> usize {
        self.views.0.iter().flatten().filter(|i| *i == issue).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickResult {
    pub tick_index: u64,
    pub reference_timestamp_us: Micros,
    pub left: HandState,
    pub right: HandState,
    pub diagnostics: TickDiagnostics,
}

impl TickResult {
    pub fn hand(&self, hand: Hand) -> &HandState {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }
}

/// Run detection, pose, cropping and classification over one synchronized
/// set.
///
/// Failures confined to a view (missing frame, detector or pose error, no
/// driver in the seat region) become diagnostics and absent crops. A hand
/// with no valid crop anywhere is reported `Unknown`. Only classifier
/// errors abort the tick.
pub fn process_tick(
    set: &SyncedFrameSet,
    cfg: &PipelineConfig,
    backend: &dyn InferenceBackend,
) -> Result<TickResult, PerceptionError> {
    let mut diagnostics = TickDiagnostics::default();
    let mut left_crops: PerView<Option<HandCrop>> = PerView::default();
    let mut right_crops: PerView<Option<HandCrop>> = PerView::default();

    for view in ViewId::ALL.iter().copied() {
        let issues = &mut diagnostics.views[view];
        let Some(frame) = set.frame(view) else {
            issues.push(ViewIssue::Missing);
            continue;
        };
        let detections = match backend.detect(frame) {
            Ok(d) => d,
            Err(e) => {
                issues.push(ViewIssue::DetectorFailed(e.to_string()));
                continue;
            }
        };
        let Some(driver) = select_driver(&detections, &cfg.seat_roi[view], frame.width(), frame.height()) else {
            issues.push(ViewIssue::NoDriverDetected);
            continue;
        };
        let pose = match backend.estimate_pose(frame, &driver) {
            Ok(p) => p,
            Err(e) => {
                issues.push(ViewIssue::PoseFailed(e.to_string()));
                continue;
            }
        };
        let radius = cfg.crop_radius_px[view];
        for (hand, slot) in [(Hand::Left, &mut left_crops), (Hand::Right, &mut right_crops)] {
            let crop = crop_hand(&pose, hand, frame, radius, cfg.min_wrist_confidence);
            if !crop.is_valid() {
                issues.push(ViewIssue::InvalidCrop(hand));
            }
            slot[view] = Some(crop);
        }
    }

    let mut classify = |hand, crops: &PerView<Option<HandCrop>>| match classify_hand(hand, crops, backend) {
        Ok(state) => Ok(state),
        Err(PerceptionError::NoValidCrop(h)) => {
            diagnostics.no_valid_crop.push(h);
            Ok(HandState::unknown(h))
        }
        Err(e) => Err(e),
    };
    let left = classify(Hand::Left, &left_crops)?;
    let right = classify(Hand::Right, &right_crops)?;

    Ok(TickResult {
        tick_index: set.tick_index,
        reference_timestamp_us: set.reference_timestamp_us,
        left,
        right,
        diagnostics,
    })
}
