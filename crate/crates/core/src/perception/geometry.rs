use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Frame, Hand, Micros, PerView, ViewId};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate box ({x_min}, {y_min})-({x_max}, {y_max})")]
    DegenerateBox { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },

    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),

    #[error("seat region must satisfy 0 <= min < max <= 1 on both axes")]
    SeatRegion,

    #[error("pose is missing the {0:?} keypoint")]
    MissingWrist(Hand),

    #[error("keypoint {0:?} has non-finite coordinates")]
    NonFiniteKeypoint(Joint),
}

/// Axis-aligned box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub confidence: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, confidence: f64) -> Result<Self, GeometryError> {
        // written so that NaN fails too
        if !(x_min < x_max && y_min < y_max) {
            return Err(GeometryError::DegenerateBox { x_min, y_min, x_max, y_max });
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(GeometryError::Confidence(confidence));
        }
        Ok(BoundingBox { x_min, y_min, x_max, y_max, confidence })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }

    /// Intersect with `[0, width] x [0, height]`. `None` if nothing is left.
    pub fn clamped(&self, width: u32, height: u32) -> Option<BoundingBox> {
        BoundingBox::new(
            self.x_min.max(0.0),
            self.y_min.max(0.0),
            self.x_max.min(width as f64),
            self.y_max.min(height as f64),
            self.confidence,
        )
        .ok()
    }
}

/// Driver-seat region of one view, as fractions of the frame size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeatRoi {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl SeatRoi {
    pub const FULL: SeatRoi = SeatRoi { x_min: 0.0, y_min: 0.0, x_max: 1.0, y_max: 1.0 };

    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let roi = SeatRoi { x_min, y_min, x_max, y_max };
        roi.validate()?;
        Ok(roi)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let axis_ok = |lo: f64, hi: f64| 0.0 <= lo && lo < hi && hi <= 1.0;
        if axis_ok(self.x_min, self.x_max) && axis_ok(self.y_min, self.y_max) {
            Ok(())
        } else {
            Err(GeometryError::SeatRegion)
        }
    }

    /// Seat regions of the reference four-camera rig. The wheel and
    /// driver-facing dash cameras see only the driver; the center dash and
    /// mirror cameras see the driver in the right half of the image.
    pub fn default_rig() -> PerView<SeatRoi> {
        let right_half = SeatRoi { x_min: 0.5, y_min: 0.0, x_max: 1.0, y_max: 1.0 };
        PerView([SeatRoi::FULL, SeatRoi::FULL, right_half, right_half])
    }

    pub fn contains(&self, x: f64, y: f64, width: u32, height: u32) -> bool {
        let (fx, fy) = (x / width as f64, y / height as f64);
        (self.x_min..=self.x_max).contains(&fx) && (self.y_min..=self.y_max).contains(&fy)
    }
}

/// Pick the driver among the people detected in one view.
///
/// Only boxes whose center lies inside the seat region qualify. Among those
/// the largest wins; equal areas go to the earliest detection.
pub fn select_driver(
    detections: &[BoundingBox],
    roi: &SeatRoi,
    width: u32,
    height: u32,
) -> Option<BoundingBox> {
    let mut best: Option<&BoundingBox> = None;
    for det in detections {
        let (cx, cy) = det.center();
        if !roi.contains(cx, cy, width, height) {
            continue;
        }
        if best.is_none_or(|b| det.area() > b.area()) {
            best = Some(det);
        }
    }
    best.copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Joint {
    Nose,
    LeftEye,
    RightEye,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
}

impl Joint {
    pub fn wrist(hand: Hand) -> Joint {
        match hand {
            Hand::Left => Joint::LeftWrist,
            Hand::Right => Joint::RightWrist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

/// 2-D body keypoints of the detected driver. Both wrists are always
/// present, possibly with zero confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseEstimate {
    keypoints: BTreeMap<Joint, Keypoint>,
}

impl PoseEstimate {
    pub fn new(keypoints: BTreeMap<Joint, Keypoint>) -> Result<Self, GeometryError> {
        for (&joint, kp) in &keypoints {
            if !(kp.x.is_finite() && kp.y.is_finite()) {
                return Err(GeometryError::NonFiniteKeypoint(joint));
            }
            if !(0.0..=1.0).contains(&kp.confidence) {
                return Err(GeometryError::Confidence(kp.confidence));
            }
        }
        for hand in [Hand::Left, Hand::Right] {
            if !keypoints.contains_key(&Joint::wrist(hand)) {
                return Err(GeometryError::MissingWrist(hand));
            }
        }
        Ok(PoseEstimate { keypoints })
    }

    /// Pose made of the two wrists only.
    pub fn from_wrists(left: Keypoint, right: Keypoint) -> Result<Self, GeometryError> {
        PoseEstimate::new(BTreeMap::from([(Joint::LeftWrist, left), (Joint::RightWrist, right)]))
    }

    pub fn keypoint(&self, joint: Joint) -> Option<&Keypoint> {
        self.keypoints.get(&joint)
    }

    pub fn wrist(&self, hand: Hand) -> &Keypoint {
        &self.keypoints[&Joint::wrist(hand)]
    }

    pub fn keypoints(&self) -> &BTreeMap<Joint, Keypoint> {
        &self.keypoints
    }
}

/// Integer pixel rectangle, half-open: columns `x0..x1`, rows `y0..y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl CropRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn to_bbox(&self, confidence: f64) -> BoundingBox {
        BoundingBox {
            x_min: self.x0 as f64,
            y_min: self.y0 as f64,
            x_max: self.x1 as f64,
            y_max: self.y1 as f64,
            confidence,
        }
    }
}

impl fmt::Display for CropRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})-({}, {})", self.x0, self.y0, self.x1, self.y1)
    }
}

/// The wrist-centered square `[wx - r, wx + r) x [wy - r, wy + r)` around the
/// rounded wrist position, intersected with the frame. `None` when the
/// intersection is empty.
pub fn crop_rect(wrist_x: f64, wrist_y: f64, radius: u32, width: u32, height: u32) -> Option<CropRect> {
    if !(wrist_x.is_finite() && wrist_y.is_finite()) {
        return None;
    }
    let (cx, cy, r) = (wrist_x.round() as i64, wrist_y.round() as i64, radius as i64);
    let x0 = (cx - r).max(0);
    let y0 = (cy - r).max(0);
    let x1 = (cx + r).min(width as i64);
    let y1 = (cy + r).min(height as i64);
    if x0 >= x1 || y0 >= y1 {
        return None;
    }
    Some(CropRect { x0: x0 as u32, y0: y0 as u32, x1: x1 as u32, y1: y1 as u32 })
}

/// Read-only window into a frame's pixels. Rows are borrowed from the
/// frame buffer; nothing is copied until [`CropPixels::to_vec`].
#[derive(Clone, PartialEq)]
pub struct CropPixels {
    source: Arc<[u8]>,
    stride: usize,
    rect: CropRect,
}

impl CropPixels {
    pub fn width(&self) -> u32 {
        self.rect.width()
    }

    pub fn height(&self) -> u32 {
        self.rect.height()
    }

    pub fn row(&self, y: u32) -> &[u8] {
        assert!(y < self.height(), "row {y} outside crop");
        let start = (self.rect.y0 + y) as usize * self.stride + self.rect.x0 as usize;
        &self.source[start..start + self.width() as usize]
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.height()).flat_map(|y| self.row(y).iter().copied()).collect()
    }
}

impl fmt::Debug for CropPixels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CropPixels").field("rect", &self.rect).finish_non_exhaustive()
    }
}

/// Crop around one hand in one view.
#[derive(Debug, Clone, PartialEq)]
pub struct HandCrop {
    pub view: ViewId,
    pub hand: Hand,
    /// Timestamp of the frame the crop was cut from.
    pub source_timestamp_us: Micros,
    /// Confidence of the wrist keypoint the crop is centered on.
    pub wrist_confidence: f64,
    rect: Option<CropRect>,
    pixels: Option<CropPixels>,
}

impl HandCrop {
    pub fn invalid(view: ViewId, hand: Hand, source_timestamp_us: Micros, wrist_confidence: f64) -> Self {
        HandCrop { view, hand, source_timestamp_us, wrist_confidence, rect: None, pixels: None }
    }

    pub fn is_valid(&self) -> bool {
        self.rect.is_some()
    }

    pub fn rect(&self) -> Option<CropRect> {
        self.rect
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        self.rect.map(|r| r.to_bbox(self.wrist_confidence))
    }

    pub fn pixels(&self) -> Option<&CropPixels> {
        self.pixels.as_ref()
    }
}

/// Cut the wrist-centered crop for `hand` out of `frame`.
///
/// A wrist below `min_confidence`, or one whose square misses the frame
/// entirely, produces an invalid crop rather than an error.
pub fn crop_hand(pose: &PoseEstimate, hand: Hand, frame: &Frame, radius: u32, min_confidence: f64) -> HandCrop {
    let wrist = pose.wrist(hand);
    let invalid = HandCrop::invalid(frame.view, hand, frame.timestamp_us, wrist.confidence);
    if wrist.confidence < min_confidence {
        return invalid;
    }
    match crop_rect(wrist.x, wrist.y, radius, frame.width(), frame.height()) {
        Some(rect) => HandCrop {
            rect: Some(rect),
            pixels: Some(CropPixels { source: frame.shared_pixels(), stride: frame.width() as usize, rect }),
            ..invalid
        },
        None => invalid,
    }
}
