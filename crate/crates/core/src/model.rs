//! Shared domain types: camera views, frames, label taxonomies, probability
//! vectors and the pipeline configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::perception::SeatRoi;

/// Tolerance on the sum of a probability vector.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Microseconds since the shared stream epoch.
pub type Micros = u64;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("config parse error: {0}")]
    Parse(String),
}

impl ConfigError {
    fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field, reason: reason.into() }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error("frame dimensions must be positive, got {width}x{height}")]
    EmptyFrame { width: u32, height: u32 },

    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("probability vector is empty")]
    EmptyProbVector,

    #[error("probability {value} for `{label}` outside [0, 1]")]
    ProbabilityRange { label: String, value: f64 },

    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),

    #[error("labels must be distinct and in taxonomy order")]
    LabelOrder,

    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

/// A label from one of the fixed class taxonomies.
///
/// `ALL` lists the labels in enumeration order, which is also the tie-break
/// order for every argmax in the pipeline.
pub trait ClassLabel:
    Copy + Eq + Ord + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const ALL: &'static [Self];

    fn name(self) -> &'static str;

    fn ordinal(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("label in ALL")
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|l| l.name().eq_ignore_ascii_case(s))
    }
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl ClassLabel for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn name(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = ModelError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$name as ClassLabel>::parse(s).ok_or_else(|| ModelError::UnknownLabel(s.to_string()))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

label_enum! {
    /// One of the four cameras of the rig. The order here is the input
    /// layout of the fusion classifiers.
    ViewId { WheelCam, DashDriverCam, DashCenterCam, MirrorCam }
}

label_enum! {
    /// What a hand is holding.
    ObjectClass { None, Beverage, Phone, Tablet }
}

label_enum! {
    /// Where an empty hand rests.
    LocationClass { Wheel, Lap, Air, Radio, Cupholder }
}

label_enum! {
    Hand { Left, Right }
}

impl ViewId {
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }
}

impl Hand {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Location classes a hand can be classified into. The left hand never
/// reaches the radio or cupholder zones.
pub fn admissible_classes(hand: Hand) -> &'static [LocationClass] {
    use LocationClass::*;
    match hand {
        Hand::Left => &[Wheel, Lap, Air],
        Hand::Right => &[Wheel, Lap, Air, Radio, Cupholder],
    }
}

/// Final per-hand label: a held object, or the location of an empty hand.
/// `Unknown` marks a hand no view could crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandLabel {
    Object(ObjectClass),
    Location(LocationClass),
    Unknown,
}

impl HandLabel {
    pub fn is_object(self) -> bool {
        matches!(self, HandLabel::Object(_))
    }

    pub fn name(self) -> &'static str {
        match self {
            HandLabel::Object(o) => o.name(),
            HandLabel::Location(l) => l.name(),
            HandLabel::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for HandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HandLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("unknown") {
            return Ok(HandLabel::Unknown);
        }
        if let Some(l) = <LocationClass as ClassLabel>::parse(s) {
            return Ok(HandLabel::Location(l));
        }
        match <ObjectClass as ClassLabel>::parse(s) {
            Some(ObjectClass::None) | None => Err(ModelError::UnknownLabel(s.to_string())),
            Some(o) => Ok(HandLabel::Object(o)),
        }
    }
}

impl Serialize for HandLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for HandLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// One value per camera view, indexed by [`ViewId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PerView<T>(pub [T; ViewId::COUNT]);

impl<T> PerView<T> {
    pub fn from_fn(mut f: impl FnMut(ViewId) -> T) -> Self {
        PerView([
            f(ViewId::WheelCam),
            f(ViewId::DashDriverCam),
            f(ViewId::DashCenterCam),
            f(ViewId::MirrorCam),
        ])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ViewId, &T)> {
        ViewId::ALL.iter().copied().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(ViewId, &T) -> U) -> PerView<U> {
        PerView::from_fn(|v| f(v, &self[v]))
    }
}

impl<T: Clone> PerView<T> {
    pub fn splat(value: T) -> Self {
        PerView::from_fn(|_| value.clone())
    }
}

impl<T> Index<ViewId> for PerView<T> {
    type Output = T;

    fn index(&self, view: ViewId) -> &T {
        &self.0[view.index()]
    }
}

impl<T> IndexMut<ViewId> for PerView<T> {
    fn index_mut(&mut self, view: ViewId) -> &mut T {
        &mut self.0[view.index()]
    }
}

impl<T: Serialize> Serialize for PerView<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.iter().map(|(v, t)| (v.name(), t)))
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerView<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mut map = BTreeMap::<ViewId, T>::deserialize(deserializer)?;
        let mut slots: [Option<T>; ViewId::COUNT] = Default::default();
        for view in ViewId::ALL {
            slots[view.index()] = Some(
                map.remove(view)
                    .ok_or_else(|| D::Error::custom(format!("missing entry for view {view}")))?,
            );
        }
        Ok(PerView(slots.map(|s| s.expect("filled above"))))
    }
}

/// A single-channel 8-bit IR image from one view.
///
/// Pixel storage is reference counted so that frames can be handed between
/// stages, and crops can borrow from it, without copying.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub view: ViewId,
    pub timestamp_us: Micros,
    width: u32,
    height: u32,
    pixels: Arc<[u8]>,
}

impl Frame {
    pub fn new(
        view: ViewId,
        timestamp_us: Micros,
        width: u32,
        height: u32,
        pixels: impl Into<Arc<[u8]>>,
    ) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::EmptyFrame { width, height });
        }
        let pixels = pixels.into();
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ModelError::BufferSize { expected, actual: pixels.len() });
        }
        Ok(Frame { view, timestamp_us, width, height, pixels })
    }

    /// A frame of all-zero pixels.
    pub fn blank(view: ViewId, timestamp_us: Micros, width: u32, height: u32) -> Result<Self, ModelError> {
        let len = width as usize * height as usize;
        Frame::new(view, timestamp_us, width, height, vec![0u8; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn shared_pixels(&self) -> Arc<[u8]> {
        Arc::clone(&self.pixels)
    }

    /// Same image, different view and timestamp. Shares the pixel buffer.
    pub fn restamped(&self, view: ViewId, timestamp_us: Micros) -> Frame {
        Frame { view, timestamp_us, ..self.clone() }
    }
}

/// A discrete distribution over a subset of a label taxonomy, stored in
/// taxonomy order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<L> {
    entries: Vec<(L, f64)>,
}

impl<L: ClassLabel> ProbVector<L> {
    pub fn new(entries: Vec<(L, f64)>) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::EmptyProbVector);
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(ModelError::LabelOrder);
        }
        for &(label, p) in &entries {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::ProbabilityRange { label: label.to_string(), value: p });
            }
        }
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(ModelError::ProbabilitySum(sum));
        }
        Ok(ProbVector { entries })
    }

    /// Build from probabilities aligned with `labels`.
    pub fn from_probs(labels: &[L], probs: &[f64]) -> Result<Self, ModelError> {
        if labels.len() != probs.len() {
            return Err(ModelError::LabelOrder);
        }
        Self::new(labels.iter().copied().zip(probs.iter().copied()).collect())
    }

    /// All mass on `hot`, which must be one of `labels`.
    pub fn one_hot(labels: &[L], hot: L) -> Result<Self, ModelError> {
        if !labels.contains(&hot) {
            return Err(ModelError::UnknownLabel(hot.to_string()));
        }
        Self::new(labels.iter().map(|&l| (l, if l == hot { 1.0 } else { 0.0 })).collect())
    }

    pub fn uniform(labels: &[L]) -> Result<Self, ModelError> {
        let p = 1.0 / labels.len().max(1) as f64;
        Self::new(labels.iter().map(|&l| (l, p)).collect())
    }

    pub fn entries(&self) -> &[(L, f64)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = L> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn prob(&self, label: L) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == label).map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Most probable label; ties go to the earliest label in taxonomy order.
    pub fn argmax(&self) -> L {
        let mut best = self.entries[0];
        for &e in &self.entries[1..] {
            if e.1 > best.1 {
                best = e;
            }
        }
        best.0
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<(L, f64)>) -> Self {
        ProbVector { entries }
    }
}

/// Named sustained-distraction predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateId {
    /// Either hand holds an object, or neither hand is on the wheel.
    #[default]
    HandsOffWheelOrObject,
    /// Either hand holds an object.
    AnyObject,
    /// Neither hand is on the wheel, regardless of held objects.
    BothHandsOffWheel,
}

impl FromStr for PredicateId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hands-off-wheel-or-object" | "default" => Ok(PredicateId::HandsOffWheelOrObject),
            "any-object" => Ok(PredicateId::AnyObject),
            "both-hands-off-wheel" => Ok(PredicateId::BothHandsOffWheel),
            other => Err(ConfigError::invalid("distraction_predicate", format!("unknown predicate `{other}`"))),
        }
    }
}

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Half-width of the wrist-centered crop square, per view.
    pub crop_radius_px: PerView<u32>,
    pub sync_tolerance_us: Micros,
    pub smoothing_window: usize,
    /// Consecutive distracted (smoothed) ticks before an alert.
    pub alert_threshold: u32,
    pub nominal_fps: f64,
    /// Ticks after an alert during which no new alert is raised.
    pub alert_cooldown: u32,
    pub distraction_predicate: PredicateId,
    /// Wrist keypoints below this confidence yield invalid crops.
    pub min_wrist_confidence: f64,
    /// Frames buffered per view while waiting for the other views.
    pub sync_buffer_cap: usize,
    /// Emission timeout in multiples of the nominal frame period.
    pub sync_timeout_periods: f64,
    /// Whether an uncroppable hand counts as off the wheel.
    pub unknown_is_distracting: bool,
    pub seat_roi: PerView<SeatRoi>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            crop_radius_px: PerView::splat(100),
            sync_tolerance_us: 16_667,
            smoothing_window: 3,
            alert_threshold: 150,
            nominal_fps: 30.0,
            alert_cooldown: 300,
            distraction_predicate: PredicateId::default(),
            min_wrist_confidence: 0.3,
            sync_buffer_cap: 8,
            sync_timeout_periods: 2.0,
            unknown_is_distracting: false,
            seat_roi: SeatRoi::default_rig(),
        }
    }
}

impl PipelineConfig {
    pub fn frame_period_us(&self) -> Micros {
        (1e6 / self.nominal_fps).round() as Micros
    }

    pub fn sync_timeout_us(&self) -> Micros {
        (self.sync_timeout_periods * 1e6 / self.nominal_fps).round() as Micros
    }

    /// Parse a TOML document. Absent keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut cfg = PipelineConfig::default();
        file.apply(&mut cfg)?;
        validate_config(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ConfigFile::from(self);
        toml::to_string(&file).expect("config serializes")
    }
}

/// Check every configuration invariant, returning the config unchanged.
pub fn validate_config(cfg: PipelineConfig) -> Result<PipelineConfig, ConfigError> {
    if let Some((view, _)) = cfg.crop_radius_px.iter().find(|(_, r)| **r == 0) {
        return Err(ConfigError::invalid("crop_radius_px", format!("radius for {view} must be positive")));
    }
    if cfg.sync_tolerance_us == 0 {
        return Err(ConfigError::invalid("sync_tolerance_us", "must be positive"));
    }
    if cfg.smoothing_window < 1 {
        return Err(ConfigError::invalid("smoothing_window", "must be at least 1"));
    }
    if cfg.alert_threshold < 1 {
        return Err(ConfigError::invalid("alert_threshold", "must be at least 1"));
    }
    if !(cfg.nominal_fps.is_finite() && cfg.nominal_fps > 0.0) {
        return Err(ConfigError::invalid("nominal_fps", "must be a positive number"));
    }
    if cfg.alert_cooldown < 1 {
        return Err(ConfigError::invalid("alert_cooldown", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&cfg.min_wrist_confidence) {
        return Err(ConfigError::invalid("min_wrist_confidence", "must lie in [0, 1]"));
    }
    if cfg.sync_buffer_cap < 1 {
        return Err(ConfigError::invalid("sync_buffer_cap", "must be at least 1"));
    }
    if !(cfg.sync_timeout_periods.is_finite() && cfg.sync_timeout_periods > 0.0) {
        return Err(ConfigError::invalid("sync_timeout_periods", "must be a positive number"));
    }
    for (view, roi) in cfg.seat_roi.iter() {
        roi.validate()
            .map_err(|e| ConfigError::invalid("seat_roi", format!("{view}: {e}")))?;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RadiusSetting {
    All(u32),
    PerView(BTreeMap<ViewId, u32>),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    crop_radius_px: Option<RadiusSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sync_tolerance_us: Option<Micros>,
    #[serde(skip_serializing_if = "Option::is_none")]
    smoothing_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alert_threshold: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nominal_fps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alert_cooldown: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distraction_predicate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_wrist_confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sync_buffer_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sync_timeout_periods: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unknown_is_distracting: Option<bool>,
    /// Four normalized floats per view: x_min, y_min, x_max, y_max.
    #[serde(skip_serializing_if = "Option::is_none")]
    seat_roi: Option<BTreeMap<ViewId, [f64; 4]>>,
}

impl ConfigFile {
    fn apply(self, cfg: &mut PipelineConfig) -> Result<(), ConfigError> {
        match self.crop_radius_px {
            Some(RadiusSetting::All(r)) => cfg.crop_radius_px = PerView::splat(r),
            Some(RadiusSetting::PerView(map)) => {
                for (view, r) in map {
                    cfg.crop_radius_px[view] = r;
                }
            }
            None => {}
        }
        if let Some(v) = self.sync_tolerance_us {
            cfg.sync_tolerance_us = v;
        }
        if let Some(v) = self.smoothing_window {
            cfg.smoothing_window = v;
        }
        if let Some(v) = self.alert_threshold {
            cfg.alert_threshold = v;
        }
        if let Some(v) = self.nominal_fps {
            cfg.nominal_fps = v;
        }
        if let Some(v) = self.alert_cooldown {
            cfg.alert_cooldown = v;
        }
        if let Some(v) = self.distraction_predicate {
            cfg.distraction_predicate = v.parse()?;
        }
        if let Some(v) = self.min_wrist_confidence {
            cfg.min_wrist_confidence = v;
        }
        if let Some(v) = self.sync_buffer_cap {
            cfg.sync_buffer_cap = v;
        }
        if let Some(v) = self.sync_timeout_periods {
            cfg.sync_timeout_periods = v;
        }
        if let Some(v) = self.unknown_is_distracting {
            cfg.unknown_is_distracting = v;
        }
        if let Some(rois) = self.seat_roi {
            for (view, [x0, y0, x1, y1]) in rois {
                cfg.seat_roi[view] = SeatRoi { x_min: x0, y_min: y0, x_max: x1, y_max: y1 };
            }
        }
        Ok(())
    }
}

impl From<&PipelineConfig> for ConfigFile {
    fn from(cfg: &PipelineConfig) -> Self {
        let predicate = match cfg.distraction_predicate {
            PredicateId::HandsOffWheelOrObject => "hands-off-wheel-or-object",
            PredicateId::AnyObject => "any-object",
            PredicateId::BothHandsOffWheel => "both-hands-off-wheel",
        };
        ConfigFile {
            crop_radius_px: Some(RadiusSetting::PerView(
                cfg.crop_radius_px.iter().map(|(v, r)| (v, *r)).collect(),
            )),
            sync_tolerance_us: Some(cfg.sync_tolerance_us),
            smoothing_window: Some(cfg.smoothing_window),
            alert_threshold: Some(cfg.alert_threshold),
            nominal_fps: Some(cfg.nominal_fps),
            alert_cooldown: Some(cfg.alert_cooldown),
            distraction_predicate: Some(predicate.to_string()),
            min_wrist_confidence: Some(cfg.min_wrist_confidence),
            sync_buffer_cap: Some(cfg.sync_buffer_cap),
            sync_timeout_periods: Some(cfg.sync_timeout_periods),
            unknown_is_distracting: Some(cfg.unknown_is_distracting),
            seat_roi: Some(
                cfg.seat_roi
                    .iter()
                    .map(|(v, r)| (v, [r.x_min, r.y_min, r.x_max, r.y_max]))
                    .collect(),
            ),
        }
    }
}
