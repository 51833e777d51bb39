//! Scenario scripts and the synthetic manifest generator.
//!
//! A script is a list of segments, each holding one activity per hand for
//! a number of frames, with optional per-view drop probabilities and
//! timestamp jitter. Scripts are written in TOML:
//!
//! ```toml
//! fps = 30.0
//! seed = 7
//!
//! [[segment]]
//! frames = 300
//! left = "Wheel"
//! right = "Wheel"
//!
//! [[segment]]
//! frames = 180
//! left = "Wheel"
//! right = "Phone"          # held object; the hand's location defaults to Air
//! drop = { MirrorCam = 0.1 }
//! jitter_us = 2000
//! ```
//!
//! An activity is a location (`"Lap"`), a held object (`"Phone"`), or an
//! object at an explicit location (`"Phone@Lap"`).
//!
//! Generation draws from one [`SeededRng`] per segment (seed = segment seed
//! or script seed, stream = segment index). For every tick and every view in
//! [`ViewId`] order it draws `unit()` for the drop decision, then, when the
//! segment has jitter `j > 0`, `below(2j + 1) - j` as the offset. The
//! timestamp is `round(tick * 1e6 / fps) + offset`, raised if needed to
//! stay strictly after the view's previous timestamp.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::layout::CabinLayout;
use super::manifest::{HandTruth, Manifest, ManifestHeader, TickRecord, TickTruth, MANIFEST_SCHEMA_VERSION};
use super::rng::SeededRng;
use crate::model::{admissible_classes, ClassLabel, Hand, LocationClass, Micros, ObjectClass, PerView, ViewId};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ScriptError {
    #[error("script parse error: {0}")]
    Parse(String),

    #[error("segment {segment}: {message}")]
    Segment { segment: usize, message: String },

    #[error("{0}")]
    Invalid(String),
}

/// What one hand does during a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandActivity {
    pub object: ObjectClass,
    pub location: LocationClass,
}

impl HandActivity {
    pub fn at(location: LocationClass) -> Self {
        HandActivity { object: ObjectClass::None, location }
    }

    /// A held object, with the hand up in the air.
    pub fn holding(object: ObjectClass) -> Self {
        HandActivity { object, location: LocationClass::Air }
    }
}

impl FromStr for HandActivity {
    type Err = ScriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScriptError::Invalid(format!("unknown activity `{s}`"));
        if let Some((obj, loc)) = s.split_once('@') {
            let object = <ObjectClass as ClassLabel>::parse(obj.trim()).ok_or_else(bad)?;
            let location = <LocationClass as ClassLabel>::parse(loc.trim()).ok_or_else(bad)?;
            return Ok(HandActivity { object, location });
        }
        if let Some(l) = <LocationClass as ClassLabel>::parse(s.trim()) {
            return Ok(HandActivity::at(l));
        }
        match <ObjectClass as ClassLabel>::parse(s.trim()) {
            Some(ObjectClass::None) | None => Err(bad()),
            Some(o) => Ok(HandActivity::holding(o)),
        }
    }
}

impl fmt::Display for HandActivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.object {
            ObjectClass::None => write!(f, "{}", self.location),
            o if self.location == LocationClass::Air => write!(f, "{o}"),
            o => write!(f, "{o}@{}", self.location),
        }
    }
}

impl Serialize for HandActivity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HandActivity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Drop probability for every view, or per view (unlisted views: 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DropSpec {
    All(f64),
    PerView(BTreeMap<ViewId, f64>),
}

impl Default for DropSpec {
    fn default() -> Self {
        DropSpec::All(0.0)
    }
}

impl DropSpec {
    pub fn probability(&self, view: ViewId) -> f64 {
        match self {
            DropSpec::All(p) => *p,
            DropSpec::PerView(map) => map.get(&view).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub frames: u64,
    pub left: HandActivity,
    pub right: HandActivity,
    #[serde(default)]
    pub drop: DropSpec,
    #[serde(default)]
    pub jitter_us: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Segment {
    pub fn steady(frames: u64, left: HandActivity, right: HandActivity) -> Self {
        Segment { frames, left, right, drop: DropSpec::default(), jitter_us: 0, seed: None }
    }
}

fn default_fps() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub seed: u64,
    /// `[width, height]` per view; defaults to the cabin layout's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<PerView<[u32; 2]>>,
    #[serde(rename = "segment")]
    pub segments: Vec<Segment>,
}

impl ScenarioScript {
    pub fn new(fps: f64, seed: u64, segments: Vec<Segment>) -> Self {
        ScenarioScript { fps, seed, resolution: None, segments }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScriptError> {
        let script: ScenarioScript = toml::from_str(text).map_err(|e| ScriptError::Parse(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }

    pub fn total_frames(&self) -> u64 {
        self.segments.iter().map(|s| s.frames).sum()
    }

    pub fn validate(&self) -> Result<(), ScriptError> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(ScriptError::Invalid("fps must be positive".into()));
        }
        if self.segments.is_empty() {
            return Err(ScriptError::Invalid("script has no segments".into()));
        }
        if let Some(res) = &self.resolution {
            if res.iter().any(|(_, r)| r[0] == 0 || r[1] == 0) {
                return Err(ScriptError::Invalid("resolution must be positive".into()));
            }
        }
        let period = 1e6 / self.fps;
        for (i, seg) in self.segments.iter().enumerate() {
            let fail = |message: String| ScriptError::Segment { segment: i, message };
            if seg.frames == 0 {
                return Err(fail("frames must be positive".into()));
            }
            for &view in ViewId::ALL {
                let p = seg.drop.probability(view);
                if !(0.0..=1.0).contains(&p) {
                    return Err(fail(format!("drop probability {p} for {view} outside [0, 1]")));
                }
            }
            // keeps jittered neighbours from falling inside one another's
            // sync window
            if seg.jitter_us as f64 >= period / 4.0 {
                return Err(fail(format!("jitter {} us must stay below a quarter frame period", seg.jitter_us)));
            }
            if !admissible_classes(Hand::Left).contains(&seg.left.location) {
                return Err(fail(format!("{} is not a left-hand location", seg.left.location)));
            }
        }
        Ok(())
    }
}

/// Build the manifest a script describes. Deterministic in the script.
pub fn generate(script: &ScenarioScript) -> Result<Manifest, ScriptError> {
    script.validate()?;
    let layout = CabinLayout::standard();
    let resolution = script.resolution.unwrap_or_else(|| layout.resolution());

    let wrists_for = |hand: Hand, activity: HandActivity| -> PerView<Option<[f64; 2]>> {
        let label = HandTruth { object: activity.object, location: activity.location, wrists: PerView::default() }
            .label();
        PerView::from_fn(|view| {
            let [w, h] = resolution[view];
            layout
                .wrist_fraction(view, hand, label)
                .map(|[fx, fy]| [(fx * w as f64).round(), (fy * h as f64).round()])
        })
    };

    let mut ticks = Vec::with_capacity(script.total_frames() as usize);
    let mut last: PerView<Option<Micros>> = PerView::default();
    let mut tick = 0u64;
    for (index, seg) in script.segments.iter().enumerate() {
        let mut rng = SeededRng::new(seg.seed.unwrap_or(script.seed), index as u64);
        let truth = TickTruth {
            left: HandTruth { object: seg.left.object, location: seg.left.location, wrists: wrists_for(Hand::Left, seg.left) },
            right: HandTruth {
                object: seg.right.object,
                location: seg.right.location,
                wrists: wrists_for(Hand::Right, seg.right),
            },
        };
        for _ in 0..seg.frames {
            let nominal = (tick as f64 * 1e6 / script.fps).round() as i64;
            let mut timestamps: PerView<Option<Micros>> = PerView::default();
            for &view in ViewId::ALL {
                let dropped = rng.chance(seg.drop.probability(view));
                let offset = if seg.jitter_us > 0 {
                    rng.below(2 * seg.jitter_us + 1) as i64 - seg.jitter_us as i64
                } else {
                    0
                };
                if dropped {
                    continue;
                }
                let mut ts = (nominal + offset).max(0) as Micros;
                if let Some(prev) = last[view] {
                    ts = ts.max(prev + 1);
                }
                last[view] = Some(ts);
                timestamps[view] = Some(ts);
            }
            ticks.push(TickRecord { tick, timestamps, truth: Some(truth.clone()), images: None });
            tick += 1;
        }
    }

    Ok(Manifest {
        header: ManifestHeader {
            schema_version: MANIFEST_SCHEMA_VERSION,
            fps: script.fps,
            views: ViewId::ALL.to_vec(),
            resolution,
            seed: Some(script.seed),
        },
        ticks,
    })
}
