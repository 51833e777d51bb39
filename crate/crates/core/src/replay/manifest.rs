//! Replay manifests: a header line followed by one JSON object per tick.
//!
//! ```text
//! {"schema_version":1,"fps":30.0,"views":[...],"resolution":{...},"seed":7}
//! {"tick":0,"timestamps":{"WheelCam":0,...},"truth":{"left":{...},"right":{...}}}
//! ```

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{admissible_classes, ClassLabel, Hand, HandLabel, LocationClass, Micros, ObjectClass, PerView, ViewId};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Error, Debug)]
pub enum ManifestError {
    /// `record` is the 0-based line number; the header is record 0.
    #[error("manifest record {record}: {message}")]
    Record { record: usize, message: String },

    #[error("manifest is empty")]
    Empty,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ManifestError {
    fn at(record: usize, message: impl Into<String>) -> Self {
        ManifestError::Record { record, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub schema_version: u32,
    pub fps: f64,
    pub views: Vec<ViewId>,
    /// `[width, height]` per view.
    pub resolution: PerView<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandTruth {
    pub object: ObjectClass,
    pub location: LocationClass,
    /// Wrist pixel position per view; `None` where the wrist is hidden.
    pub wrists: PerView<Option<[f64; 2]>>,
}

impl HandTruth {
    /// The label the two-stage decision should produce.
    pub fn label(&self) -> HandLabel {
        match self.object {
            ObjectClass::None => HandLabel::Location(self.location),
            held => HandLabel::Object(held),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickTruth {
    pub left: HandTruth,
    pub right: HandTruth,
}

impl TickTruth {
    pub fn hand(&self, hand: Hand) -> &HandTruth {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Capture time per view; `None` for a dropped frame.
    pub timestamps: PerView<Option<Micros>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TickTruth>,
    /// Optional image file per view. Synthetic manifests carry none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<PerView<Option<String>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub ticks: Vec<TickRecord>,
}

impl Manifest {
    pub fn ticks_with_truth(&self) -> usize {
        self.ticks.iter().filter(|t| t.truth.is_some()).count()
    }

    /// Check ordering, taxonomy and coordinate invariants.
    pub fn validate(&self) -> Result<(), ManifestError> {
        let h = &self.header;
        if h.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(ManifestError::at(0, format!("unsupported schema_version {}", h.schema_version)));
        }
        if !(h.fps.is_finite() && h.fps > 0.0) {
            return Err(ManifestError::at(0, "fps must be positive"));
        }
        if let Some((v, _)) = h.resolution.iter().find(|(_, r)| r[0] == 0 || r[1] == 0) {
            return Err(ManifestError::at(0, format!("zero resolution for {v}")));
        }
        let mut last: PerView<Option<Micros>> = PerView::default();
        for (i, rec) in self.ticks.iter().enumerate() {
            let record = i + 1;
            if rec.tick != i as u64 {
                return Err(ManifestError::at(record, format!("expected tick {i}, found {}", rec.tick)));
            }
            for &view in ViewId::ALL {
                if let Some(ts) = rec.timestamps[view] {
                    if last[view].is_some_and(|prev| ts < prev) {
                        return Err(ManifestError::at(record, format!("{view} timestamp decreases")));
                    }
                    last[view] = Some(ts);
                }
            }
            if let Some(truth) = &rec.truth {
                for hand in [Hand::Left, Hand::Right] {
                    let t = truth.hand(hand);
                    if !admissible_classes(hand).contains(&t.location) {
                        return Err(ManifestError::at(
                            record,
                            format!("{} is not a {hand:?}-hand location", t.location),
                        ));
                    }
                    for (view, wrist) in t.wrists.iter() {
                        let [w, hgt] = h.resolution[view];
                        if let Some([x, y]) = wrist {
                            let inside = (0.0..w as f64).contains(x) && (0.0..hgt as f64).contains(y);
                            if !inside {
                                return Err(ManifestError::at(
                                    record,
                                    format!("{hand:?} wrist ({x}, {y}) outside {view} frame"),
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for rec in &self.ticks {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// Parse and validate. Blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, ManifestError> {
        let mut header: Option<ManifestHeader> = None;
        let mut ticks = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if header.is_none() {
                header = Some(serde_json::from_str(&line).map_err(|e| ManifestError::at(i, e.to_string()))?);
            } else {
                ticks.push(serde_json::from_str(&line).map_err(|e| ManifestError::at(i, e.to_string()))?);
            }
        }
        let manifest = Manifest { header: header.ok_or(ManifestError::Empty)?, ticks };
        manifest.validate()?;
        Ok(manifest)
    }
}
