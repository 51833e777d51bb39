//! Synthetic cabin layout: where each view sees the driver, any passenger,
//! and each wrist for every activity label. Loaded from
//! `data/wrist_layout.json`; all coordinates are fractions of the frame.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::model::{Hand, HandLabel, PerView, ViewId};
use crate::perception::BoundingBox;

const LAYOUT_JSON: &str = include_str!("../../data/wrist_layout.json");

#[derive(Debug, Clone, Copy, Deserialize)]
struct WristPair {
    left: [f64; 2],
    right: [f64; 2],
}

#[derive(Debug, Deserialize)]
pub struct CabinLayout {
    resolution: PerView<[u32; 2]>,
    driver_box: PerView<[f64; 4]>,
    passenger_box: BTreeMap<ViewId, [f64; 4]>,
    wrists: PerView<BTreeMap<String, WristPair>>,
}

impl CabinLayout {
    pub fn standard() -> &'static CabinLayout {
        static LAYOUT: OnceLock<CabinLayout> = OnceLock::new();
        LAYOUT.get_or_init(|| serde_json::from_str(LAYOUT_JSON).expect("embedded layout parses"))
    }

    pub fn resolution(&self) -> PerView<[u32; 2]> {
        self.resolution
    }

    /// Wrist position as frame fractions for a final label. `None` for
    /// `Unknown`.
    pub fn wrist_fraction(&self, view: ViewId, hand: Hand, label: HandLabel) -> Option<[f64; 2]> {
        let pair = self.wrists[view].get(label.name())?;
        Some(match hand {
            Hand::Left => pair.left,
            Hand::Right => pair.right,
        })
    }

    pub fn driver_box(&self, view: ViewId, width: u32, height: u32, confidence: f64) -> BoundingBox {
        scale(self.driver_box[view], width, height, confidence)
    }

    pub fn passenger_box(&self, view: ViewId, width: u32, height: u32, confidence: f64) -> Option<BoundingBox> {
        self.passenger_box.get(&view).map(|&b| scale(b, width, height, confidence))
    }
}

fn scale([x0, y0, x1, y1]: [f64; 4], width: u32, height: u32, confidence: f64) -> BoundingBox {
    let (w, h) = (width as f64, height as f64);
    BoundingBox::new(x0 * w, y0 * h, x1 * w, y1 * h, confidence).expect("layout boxes are well formed")
}
