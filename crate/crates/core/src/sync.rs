//! Multi-view frame synchronization.
//!
//! Frames from the four cameras arrive independently. The [`Synchronizer`]
//! buffers them per view and emits a [`SyncedFrameSet`] once every view is
//! either represented by a frame within the sync tolerance of the earliest
//! buffered frame (the anchor), or provably absent: its newest timestamp is
//! already past the tolerance window. If some view is still undecided after
//! the timeout has elapsed in stream time, the set is emitted with that view
//! listed as missing.
//!
//! Per view, `ingested = accepted + dropped_late + dropped_duplicate +
//! buffered` holds at all times; after [`Synchronizer::flush`] nothing is
//! buffered.
//!
//! A frame whose timestamp falls at or before `last reference + tolerance`
//! could only have belonged to an already emitted set; it is counted as
//! dropped-late.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClassLabel, Frame, Micros, PerView, PipelineConfig, ViewId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SyncError {
    #[error("{view} frame at {timestamp_us} us precedes previous frame at {previous_us} us")]
    OutOfOrderFrame { view: ViewId, timestamp_us: Micros, previous_us: Micros },

    #[error("{view} buffer is full ({cap} frames)")]
    BufferOverflow { view: ViewId, cap: usize },
}

/// Frames from all views aligned to one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncedFrameSet {
    pub tick_index: u64,
    /// Timestamp of the earliest frame in the set.
    pub reference_timestamp_us: Micros,
    pub frames: PerView<Option<Frame>>,
}

impl SyncedFrameSet {
    pub fn missing(&self) -> Vec<ViewId> {
        self.frames.iter().filter(|(_, f)| f.is_none()).map(|(v, _)| v).collect()
    }

    pub fn present(&self) -> impl Iterator<Item = &Frame> {
        self.frames.0.iter().flatten()
    }

    pub fn frame(&self, view: ViewId) -> Option<&Frame> {
        self.frames[view].as_ref()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCounts {
    pub ingested: u64,
    /// Frames delivered inside an emitted set.
    pub accepted: u64,
    pub dropped_late: u64,
    pub dropped_duplicate: u64,
}

impl ViewCounts {
    pub fn dropped(&self) -> u64 {
        self.dropped_late + self.dropped_duplicate
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamStats {
    pub views: PerView<ViewCounts>,
    pub sets_emitted: u64,
    pub sets_with_missing: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncSettings {
    pub tolerance_us: Micros,
    pub timeout_us: Micros,
    pub buffer_cap: usize,
}

impl From<&PipelineConfig> for SyncSettings {
    fn from(cfg: &PipelineConfig) -> Self {
        SyncSettings {
            tolerance_us: cfg.sync_tolerance_us,
            timeout_us: cfg.sync_timeout_us(),
            buffer_cap: cfg.sync_buffer_cap,
        }
    }
}

impl Default for SyncSettings {
    fn default() -> Self {
        SyncSettings::from(&PipelineConfig::default())
    }
}

/// Single-writer frame aligner. Callers serialize `ingest`.
#[derive(Debug)]
pub struct Synchronizer {
    settings: SyncSettings,
    buffers: PerView<VecDeque<Frame>>,
    last_seen: PerView<Option<Micros>>,
    last_reference: Option<Micros>,
    next_tick: u64,
    stats: StreamStats,
}

impl Synchronizer {
    pub fn new(settings: SyncSettings) -> Self {
        Synchronizer {
            settings,
            buffers: PerView::default(),
            last_seen: PerView::default(),
            last_reference: None,
            next_tick: 0,
            stats: StreamStats::default(),
        }
    }

    pub fn from_config(cfg: &PipelineConfig) -> Self {
        Synchronizer::new(SyncSettings::from(cfg))
    }

    pub fn settings(&self) -> SyncSettings {
        self.settings
    }

    /// Feed one frame and collect every set that became complete.
    ///
    /// Rejected frames (errors) are not counted as ingested.
    pub fn ingest(&mut self, frame: Frame) -> Result<Vec<SyncedFrameSet>, SyncError> {
        let view = frame.view;
        let ts = frame.timestamp_us;
        if let Some(prev) = self.last_seen[view] {
            if ts < prev {
                return Err(SyncError::OutOfOrderFrame { view, timestamp_us: ts, previous_us: prev });
            }
        }
        let duplicate = self.last_seen[view] == Some(ts);
        let late = self.is_late(ts);
        if !duplicate && !late && self.buffers[view].len() >= self.settings.buffer_cap {
            return Err(SyncError::BufferOverflow { view, cap: self.settings.buffer_cap });
        }

        self.last_seen[view] = Some(ts);
        let counts = &mut self.stats.views[view];
        counts.ingested += 1;
        if duplicate {
            counts.dropped_duplicate += 1;
        } else if late {
            counts.dropped_late += 1;
        } else {
            self.buffers[view].push_back(frame);
        }
        Ok(self.drain(false))
    }

    /// Emit everything still buffered, in order. Call at end of stream.
    pub fn flush(&mut self) -> Vec<SyncedFrameSet> {
        self.drain(true)
    }

    pub fn stats(&self) -> StreamStats {
        self.stats
    }

    /// Frames ingested but not yet emitted or dropped.
    pub fn buffered(&self, view: ViewId) -> usize {
        self.buffers[view].len()
    }

    fn is_late(&self, ts: Micros) -> bool {
        self.last_reference
            .is_some_and(|r| ts <= r.saturating_add(self.settings.tolerance_us))
    }

    fn drain(&mut self, force: bool) -> Vec<SyncedFrameSet> {
        let mut out = Vec::new();
        while let Some(set) = self.try_emit(force) {
            out.push(set);
        }
        out
    }

    fn try_emit(&mut self, force: bool) -> Option<SyncedFrameSet> {
        let anchor = self.buffers.0.iter().filter_map(|b| b.front()).map(|f| f.timestamp_us).min()?;
        let window_end = anchor.saturating_add(self.settings.tolerance_us);

        let resolved = ViewId::ALL.iter().all(|&v| {
            let in_window = self.buffers[v].front().is_some_and(|f| f.timestamp_us <= window_end);
            let past_window = self.last_seen[v].is_some_and(|t| t > window_end);
            in_window || past_window
        });
        let now = self.last_seen.0.iter().flatten().copied().max().unwrap_or(anchor);
        let timed_out = now.saturating_sub(anchor) >= self.settings.timeout_us;
        if !(resolved || timed_out || force) {
            return None;
        }

        let mut frames: PerView<Option<Frame>> = PerView::default();
        for view in ViewId::ALL.iter().copied() {
            let buffer = &mut self.buffers[view];
            if buffer.front().is_some_and(|f| f.timestamp_us <= window_end) {
                frames[view] = buffer.pop_front();
                self.stats.views[view].accepted += 1;
            }
            // anything else inside the window can no longer be emitted
            while buffer.front().is_some_and(|f| f.timestamp_us <= window_end) {
                buffer.pop_front();
                self.stats.views[view].dropped_late += 1;
            }
        }

        let set = SyncedFrameSet { tick_index: self.next_tick, reference_timestamp_us: anchor, frames };
        self.next_tick += 1;
        self.last_reference = Some(anchor);
        self.stats.sets_emitted += 1;
        if set.frames.0.iter().any(Option::is_none) {
            self.stats.sets_with_missing += 1;
        }
        Some(set)
    }
}
