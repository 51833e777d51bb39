//! End-to-end replay: manifest frames through synchronization, perception,
//! smoothing and alerting, scored against manifest ground truth.

use std::collections::HashMap;
use std::io;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::manifest::{Manifest, ManifestError, TickTruth};
use super::mock::{NoiseSpec, NoisyBackend, ScriptedBackend};
use crate::eval::ConfusionMatrix;
use crate::model::{
    admissible_classes, validate_config, ClassLabel, ConfigError, Frame, Hand, HandLabel, Micros, ModelError, ObjectClass,
    PerView, PipelineConfig, ViewId,
};
use crate::perception::{process_tick, InferenceBackend, PerceptionError, TickResult};
use crate::sync::{StreamStats, SyncError, SyncedFrameSet, Synchronizer};
use crate::temporal::{AlertEvent, AlertMachine, SmoothedState, Smoother};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Synchronized sets handed to the worker pool at a time.
const BATCH: usize = 256;

#[derive(Error, Debug)]
pub enum RunError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("frame: {0}")]
    Frame(#[from] ModelError),

    #[error(transparent)]
    Sync(#[from] SyncError),

    #[error("tick {tick}: {source}")]
    Perception { tick: u64, source: PerceptionError },

    #[error("event sink: {0}")]
    Sink(#[source] io::Error),
}

impl RunError {
    /// Whether the failure lies in the inputs rather than the pipeline.
    pub fn is_input_error(&self) -> bool {
        matches!(self, RunError::Manifest(_) | RunError::Config(_) | RunError::Frame(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackendSpec {
    Scripted,
    Noisy(NoiseSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandPair<T> {
    pub left: T,
    pub right: T,
}

impl<T> HandPair<T> {
    pub fn get(&self, hand: Hand) -> &T {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }

    fn get_mut(&mut self, hand: Hand) -> &mut T {
        match hand {
            Hand::Left => &mut self.left,
            Hand::Right => &mut self.right,
        }
    }
}

/// One synchronized tick as the pipeline saw it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickOutcome {
    pub tick: u64,
    /// Manifest record the set was matched to, by its first present frame.
    pub manifest_tick: Option<u64>,
    pub reference_timestamp_us: Micros,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_views: Vec<ViewId>,
    pub truth: Option<HandPair<HandLabel>>,
    pub predicted: HandPair<HandLabel>,
    pub smoothed: HandPair<HandLabel>,
    pub distracted: bool,
}

/// Scores for one hand, either on raw per-tick outputs or on smoothed ones.
///
/// `object.total() + unknown + unmatched = ticks with ground truth`, where
/// `unmatched` is the report-level count of truth ticks no set covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandScores {
    pub object: ConfusionMatrix,
    /// Ticks where both truth and prediction say the hand is empty.
    pub location: ConfusionMatrix,
    pub object_accuracy: Option<f64>,
    pub location_accuracy: Option<f64>,
    /// Agreement of the final two-stage label over evaluated ticks.
    pub label_accuracy: Option<f64>,
    pub evaluated: u64,
    pub label_correct: u64,
    pub unknown: u64,
    /// Evaluated ticks that did not reach the location matrix.
    pub location_not_evaluated: u64,
}

impl HandScores {
    fn new(hand: Hand) -> Self {
        HandScores {
            object: ConfusionMatrix::from_labels(ObjectClass::ALL),
            location: ConfusionMatrix::from_labels(admissible_classes(hand)),
            object_accuracy: None,
            location_accuracy: None,
            label_accuracy: None,
            evaluated: 0,
            label_correct: 0,
            unknown: 0,
            location_not_evaluated: 0,
        }
    }

    fn record(&mut self, truth: &super::manifest::HandTruth, predicted: Option<(ObjectClass, Option<HandLabel>)>) {
        let Some((object, label)) = predicted else {
            self.unknown += 1;
            return;
        };
        self.evaluated += 1;
        self.object.record(truth.object.name(), object.name());
        match label {
            Some(HandLabel::Location(loc)) if truth.object == ObjectClass::None => {
                self.location.record(truth.location.name(), loc.name())
            }
            _ => self.location_not_evaluated += 1,
        }
        if label == Some(truth.label()) {
            self.label_correct += 1;
        }
    }

    fn finish(&mut self) {
        self.object_accuracy = self.object.accuracy().ok();
        self.location_accuracy = self.location.accuracy().ok();
        self.label_accuracy = (self.evaluated > 0).then(|| self.label_correct as f64 / self.evaluated as f64);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_s: f64,
    pub ticks_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub manifest_ticks: u64,
    pub ticks_with_truth: u64,
    /// Truth ticks that no synchronized set was matched to.
    pub unmatched_truth_ticks: u64,
    pub raw: HandPair<HandScores>,
    pub smoothed: HandPair<HandScores>,
    pub alerts: Vec<AlertEvent>,
    pub stream_stats: StreamStats,
    pub ticks: Vec<TickOutcome>,
    /// Wall-clock figures; the only field that varies between identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }

    /// Whether every scored per-tick prediction equals ground truth.
    pub fn is_identity(&self) -> bool {
        [Hand::Left, Hand::Right].iter().all(|&h| {
            let s = self.raw.get(h);
            s.unknown == 0 && s.object.is_diagonal() && s.location.is_diagonal() && s.label_correct == s.evaluated
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Replay with one of the bundled mock backends.
pub fn run(manifest: &Manifest, cfg: &PipelineConfig, spec: BackendSpec) -> Result<RunReport, RunError> {
    run_with_events(manifest, cfg, spec, |_| Ok(()))
}

/// [`run`], reporting each alert to `on_event` as it fires.
pub fn run_with_events(
    manifest: &Manifest,
    cfg: &PipelineConfig,
    spec: BackendSpec,
    on_event: impl FnMut(&AlertEvent) -> io::Result<()>,
) -> Result<RunReport, RunError> {
    manifest.validate()?;
    let shared = Arc::new(manifest.clone());
    match spec {
        BackendSpec::Scripted => run_with(manifest, cfg, &ScriptedBackend::new(shared), on_event),
        BackendSpec::Noisy(noise) => run_with(manifest, cfg, &NoisyBackend::new(shared, noise), on_event),
    }
}

/// Replay `manifest` through any backend.
///
/// Perception runs on the rayon pool in batches; results are smoothed and
/// fed to the alert machine strictly in tick order.
pub fn run_with(
    manifest: &Manifest,
    cfg: &PipelineConfig,
    backend: &dyn InferenceBackend,
    mut on_event: impl FnMut(&AlertEvent) -> io::Result<()>,
) -> Result<RunReport, RunError> {
    let started = Instant::now();
    manifest.validate()?;
    let cfg = validate_config(cfg.clone())?;

    let templates: PerView<Frame> = {
        let res = manifest.header.resolution;
        let mut out = Vec::with_capacity(ViewId::COUNT);
        for &view in ViewId::ALL {
            out.push(Frame::blank(view, 0, res[view][0], res[view][1])?);
        }
        PerView::from_fn(|v| out[v.index()].clone())
    };
    let by_frame: HashMap<(ViewId, Micros), u64> = manifest
        .ticks
        .iter()
        .flat_map(|rec| rec.timestamps.iter().filter_map(move |(v, ts)| ts.map(|ts| ((v, ts), rec.tick))))
        .collect();

    let mut builder = ReportBuilder::new(manifest, &cfg);
    let mut sync = Synchronizer::from_config(&cfg);
    let mut pending: Vec<SyncedFrameSet> = Vec::with_capacity(BATCH * 2);

    let mut drain = |pending: &mut Vec<SyncedFrameSet>, builder: &mut ReportBuilder| -> Result<(), RunError> {
        let results: Vec<Result<TickResult, RunError>> = pending
            .par_iter()
            .map(|set| {
                process_tick(set, &cfg, backend).map_err(|source| RunError::Perception { tick: set.tick_index, source })
            })
            .collect();
        for (set, result) in pending.drain(..).zip(results) {
            let manifest_tick = set.present().next().and_then(|f| by_frame.get(&(f.view, f.timestamp_us)).copied());
            if let Some(event) = builder.push(&set, manifest_tick, result?) {
                on_event(&event).map_err(RunError::Sink)?;
            }
        }
        Ok(())
    };

    for rec in &manifest.ticks {
        for &view in ViewId::ALL {
            if let Some(ts) = rec.timestamps[view] {
                pending.extend(sync.ingest(templates[view].restamped(view, ts))?);
            }
        }
        if pending.len() >= BATCH {
            drain(&mut pending, &mut builder)?;
        }
    }
    pending.extend(sync.flush());
    drain(&mut pending, &mut builder)?;

    let mut report = builder.finish(sync.stats());
    let secs = started.elapsed().as_secs_f64();
    report.timing = Some(Timing {
        wall_clock_s: secs,
        ticks_per_second: if secs > 0.0 { report.ticks.len() as f64 / secs } else { 0.0 },
    });
    Ok(report)
}

/// Sequential fold over tick results in order.
struct ReportBuilder<'a> {
    manifest: &'a Manifest,
    smoother: Smoother,
    machine: AlertMachine,
    scored: Vec<bool>,
    raw: HandPair<HandScores>,
    smoothed: HandPair<HandScores>,
    alerts: Vec<AlertEvent>,
    ticks: Vec<TickOutcome>,
}

impl<'a> ReportBuilder<'a> {
    fn new(manifest: &'a Manifest, cfg: &PipelineConfig) -> Self {
        let scores = || HandPair { left: HandScores::new(Hand::Left), right: HandScores::new(Hand::Right) };
        ReportBuilder {
            manifest,
            smoother: Smoother::new(cfg.smoothing_window),
            machine: AlertMachine::from_config(cfg),
            scored: vec![false; manifest.ticks.len()],
            raw: scores(),
            smoothed: scores(),
            alerts: Vec::new(),
            ticks: Vec::new(),
        }
    }

    fn push(&mut self, set: &SyncedFrameSet, manifest_tick: Option<u64>, result: TickResult) -> Option<AlertEvent> {
        let predicted = HandPair { left: result.left.label, right: result.right.label };
        let raw_outputs = HandPair {
            left: result.left.object_probs.as_ref().map(|o| (o.argmax(), Some(result.left.label))),
            right: result.right.object_probs.as_ref().map(|o| (o.argmax(), Some(result.right.label))),
        };

        let state: SmoothedState = self.smoother.push(result);
        let distracted = self.machine.is_distracted(&state);
        let event = self.machine.advance(&state);
        if let Some(e) = &event {
            self.alerts.push(e.clone());
        }

        let truth: Option<&TickTruth> = manifest_tick
            .filter(|&t| !std::mem::replace(&mut self.scored[t as usize], true))
            .and_then(|t| self.manifest.ticks[t as usize].truth.as_ref());
        if let Some(truth) = truth {
            for hand in [Hand::Left, Hand::Right] {
                self.raw.get_mut(hand).record(truth.hand(hand), *raw_outputs.get(hand));
                let s = state.hand(hand);
                let smoothed_out = s.object_probs.as_ref().map(|o| (o.argmax(), Some(s.label)));
                self.smoothed.get_mut(hand).record(truth.hand(hand), smoothed_out);
            }
        }

        self.ticks.push(TickOutcome {
            tick: set.tick_index,
            manifest_tick,
            reference_timestamp_us: set.reference_timestamp_us,
            missing_views: set.missing(),
            truth: truth.map(|t| HandPair { left: t.left.label(), right: t.right.label() }),
            predicted,
            smoothed: HandPair { left: state.left.label, right: state.right.label },
            distracted,
        });
        event
    }

    fn finish(mut self, stream_stats: StreamStats) -> RunReport {
        let ticks_with_truth = self.manifest.ticks_with_truth() as u64;
        let scored = self
            .scored
            .iter()
            .zip(&self.manifest.ticks)
            .filter(|(s, rec)| **s && rec.truth.is_some())
            .count() as u64;
        for scores in [&mut self.raw, &mut self.smoothed] {
            scores.left.finish();
            scores.right.finish();
        }
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            manifest_ticks: self.manifest.ticks.len() as u64,
            ticks_with_truth,
            unmatched_truth_ticks: ticks_with_truth - scored,
            raw: self.raw,
            smoothed: self.smoothed,
            alerts: self.alerts,
            stream_stats,
            ticks: self.ticks,
            timing: None,
        }
    }
}
