//! Temporal stage: moving-window smoothing of per-tick classifications and
//! the sustained-distraction alert state machine.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{
    ClassLabel, Hand, HandLabel, LocationClass, Micros, ObjectClass, PipelineConfig, PredicateId, ProbVector,
    PROB_SUM_TOLERANCE,
};
use crate::perception::{two_stage_label, HandState, TickResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedHand {
    pub object_probs: Option<ProbVector<ObjectClass>>,
    pub location_probs: Option<ProbVector<LocationClass>>,
    pub label: HandLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedState {
    pub tick_index: u64,
    pub reference_timestamp_us: Micros,
    pub left: SmoothedHand,
    pub right: SmoothedHand,
}

impl SmoothedState {
    pub fn hand(&self, hand: Hand) -> &SmoothedHand {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }
}

/// Element-wise arithmetic mean as a running mean, oldest first:
/// `m_1 = v_1`, `m_k = m_{k-1} + (v_k - m_{k-1}) / k`. Identical inputs
/// give back exactly the input. Renormalized only if the mean drifts more
/// than the probability-sum tolerance from 1.
pub fn mean_vector<L: ClassLabel>(vectors: &[&ProbVector<L>]) -> Option<ProbVector<L>> {
    let first = vectors.first()?;
    let mut means: Vec<f64> = first.probs().collect();
    for (k, v) in vectors.iter().enumerate().skip(1) {
        assert!(v.labels().eq(first.labels()), "averaging vectors over different label sets");
        let n = (k + 1) as f64;
        for (m, p) in means.iter_mut().zip(v.probs()) {
            *m += (p - *m) / n;
        }
    }
    let total: f64 = means.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
        means.iter_mut().for_each(|m| *m /= total);
    }
    Some(ProbVector::from_entries_unchecked(first.labels().zip(means).collect()))
}

fn smooth_hand<'a>(states: impl Iterator<Item = &'a HandState> + Clone) -> SmoothedHand {
    let objects: Vec<_> = states.clone().filter_map(|s| s.object_probs.as_ref()).collect();
    let locations: Vec<_> = states.filter_map(|s| s.location_probs.as_ref()).collect();
    let object_probs = mean_vector(&objects);
    let location_probs = mean_vector(&locations);
    let label = match &object_probs {
        Some(o) => two_stage_label(o, location_probs.as_ref()),
        None => HandLabel::Unknown,
    };
    SmoothedHand { object_probs, location_probs, label }
}

/// Average the last `window` ticks of `history` (fewer at stream start).
///
/// Per hand and per stage, the mean runs over the ticks that produced that
/// distribution; `Unknown` ticks contribute nothing. The label is the
/// two-stage decision on the averaged vectors.
pub fn smooth(history: &[TickResult], window: usize) -> SmoothedState {
    assert!(window >= 1, "smoothing window must be at least 1");
    let latest = history.last().expect("smoothing needs at least one tick");
    let recent = &history[history.len().saturating_sub(window)..];
    SmoothedState {
        tick_index: latest.tick_index,
        reference_timestamp_us: latest.reference_timestamp_us,
        left: smooth_hand(recent.iter().map(|t| &t.left)),
        right: smooth_hand(recent.iter().map(|t| &t.right)),
    }
}

/// Streaming form of [`smooth`]: keeps the last `window` ticks.
#[derive(Debug, Clone)]
pub struct Smoother {
    window: usize,
    history: VecDeque<TickResult>,
}

impl Smoother {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "smoothing window must be at least 1");
        Smoother { window, history: VecDeque::with_capacity(window) }
    }

    pub fn push(&mut self, tick: TickResult) -> SmoothedState {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(tick);
        smooth(self.history.make_contiguous(), self.window)
    }
}

/// Either hand holds an object, or neither hand is on the wheel.
pub fn default_predicate(left: HandLabel, right: HandLabel) -> bool {
    let on_wheel = |l| l == HandLabel::Location(LocationClass::Wheel);
    left.is_object() || right.is_object() || (!on_wheel(left) && !on_wheel(right))
}

/// A named predicate together with the policy for `Unknown` hands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistractionPredicate {
    pub id: PredicateId,
    /// When false an `Unknown` hand is treated as resting on the wheel;
    /// when true, as off the wheel and empty.
    pub unknown_is_distracting: bool,
}

impl DistractionPredicate {
    pub fn from_config(cfg: &PipelineConfig) -> Self {
        DistractionPredicate { id: cfg.distraction_predicate, unknown_is_distracting: cfg.unknown_is_distracting }
    }

    pub fn evaluate(&self, left: HandLabel, right: HandLabel) -> bool {
        let resolve = |l| match l {
            HandLabel::Unknown if self.unknown_is_distracting => HandLabel::Location(LocationClass::Air),
            HandLabel::Unknown => HandLabel::Location(LocationClass::Wheel),
            other => other,
        };
        let (left, right) = (resolve(left), resolve(right));
        let off_wheel = |l| l != HandLabel::Location(LocationClass::Wheel);
        match self.id {
            PredicateId::HandsOffWheelOrObject => default_predicate(left, right),
            PredicateId::AnyObject => left.is_object() || right.is_object(),
            PredicateId::BothHandsOffWheel => off_wheel(left) && off_wheel(right),
        }
    }
}

impl Default for DistractionPredicate {
    fn default() -> Self {
        DistractionPredicate::from_config(&PipelineConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertState {
    Monitoring,
    Tracking,
    Alerted,
}

/// Sustained-distraction alert. Emitted on the tick the consecutive
/// distracted count reaches the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub onset_tick: u64,
    pub onset_timestamp_us: Micros,
    pub left_label: HandLabel,
    pub right_label: HandLabel,
    pub duration_frames: u32,
}

/// Counter-with-cooldown state machine.
///
/// Monitoring/Tracking: a distracted tick increments the counter, a clean
/// tick resets it to zero. Reaching the threshold emits one event and
/// enters Alerted for `cooldown` ticks. Alerted returns to Monitoring with
/// a zero counter when the cooldown runs out or on the first clean tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlertMachine {
    pub state: AlertState,
    pub consecutive_distracted: u32,
    pub cooldown_remaining: u32,
    pub threshold: u32,
    pub cooldown: u32,
    pub predicate: DistractionPredicate,
}

impl AlertMachine {
    pub fn new(threshold: u32, cooldown: u32, predicate: DistractionPredicate) -> Self {
        assert!(threshold >= 1, "alert threshold must be at least 1");
        AlertMachine {
            state: AlertState::Monitoring,
            consecutive_distracted: 0,
            cooldown_remaining: 0,
            threshold,
            cooldown,
            predicate,
        }
    }

    pub fn from_config(cfg: &PipelineConfig) -> Self {
        AlertMachine::new(cfg.alert_threshold, cfg.alert_cooldown, DistractionPredicate::from_config(cfg))
    }

    pub fn is_distracted(&self, state: &SmoothedState) -> bool {
        self.predicate.evaluate(state.left.label, state.right.label)
    }

    pub fn step(&self, state: &SmoothedState) -> (AlertMachine, Option<AlertEvent>) {
        let mut next = *self;
        let event = next.advance(state);
        (next, event)
    }

    /// In-place form of [`AlertMachine::step`].
    pub fn advance(&mut self, state: &SmoothedState) -> Option<AlertEvent> {
        let distracted = self.is_distracted(state);
        if !distracted {
            self.state = AlertState::Monitoring;
            self.consecutive_distracted = 0;
            self.cooldown_remaining = 0;
            return None;
        }
        match self.state {
            AlertState::Alerted => {
                self.cooldown_remaining = self.cooldown_remaining.saturating_sub(1);
                if self.cooldown_remaining == 0 {
                    self.state = AlertState::Monitoring;
                    self.consecutive_distracted = 0;
                }
                None
            }
            AlertState::Monitoring | AlertState::Tracking => {
                self.consecutive_distracted += 1;
                if self.consecutive_distracted < self.threshold {
                    self.state = AlertState::Tracking;
                    return None;
                }
                self.state = AlertState::Alerted;
                self.cooldown_remaining = self.cooldown;
                if self.cooldown_remaining == 0 {
                    self.state = AlertState::Monitoring;
                    self.consecutive_distracted = 0;
                }
                Some(AlertEvent {
                    onset_tick: state.tick_index,
                    onset_timestamp_us: state.reference_timestamp_us,
                    left_label: state.left.label,
                    right_label: state.right.label,
                    duration_frames: self.threshold,
                })
            }
        }
    }
}
