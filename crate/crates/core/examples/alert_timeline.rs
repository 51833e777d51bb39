//! Feed one-hot per-tick classifications through the smoother and alert
//! machine and print when alerts fire.
//!
//! ```text
//! cargo run --example alert_timeline
//! ```

use smart_hands::perception::{HandState, TickDiagnostics};
use smart_hands::temporal::{AlertMachine, Smoother};
use smart_hands::{
    ClassLabel, Hand, HandLabel, LocationClass, ObjectClass, PipelineConfig, ProbVector, TickResult,
};

fn hand_state(hand: Hand, label: HandLabel) -> HandState {
    let object = match label {
        HandLabel::Object(o) => o,
        _ => ObjectClass::None,
    };
    let object_probs = ProbVector::one_hot(ObjectClass::ALL, object).unwrap();
    let location_probs = match label {
        HandLabel::Location(l) => Some(ProbVector::one_hot(smart_hands::admissible_classes(hand), l).unwrap()),
        _ => None,
    };
    HandState { hand, object_probs: Some(object_probs), location_probs, label }
}

fn tick(i: u64, right: HandLabel) -> TickResult {
    TickResult {
        tick_index: i,
        reference_timestamp_us: i * 33_333,
        left: hand_state(Hand::Left, HandLabel::Location(LocationClass::Wheel)),
        right: hand_state(Hand::Right, right),
        diagnostics: TickDiagnostics::default(),
    }
}

/// Onset ticks for a wheel / phone / wheel timeline.
fn onsets(phone_ticks: u64, cfg: &PipelineConfig) -> Vec<u64> {
    let mut smoother = Smoother::new(cfg.smoothing_window);
    let mut machine = AlertMachine::from_config(cfg);
    let wheel = HandLabel::Location(LocationClass::Wheel);
    let phone = HandLabel::Object(ObjectClass::Phone);
    (0..300 + phone_ticks + 300)
        .filter_map(|i| {
            let label = if (300..300 + phone_ticks).contains(&i) { phone } else { wheel };
            machine.advance(&smoother.push(tick(i, label)))
        })
        .map(|e| e.onset_tick)
        .collect()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PipelineConfig::default();
    println!(
        "window {}, threshold {} ticks ({:.1} s at {} fps), cooldown {}",
        cfg.smoothing_window,
        cfg.alert_threshold,
        cfg.alert_threshold as f64 / cfg.nominal_fps,
        cfg.nominal_fps,
        cfg.alert_cooldown
    );
    for phone in [60, 149, 150, 180, 600, 1200] {
        let fired = onsets(phone, &cfg);
        let into_call: Vec<u64> = fired.iter().map(|t| t - 300).collect();
        println!("phone for {phone:>4} ticks -> {} alert(s), at call ticks {into_call:?}", fired.len());
    }
    assert_eq!(onsets(180, &cfg), vec![450]);
    assert!(onsets(149, &cfg).is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
