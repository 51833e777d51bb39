mod common;

use common::*;
use proptest::prelude::*;
use smart_hands::temporal::{default_predicate, AlertMachine, AlertState, DistractionPredicate, Smoother};
use smart_hands::{
    admissible_classes, ClassLabel, Hand, HandLabel, LocationClass, ObjectClass, PipelineConfig, PredicateId,
};

fn all_labels(hand: Hand) -> Vec<HandLabel> {
    admissible_classes(hand)
        .iter()
        .map(|&l| HandLabel::Location(l))
        .chain(ObjectClass::ALL[1..].iter().map(|&o| HandLabel::Object(o)))
        .collect()
}

fn run_machine(flags: &[bool], threshold: u32, cooldown: u32) -> Vec<u64> {
    // drive the machine with labels chosen to make the predicate match `flags`
    let wheel = HandLabel::Location(LocationClass::Wheel);
    let phone = HandLabel::Object(ObjectClass::Phone);
    let mut machine = AlertMachine::new(threshold, cooldown, DistractionPredicate::default());
    let mut smoother = Smoother::new(1);
    let mut out = Vec::new();
    for (t, &d) in flags.iter().enumerate() {
        let right = if d { phone } else { wheel };
        let state = smoother.push(tick_result(t as u64, &one_hot_raw(Hand::Left, wheel), &one_hot_raw(Hand::Right, right)));
        if let Some(e) = machine.advance(&state) {
            out.push(e.onset_tick);
        }
        assert!(machine.consecutive_distracted <= threshold);
        assert!(machine.cooldown_remaining == 0 || machine.state == AlertState::Alerted);
    }
    out
}

#[test]
fn predicate_truth_table() {
    for l in all_labels(Hand::Left) {
        for r in all_labels(Hand::Right) {
            assert_eq!(default_predicate(l, r), distracted(l, r), "{l} / {r}");
        }
    }
    let loc = HandLabel::Location;
    assert!(!default_predicate(loc(LocationClass::Wheel), loc(LocationClass::Wheel)));
    assert!(default_predicate(loc(LocationClass::Wheel), HandLabel::Object(ObjectClass::Phone)));
    assert!(default_predicate(loc(LocationClass::Lap), loc(LocationClass::Cupholder)));
    assert!(!default_predicate(loc(LocationClass::Wheel), loc(LocationClass::Cupholder)));
}

#[test]
fn alternative_predicates() {
    let loc = HandLabel::Location;
    let any_object = DistractionPredicate { id: PredicateId::AnyObject, unknown_is_distracting: false };
    assert!(!any_object.evaluate(loc(LocationClass::Lap), loc(LocationClass::Air)));
    assert!(any_object.evaluate(loc(LocationClass::Wheel), HandLabel::Object(ObjectClass::Tablet)));
    let both_off = DistractionPredicate { id: PredicateId::BothHandsOffWheel, unknown_is_distracting: false };
    assert!(!both_off.evaluate(loc(LocationClass::Wheel), HandLabel::Object(ObjectClass::Phone)));
    assert!(both_off.evaluate(loc(LocationClass::Lap), HandLabel::Object(ObjectClass::Phone)));
    let strict = DistractionPredicate { id: PredicateId::HandsOffWheelOrObject, unknown_is_distracting: true };
    assert!(strict.evaluate(HandLabel::Unknown, HandLabel::Unknown));
    assert!(!DistractionPredicate::default().evaluate(HandLabel::Unknown, HandLabel::Unknown));
}

#[test]
fn threshold_reached_on_tick_150() {
    assert_eq!(run_machine(&[true; 150], 150, 300), vec![149]);
    assert!(run_machine(&[true; 149], 150, 300).is_empty());
}

#[test]
fn hard_reset_between_bursts() {
    let mut flags = vec![true; 149];
    flags.push(false);
    flags.extend([true; 149]);
    assert!(run_machine(&flags, 150, 300).is_empty());
}

#[test]
fn clean_tick_on_fresh_machine() {
    let cfg = PipelineConfig::default();
    let machine = AlertMachine::from_config(&cfg);
    let wheel = HandLabel::Location(LocationClass::Wheel);
    let state = Smoother::new(3).push(tick_result(0, &one_hot_raw(Hand::Left, wheel), &one_hot_raw(Hand::Right, wheel)));
    let (next, event) = machine.step(&state);
    assert_eq!(next.state, AlertState::Monitoring);
    assert_eq!(next.consecutive_distracted, 0);
    assert!(event.is_none());
    assert_eq!(machine.step(&state), (next, None));
}

#[test]
fn blip_is_filtered_by_the_window() {
    let wheelish = RawHand { object: Some(vec![0.9, 0.05, 0.03, 0.02]), location: Some(vec![0.8, 0.1, 0.05, 0.03, 0.02]) };
    let blip = RawHand { object: Some(vec![0.3, 0.05, 0.6, 0.05]), location: None };
    let seq = [wheelish.clone(), wheelish.clone(), blip, wheelish];
    let oracle = smooth_oracle(Hand::Right, &seq, 3);
    let mut smoother = Smoother::new(3);
    let left = one_hot_raw(Hand::Left, HandLabel::Location(LocationClass::Wheel));
    for (t, raw) in seq.iter().enumerate() {
        let s = smoother.push(tick_result(t as u64, &left, raw));
        assert_eq!(s.right.label, oracle[t].2);
        assert_eq!(s.right.label, HandLabel::Location(LocationClass::Wheel), "tick {t}");
    }
}

#[test]
fn window_one_passes_through() {
    let mut g = Gen::new(1);
    let mut smoother = Smoother::new(1);
    for t in 0..500 {
        let l = random_raw_hand(&mut g, Hand::Left);
        let r = random_raw_hand(&mut g, Hand::Right);
        let s = smoother.push(tick_result(t, &l, &r));
        assert_eq!(s.left.object_probs.as_ref().map(|p| p.probs().collect::<Vec<_>>()), l.object);
        assert_eq!(s.right.location_probs.as_ref().map(|p| p.probs().collect::<Vec<_>>()), r.location);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Alert onsets equal the run-based oracle for arbitrary flag streams.
    #[test]
    fn machine_matches_oracle(
        runs in proptest::collection::vec((any::<bool>(), 1usize..120), 1..30),
        threshold in 1u32..60,
        cooldown in 0u32..80,
    ) {
        let flags: Vec<bool> = runs.iter().flat_map(|&(d, n)| std::iter::repeat_n(d, n)).collect();
        prop_assert_eq!(run_machine(&flags, threshold, cooldown), alert_onsets(&flags, threshold as u64, cooldown as u64));
    }

    /// Exactly one event when threshold <= N < 2 * threshold + cooldown.
    #[test]
    fn single_event_band(threshold in 1u32..50, cooldown in 0u32..50, extra in 0u32..1000) {
        let n = threshold + extra % (threshold + cooldown);
        prop_assert_eq!(run_machine(&vec![true; n as usize], threshold, cooldown).len(), 1);
    }

    /// Smoothed entries stay within the range of the inputs they average.
    #[test]
    fn smoothing_is_convex(seed in any::<u64>(), window in 1usize..6, len in 1usize..20) {
        let mut g = Gen::new(seed);
        let raws: Vec<RawHand> = (0..len).map(|_| random_raw_hand(&mut g, Hand::Right)).collect();
        let left = one_hot_raw(Hand::Left, HandLabel::Location(LocationClass::Wheel));
        let mut smoother = Smoother::new(window);
        for t in 0..len {
            let s = smoother.push(tick_result(t as u64, &left, &raws[t]));
            if let Some(p) = &s.right.object_probs {
                let lo = (t + 1).saturating_sub(window);
                let vs: Vec<&Vec<f64>> = raws[lo..=t].iter().filter_map(|r| r.object.as_ref()).collect();
                for (i, x) in p.probs().enumerate() {
                    let min = vs.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
                    let max = vs.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(x >= min - 1e-12 && x <= max + 1e-12);
                }
                prop_assert!((p.probs().sum::<f64>() - 1.0).abs() <= 1e-6);
            }
        }
    }
}
