//! Every cargo example runs to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;
    };
}

example!(sync_streams, "../examples/sync_streams.rs");
example!(hand_crops, "../examples/hand_crops.rs");
example!(alert_timeline, "../examples/alert_timeline.rs");
example!(published_metrics, "../examples/published_metrics.rs");
example!(detection_map, "../examples/detection_map.rs");
example!(replay_scenario, "../examples/replay_scenario.rs");
example!(custom_backend, "../examples/custom_backend.rs");

#[test]
fn examples_run() {
    sync_streams::run().unwrap();
    hand_crops::run().unwrap();
    alert_timeline::run().unwrap();
    published_metrics::run().unwrap();
    detection_map::run().unwrap();
    replay_scenario::run().unwrap();
    custom_backend::run().unwrap();
}
