//! Generate a manifest from the bundled phone-call script and replay it
//! with the scripted and the noisy mock backends.
//!
//! ```text
//! cargo run --example replay_scenario [path/to/script.toml]
//! ```

use smart_hands::replay::{generate, run as replay, BackendSpec, NoiseSpec, ScenarioScript};
use smart_hands::PipelineConfig;

const PHONE_SCRIPT: &str = include_str!("../data/scenarios/phone_alert.toml");

pub fn run_script(text: &str) -> Result<(), Box<dyn std::error::Error>> {
    let script = ScenarioScript::from_toml_str(text)?;
    let manifest = generate(&script)?;
    println!("{} ticks, {} segments", manifest.ticks.len(), script.segments.len());

    let cfg = PipelineConfig::default();
    for (name, spec) in [
        ("scripted", BackendSpec::Scripted),
        ("noisy 2%", BackendSpec::Noisy(NoiseSpec::symmetric(0.02, 1))),
    ] {
        let report = replay(&manifest, &cfg, spec)?;
        println!("{name}:");
        for (hand, raw, smoothed) in [
            ("left", &report.raw.left, &report.smoothed.left),
            ("right", &report.raw.right, &report.smoothed.right),
        ] {
            println!(
                "  {hand:<5} label accuracy raw {:.4}  smoothed {:.4}",
                raw.label_accuracy.unwrap_or(f64::NAN),
                smoothed.label_accuracy.unwrap_or(f64::NAN)
            );
        }
        for e in &report.alerts {
            println!(
                "  alert at tick {} ({:.2} s): left {}, right {}",
                e.onset_tick,
                e.onset_timestamp_us as f64 / 1e6,
                e.left_label,
                e.right_label
            );
        }
    }
    Ok(())
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    run_script(PHONE_SCRIPT)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args().nth(1) {
        Some(path) => run_script(&std::fs::read_to_string(path)?),
        None => run(),
    }
}
