//! Recompute the published reference figures: the four confusion-matrix
//! accuracies, the detection + pose frame rate, and the fleet arithmetic.
//!
//! ```text
//! cargo run --example published_metrics
//! ```

use smart_hands::eval::published::{self, PublishedMatrix};
use smart_hands::eval::{compose_throughput, effective_fraction, fleet_impact, split_dataset, CompositionMode};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for which in PublishedMatrix::ALL {
        let m = which.matrix();
        let acc = m.accuracy()?;
        println!(
            "{:<15} {:>6}/{:<6} = {:.4}  (reported {:.1}%)",
            which.name(),
            m.trace(),
            m.total(),
            acc,
            which.reported_accuracy_pct()
        );
        for c in m.per_class_metrics()? {
            let fmt = |v: Option<f64>| v.map_or("  n/a".to_string(), |v| format!("{v:.3}"));
            println!("    {:<10} precision {}  recall {}  n={}", c.label, fmt(c.precision), fmt(c.recall), c.support);
        }
    }

    let profile = published::pose_extraction_profile();
    let seq = compose_throughput(&profile, CompositionMode::Sequential);
    let pipe = compose_throughput(&profile, CompositionMode::Pipelined);
    println!(
        "detector {} fps + pose {} fps: sequential {seq:.2} fps, pipelined {pipe:.1} fps (reported ~{})",
        published::DETECTOR_FPS,
        published::POSE_FPS,
        published::REPORTED_POSE_PIPELINE_FPS
    );

    let fraction = effective_fraction(published::PROJECTED_PENETRATION, published::ACCIDENT_REDUCTION);
    let impact = fleet_impact(
        published::EQUIPPED_VEHICLES,
        published::FLEET_VEHICLES,
        fraction,
        published::DISTRACTION_ACCIDENTS_2020,
    )?;
    println!(
        "penetration {:.2}%, fleet-wide reduction {:.1}%, prevented {}",
        impact.penetration * 100.0,
        fraction * 100.0,
        impact.prevented
    );
    assert_eq!(impact.prevented, published::REPORTED_PREVENTED);

    // 19 recordings of uneven length, split by whole recording
    let lengths: Vec<u64> = (0..published::SUBJECTS as u64).map(|i| 3_000 + (i * 577) % 2_500).collect();
    let split = split_dataset(&lengths, [0.8, 0.1, 0.1])?;
    let [tr, va, te] = split.frame_fractions(&lengths);
    println!(
        "split of {} recordings: train {} ({:.1}%), validation {} ({:.1}%), test {} ({:.1}%)",
        lengths.len(),
        split.train.len(),
        tr * 100.0,
        split.validation.len(),
        va * 100.0,
        split.test.len(),
        te * 100.0
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
