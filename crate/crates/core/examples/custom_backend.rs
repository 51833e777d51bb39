//! Plug a hand-written backend into the replay runner.
//!
//! The backend here wraps the scripted oracle for detection and pose but
//! classifies location from crop geometry alone: a wrist in the lower
//! third of the wheel camera is on the lap, otherwise on the wheel. It
//! never reports objects.
//!
//! ```text
//! cargo run --example custom_backend
//! ```

use std::sync::Arc;

use smart_hands::perception::{BackendError, BoundingBox, InferenceBackend, PoseEstimate, ViewCrops};
use smart_hands::replay::{generate, run_with, HandActivity, ScenarioScript, ScriptedBackend, Segment};
use smart_hands::{ClassLabel, Frame, Hand, LocationClass, ObjectClass, PipelineConfig, ProbVector, ViewId};

struct WheelOrLap {
    oracle: ScriptedBackend,
}

impl InferenceBackend for WheelOrLap {
    fn detect(&self, frame: &Frame) -> Result<Vec<BoundingBox>, BackendError> {
        self.oracle.detect(frame)
    }

    fn estimate_pose(&self, frame: &Frame, person: &BoundingBox) -> Result<PoseEstimate, BackendError> {
        self.oracle.estimate_pose(frame, person)
    }

    fn classify_object(&self, _hand: Hand, _crops: &ViewCrops) -> Result<ProbVector<ObjectClass>, BackendError> {
        Ok(ProbVector::one_hot(ObjectClass::ALL, ObjectClass::None)?)
    }

    fn classify_location(
        &self,
        _hand: Hand,
        crops: &ViewCrops,
        admissible: &[LocationClass],
    ) -> Result<ProbVector<LocationClass>, BackendError> {
        let crop = crops[ViewId::WheelCam].as_ref().ok_or_else(|| BackendError::Inference("no wheel view".into()))?;
        let (_, cy) = crop.bbox().ok_or_else(|| BackendError::Inference("invalid crop".into()))?.center();
        let guess = if cy > 320.0 { LocationClass::Lap } else { LocationClass::Wheel };
        Ok(ProbVector::one_hot(admissible, guess)?)
    }
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let wheel = HandActivity::at(LocationClass::Wheel);
    let lap = HandActivity::at(LocationClass::Lap);
    let script = ScenarioScript::new(
        30.0,
        9,
        vec![Segment::steady(120, wheel, wheel), Segment::steady(90, lap, wheel), Segment::steady(90, wheel, lap)],
    );
    let manifest = generate(&script)?;
    let backend = WheelOrLap { oracle: ScriptedBackend::new(Arc::new(manifest.clone())) };
    let report = run_with(&manifest, &PipelineConfig::default(), &backend, |_| Ok(()))?;

    for (name, scores) in [("left", &report.raw.left), ("right", &report.raw.right)] {
        println!("{name} location matrix ({}):", scores.location.labels().join(", "));
        for row in scores.location.counts() {
            println!("    {row:?}");
        }
        println!("    accuracy {:.3}", scores.location_accuracy.unwrap_or(f64::NAN));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
