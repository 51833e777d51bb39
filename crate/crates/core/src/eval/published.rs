//! Published reference figures for the four-camera hand-activity system:
//! the four test-set confusion matrices, stage frame rates and the
//! fleet-impact inputs.

use super::{ConfusionMatrix, StageProfile};

pub const LEFT_LOCATION_CSV: &str = include_str!("../../data/matrices/left_location.csv");
pub const RIGHT_LOCATION_CSV: &str = include_str!("../../data/matrices/right_location.csv");
pub const LEFT_OBJECT_CSV: &str = include_str!("../../data/matrices/left_object.csv");
pub const RIGHT_OBJECT_CSV: &str = include_str!("../../data/matrices/right_object.csv");

/// Reported accuracies, in percent with one decimal.
pub const LEFT_LOCATION_ACCURACY_PCT: f64 = 99.3;
pub const RIGHT_LOCATION_ACCURACY_PCT: f64 = 99.2;
pub const LEFT_OBJECT_ACCURACY_PCT: f64 = 98.6;
pub const RIGHT_OBJECT_ACCURACY_PCT: f64 = 99.2;

/// Person detector (Faster R-CNN + FPN, ResNet-50) frame rate.
pub const DETECTOR_FPS: f64 = 28.8;
/// Pose estimator (HRNet) frame rate.
pub const POSE_FPS: f64 = 22.7;
/// Reported end-to-end rate of detection plus pose, "approximately".
pub const REPORTED_POSE_PIPELINE_FPS: f64 = 15.0;
/// Reported mAP@50 of the detector and pose models. Informational only.
pub const DETECTOR_MAP50: f64 = 0.636;
pub const POSE_MAP50: f64 = 0.905;

pub const EQUIPPED_VEHICLES: u64 = 4_300_000;
pub const FLEET_VEHICLES: u64 = 287_000_000;
pub const PROJECTED_PENETRATION: f64 = 0.03;
pub const ACCIDENT_REDUCTION: f64 = 0.90;
pub const DISTRACTION_ACCIDENTS_2020: u64 = 680_000;
pub const REPORTED_PREVENTED: u64 = 18_360;

/// Approximate corpus sizes behind the location and object matrices.
pub const LOCATION_CORPUS_FRAMES: u64 = 81_000;
pub const OBJECT_CORPUS_FRAMES: u64 = 128_000;
pub const SUBJECTS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PublishedMatrix {
    LeftLocation,
    RightLocation,
    LeftObject,
    RightObject,
}

impl PublishedMatrix {
    pub const ALL: [PublishedMatrix; 4] = [
        PublishedMatrix::LeftLocation,
        PublishedMatrix::RightLocation,
        PublishedMatrix::LeftObject,
        PublishedMatrix::RightObject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PublishedMatrix::LeftLocation => "left_location",
            PublishedMatrix::RightLocation => "right_location",
            PublishedMatrix::LeftObject => "left_object",
            PublishedMatrix::RightObject => "right_object",
        }
    }

    pub fn csv(self) -> &'static str {
        match self {
            PublishedMatrix::LeftLocation => LEFT_LOCATION_CSV,
            PublishedMatrix::RightLocation => RIGHT_LOCATION_CSV,
            PublishedMatrix::LeftObject => LEFT_OBJECT_CSV,
            PublishedMatrix::RightObject => RIGHT_OBJECT_CSV,
        }
    }

    pub fn reported_accuracy_pct(self) -> f64 {
        match self {
            PublishedMatrix::LeftLocation => LEFT_LOCATION_ACCURACY_PCT,
            PublishedMatrix::RightLocation => RIGHT_LOCATION_ACCURACY_PCT,
            PublishedMatrix::LeftObject => LEFT_OBJECT_ACCURACY_PCT,
            PublishedMatrix::RightObject => RIGHT_OBJECT_ACCURACY_PCT,
        }
    }

    pub fn matrix(self) -> ConfusionMatrix {
        ConfusionMatrix::from_csv(self.csv().as_bytes()).expect("embedded matrix parses")
    }
}

pub fn pose_extraction_profile() -> StageProfile {
    StageProfile::new(vec![("person_detection".into(), DETECTOR_FPS), ("pose_estimation".into(), POSE_FPS)])
        .expect("positive rates")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_matrices_have_expected_shapes() {
        let sizes: Vec<usize> = PublishedMatrix::ALL.iter().map(|m| m.matrix().labels().len()).collect();
        assert_eq!(sizes, [3, 5, 4, 4]);
        assert_eq!(PublishedMatrix::LeftLocation.matrix().total(), 9193);
        assert_eq!(PublishedMatrix::LeftLocation.matrix().trace(), 9127);
    }

    #[test]
    fn accuracies_round_to_reported_values() {
        for m in PublishedMatrix::ALL {
            let pct = m.matrix().accuracy().unwrap() * 100.0;
            assert_eq!((pct * 10.0).round() / 10.0, m.reported_accuracy_pct(), "{}", m.name());
        }
    }
}
