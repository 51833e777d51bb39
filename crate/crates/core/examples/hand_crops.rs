//! Wrist-centered crops: a centered square, one clipped by the frame edge,
//! and one rejected for low keypoint confidence.
//!
//! ```text
//! cargo run --example hand_crops
//! ```

use smart_hands::perception::{crop_hand, select_driver, Keypoint, PoseEstimate, SeatRoi};
use smart_hands::perception::BoundingBox;
use smart_hands::{Frame, Hand, ViewId};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    // gradient image so crop contents are recognizable
    let (w, h) = (640u32, 480u32);
    let pixels: Vec<u8> = (0..h).flat_map(|y| (0..w).map(move |x| ((x + y) % 256) as u8)).collect();
    let frame = Frame::new(ViewId::DashCenterCam, 0, w, h, pixels)?;

    // passenger on the left of this view, driver on the right
    let people = [
        BoundingBox::new(40.0, 60.0, 300.0, 470.0, 0.97)?,
        BoundingBox::new(340.0, 40.0, 630.0, 470.0, 0.91)?,
    ];
    let rois = SeatRoi::default_rig();
    let driver = select_driver(&people, &rois[ViewId::DashCenterCam], w, h).ok_or("no driver")?;
    println!("driver box: ({:.0}, {:.0})-({:.0}, {:.0})", driver.x_min, driver.y_min, driver.x_max, driver.y_max);

    let pose = PoseEstimate::from_wrists(
        Keypoint { x: 612.4, y: 455.0, confidence: 0.8 },
        Keypoint { x: 480.0, y: 300.0, confidence: 0.95 },
    )?;
    for hand in [Hand::Left, Hand::Right] {
        let crop = crop_hand(&pose, hand, &frame, 100, 0.3);
        let rect = crop.rect().ok_or("expected a valid crop")?;
        let px = crop.pixels().ok_or("pixels")?;
        println!(
            "{hand:?}: [{}, {}) x [{}, {})  {}x{}  first pixel {}",
            rect.x0, rect.x1, rect.y0, rect.y1, px.width(), px.height(), px.row(0)[0]
        );
    }

    let faint = PoseEstimate::from_wrists(
        Keypoint { x: 100.0, y: 100.0, confidence: 0.1 },
        Keypoint { x: 100.0, y: 100.0, confidence: 0.1 },
    )?;
    let crop = crop_hand(&faint, Hand::Left, &frame, 100, 0.3);
    println!("low-confidence wrist -> valid crop: {}", crop.is_valid());
    assert!(!crop.is_valid());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
