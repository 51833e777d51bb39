//! Score a toy detector with mAP@50 and print its precision/recall curve.
//!
//! ```text
//! cargo run --example detection_map
//! ```

use smart_hands::eval::{iou, map50, precision_recall_curve, average_precision, DetectionSample};
use smart_hands::perception::BoundingBox;

fn bx(x0: f64, y0: f64, x1: f64, y1: f64, conf: f64) -> BoundingBox {
    BoundingBox::new(x0, y0, x1, y1, conf).unwrap()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let samples = vec![
        DetectionSample {
            ground_truth: vec![bx(10.0, 10.0, 110.0, 210.0, 1.0)],
            predictions: vec![bx(14.0, 12.0, 112.0, 205.0, 0.92), bx(300.0, 40.0, 380.0, 200.0, 0.40)],
        },
        DetectionSample {
            ground_truth: vec![bx(200.0, 50.0, 320.0, 300.0, 1.0), bx(400.0, 60.0, 500.0, 300.0, 1.0)],
            predictions: vec![bx(205.0, 60.0, 318.0, 290.0, 0.85), bx(440.0, 100.0, 560.0, 330.0, 0.70)],
        },
        DetectionSample { ground_truth: vec![bx(0.0, 0.0, 50.0, 50.0, 1.0)], predictions: vec![] },
    ];

    let curve = precision_recall_curve(&samples)?;
    println!("conf   tp     precision  recall");
    for p in &curve {
        println!("{:.2}   {:<5}  {:.3}      {:.3}", p.confidence, p.true_positive, p.precision, p.recall);
    }
    println!("AP@50 = {:.4}", average_precision(&curve));
    println!("mAP@50 = {:.4}", map50(&samples)?);

    let shifted = iou(&samples[1].ground_truth[1], &samples[1].predictions[1]);
    println!("IoU of the shifted box: {shifted:.3}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
