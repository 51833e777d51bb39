//! Align four jittery camera streams into ticks.
//!
//! The mirror camera loses every tenth frame; the dash-center camera runs
//! a few milliseconds behind. Sets with a gap list the missing view.
//!
//! ```text
//! cargo run --example sync_streams
//! ```

use smart_hands::sync::{SyncSettings, Synchronizer};
use smart_hands::{ClassLabel, Frame, ViewId};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut sync = Synchronizer::new(SyncSettings::default());
    let blank = Frame::blank(ViewId::WheelCam, 0, 64, 48)?;
    let period = 33_333u64;
    let mut sets = Vec::new();

    for tick in 0..60u64 {
        for &view in ViewId::ALL {
            if view == ViewId::MirrorCam && tick % 10 == 9 {
                continue;
            }
            let lag = if view == ViewId::DashCenterCam { 4_000 } else { 0 };
            sets.extend(sync.ingest(blank.restamped(view, tick * period + lag))?);
        }
    }
    sets.extend(sync.flush());

    for set in sets.iter().filter(|s| !s.missing().is_empty()) {
        println!("tick {:>3} @ {:>8} us  missing {:?}", set.tick_index, set.reference_timestamp_us, set.missing());
    }
    let stats = sync.stats();
    println!("{} sets, {} with a gap", stats.sets_emitted, stats.sets_with_missing);
    for (view, counts) in stats.views.iter() {
        println!("{:<14} ingested {:>3}  accepted {:>3}  dropped {}", view.name(), counts.ingested, counts.accepted, counts.dropped());
    }
    assert_eq!(stats.sets_emitted, 60);
    assert_eq!(stats.sets_with_missing, 6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
