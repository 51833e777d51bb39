//! Multi-camera driver hand-activity pipeline.
//!
//! Four IR camera streams are aligned into ticks ([`sync`]), the driver is
//! located and each wrist cropped per view, and a pluggable backend
//! classifies each hand first by held object and, for empty hands, by
//! location ([`perception`]). Per-tick results are low-pass filtered and fed
//! to a sustained-distraction alert machine ([`temporal`]). [`replay`]
//! drives the whole chain from synthetic manifests with scripted or noisy
//! mock backends, and [`eval`] holds the metrics used to score runs and to
//! check the published reference figures. [`cli`] is the command-line front
//! end over all of it.

pub mod cli;
pub mod eval;
pub mod model;
pub mod perception;
pub mod replay;
pub mod sync;
pub mod temporal;

pub use model::{
    admissible_classes, validate_config, ClassLabel, ConfigError, Frame, Hand, HandLabel, LocationClass, Micros,
    ObjectClass, PerView, PipelineConfig, PredicateId, ProbVector, ViewId,
};
pub use perception::{classify_hand, process_tick, HandState, InferenceBackend, TickResult};
pub use sync::{StreamStats, SyncedFrameSet, Synchronizer};
pub use temporal::{AlertEvent, AlertMachine, SmoothedState, Smoother};
