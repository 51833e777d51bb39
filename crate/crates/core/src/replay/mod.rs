//! Replay harness: scenario scripts, synthetic manifests, mock backends and
//! the end-to-end runner.

pub mod layout;
pub mod manifest;
pub mod mock;
pub mod rng;
pub mod run;
pub mod scenario;

pub use manifest::{HandTruth, Manifest, ManifestError, ManifestHeader, TickRecord, TickTruth};
pub use mock::{NoiseSpec, NoisyBackend, ScriptedBackend};
pub use rng::SeededRng;
pub use run::{run, run_with, run_with_events, BackendSpec, HandPair, HandScores, RunError, RunReport, TickOutcome};
pub use scenario::{generate, DropSpec, HandActivity, ScenarioScript, ScriptError, Segment};
