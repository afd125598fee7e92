//! Discrete-event simulation of a whole session.
//!
//! Synthetic clients follow scripted ground-truth gaze, emit noisy samples,
//! run the real pipeline (filter, classify, dwell) and talk to a real
//! [`crate::relay::Session`] over a simulated network with latency, jitter
//! and loss. Everything runs on a virtual clock from a fixed seed, so a
//! scenario always produces the same report.

mod run;
mod scenario;
mod trace;

pub use run::{run_scenario, run_scenario_full, MemberReport, SimReport, SimRun};
pub use scenario::{NetConfig, Scenario, ScriptSegment};
pub use trace::{generate_trace, gutter_points};

use crate::layout::LayoutError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Recorder(#[from] crate::recorder::RecorderError),
}
