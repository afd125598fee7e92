//! Client-side gaze processing: smoothing, tile classification, dwell
//! debouncing, calibration scoring and microphone-icon state.

mod calibration;
mod classify;
mod dwell;
mod filter;
mod mic;

pub use calibration::{default_radius, score_calibration, CalibrationReport, CALIBRATION_PASS_PERCENT, REFERENCE_RADIUS_PX};
pub use classify::classify_target;
pub use dwell::{DwellState, DEFAULT_DWELL_MS};
pub use filter::{filter_step, ramp_lag_ms, FilterParams, FilterState};
pub use mic::{audio_to_mic_state, MicState, MicThresholds};

use serde::{Deserialize, Serialize};

use crate::Millis;

/// A gaze point in viewer screen pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: Millis,
    pub x: f64,
    pub y: f64,
    pub screen_w: f64,
    pub screen_h: f64,
}

impl GazeSample {
    pub fn new(t: Millis, x: f64, y: f64, screen_w: f64, screen_h: f64) -> Self {
        Self {
            t,
            x,
            y,
            screen_w,
            screen_h,
        }
    }

    pub fn point(&self) -> crate::Point {
        crate::Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("sample at t={got} ms does not follow previous sample at t={prev} ms")]
    NonMonotonic { prev: Millis, got: Millis },
    #[error("no predictions to score")]
    InsufficientData,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Who a participant is looking at. `target: None` means nobody.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeEdge {
    pub source: crate::ClientId,
    pub target: Option<crate::ClientId>,
    pub t: Millis,
}

impl GazeEdge {
    /// Self-gaze is normalized to looking at nobody.
    pub fn new(source: crate::ClientId, target: Option<crate::ClientId>, t: Millis) -> Self {
        let target = target.filter(|t| *t != source);
        Self { source, target, t }
    }
}
