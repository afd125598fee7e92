//! Append-only session log, replay and post-hoc metrics.
//!
//! A log is newline-delimited JSON: one [`LogHeader`] line followed by one
//! [`EventRecord`] per line.

mod log;
mod metrics;
mod replay;

pub use self::log::{read_log, EventLog, EventRecord, FsyncPolicy, LogHeader, LogWriter, SCHEMA_VERSION};
pub use metrics::{attention_matrix, mutual_gaze_episodes, AttentionMatrix, MutualEpisode};
pub use replay::{replay, replay_log, Replay};

use crate::Millis;

#[derive(Debug, thiserror::Error)]
pub enum RecorderError {
    #[error("record at {got} ms precedes previous record at {last} ms")]
    TimestampRegression { last: Millis, got: Millis },
    #[error("corrupt log at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("log was recorded with config {recorded}, replaying with {current}")]
    ConfigMismatch { recorded: String, current: String },
    #[error(transparent)]
    Layout(#[from] crate::layout::LayoutError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
