//! Gaze-awareness backbone for small-group video calls.
//!
//! Clients report who they are looking at; a relay coalesces those reports
//! into a per-tick state broadcast; the layout engine turns that state into
//! deterministic render directives (arrows and glows, or turning and shaking
//! tiles) for any participant's point of view.
//!
//! * [`pipeline`] smooths raw gaze points and classifies them against tiles.
//! * [`layout`] owns tile geometry and per-viewer [`layout::RenderFrame`]s.
//! * [`relay`] is a sans-IO session state machine speaking [`protocol`].
//! * [`recorder`] persists sessions as NDJSON, replays them and computes
//!   attention metrics.
//! * [`sim`] drives synthetic clients through all of the above over a
//!   simulated network.

pub mod geometry;
pub mod id;
pub mod layout;
pub mod pipeline;
pub mod protocol;
pub mod recorder;
pub mod relay;
pub mod sim;

pub use geometry::{Point, TileRect};
pub use id::ClientId;

/// Milliseconds, on whichever clock the caller is using.
pub type Millis = f64;
