//! Tile geometry and per-viewer render directives.
//!
//! Everything here is a pure function of its inputs plus explicitly threaded
//! state ([`EdgeHistory`], [`PoseState`], [`FocusLedger`]), so the same
//! sequence of [`TickSnapshot`]s always yields bit-identical frames.

mod directional;
mod envelope;
mod focus;
mod frame;
mod grid;
mod history;
mod perspective;
mod share;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use directional::directional_frame;
pub use envelope::{opacity_envelope, EnvelopeConfig};
pub use focus::{update_focus_layout, FocusConfig, FocusEntry, FocusLedger, SizeClass};
pub use frame::{Arrow, FrameInput, Glow, MicIcon, Pose, RenderConfig, RenderFrame, Renderer, TickSnapshot};
pub use grid::{compute_tile_layout, LayoutConfig, Screen};
pub use history::{EdgeHistory, EdgeSpan};
pub use perspective::{interpolate_pose, perspective_frame, yaw_toward, PoseConfig, PoseState};
pub use share::aggregate_gaze_share;

use crate::{ClientId, TileRect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutMode {
    Baseline,
    #[default]
    Directional,
    Perspective,
}

impl FromStr for LayoutMode {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "b" | "base" | "baseline" => Ok(Self::Baseline),
            "dir" | "directional" => Ok(Self::Directional),
            "perp" | "persp" | "perspective" => Ok(Self::Perspective),
            other => Err(LayoutError::UnknownMode(other.to_owned())),
        }
    }
}

impl fmt::Display for LayoutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Baseline => "baseline",
            Self::Directional => "directional",
            Self::Perspective => "perspective",
        })
    }
}

/// Tile geometry for one viewer's screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileLayout {
    pub viewer: ClientId,
    pub tiles: Vec<TileRect>,
    pub spacing: f64,
    pub screen_w: f64,
    pub screen_h: f64,
}

impl TileLayout {
    pub fn tile(&self, owner: &ClientId) -> Option<&TileRect> {
        self.tiles.iter().find(|t| &t.owner == owner)
    }

    /// Smallest pairwise gap between tiles, or `None` with fewer than two.
    pub fn min_gap(&self) -> Option<f64> {
        let mut min: Option<f64> = None;
        for (i, a) in self.tiles.iter().enumerate() {
            for b in &self.tiles[i + 1..] {
                let g = a.gap(b);
                min = Some(min.map_or(g, |m| m.min(g)));
            }
        }
        min
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("layout needs at least 2 members, got {0}")]
    TooFewMembers(usize),
    #[error("viewer {0} is not a member")]
    UnknownViewer(ClientId),
    #[error("screen {w}x{h} cannot fit {members} tiles at the minimum size and spacing")]
    Infeasible { w: f64, h: f64, members: usize },
    #[error("invalid render configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown layout mode {0:?}")]
    UnknownMode(String),
}
