use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    compute_tile_layout, directional_frame, perspective_frame, EdgeHistory, EdgeSpan, EnvelopeConfig, LayoutConfig,
    LayoutError, LayoutMode, PoseConfig, PoseState, Screen, TileLayout,
};
use crate::pipeline::{audio_to_mic_state, MicState, MicThresholds};
use crate::{ClientId, Millis, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub source: ClientId,
    pub target: ClientId,
    pub opacity: f64,
    pub from: Point,
    pub to: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Glow {
    pub tile: ClientId,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub tile: ClientId,
    /// Degrees; positive turns toward the right of the screen.
    pub yaw: f64,
    /// Horizontal offset in pixels.
    pub shake: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicIcon {
    pub tile: ClientId,
    pub on: bool,
}

/// Everything a thin client needs to draw one tick for one viewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderFrame {
    pub viewer: ClientId,
    pub t: Millis,
    pub mode: LayoutMode,
    pub arrows: Vec<Arrow>,
    pub glows: Vec<Glow>,
    pub poses: Vec<Pose>,
    pub mic_icons: Vec<MicIcon>,
    pub tile_geometry: TileLayout,
}

impl RenderFrame {
    pub fn empty(viewer: ClientId, t: Millis, mode: LayoutMode, layout: TileLayout) -> Self {
        Self {
            viewer,
            t,
            mode,
            arrows: Vec::new(),
            glows: Vec::new(),
            poses: Vec::new(),
            mic_icons: Vec::new(),
            tile_geometry: layout,
        }
    }
}

/// Inputs shared by the frame builders.
#[derive(Debug, Clone, Copy)]
pub struct FrameInput<'a> {
    pub viewer: &'a ClientId,
    pub spans: &'a [EdgeSpan],
    pub layout: &'a TileLayout,
    pub clock: Millis,
    pub mics: &'a BTreeMap<ClientId, MicState>,
}

impl FrameInput<'_> {
    pub(super) fn mic_icons(&self) -> Vec<crate::layout::MicIcon> {
        self.layout
            .tiles
            .iter()
            .map(|t| MicIcon {
                tile: t.owner.clone(),
                on: self.mics.get(&t.owner).is_some_and(|m| m.is_on()),
            })
            .collect()
    }
}

/// Relay state at one tick, as consumed by renderers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSnapshot {
    pub tick: u64,
    pub t: Millis,
    /// Participants in join order.
    pub members: Vec<ClientId>,
    pub edges: Vec<(ClientId, Option<ClientId>)>,
    pub audio: Vec<(ClientId, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RenderConfig {
    pub mode: LayoutMode,
    pub screen: Screen,
    pub layout: LayoutConfig,
    pub envelope: EnvelopeConfig,
    pub pose: PoseConfig,
    pub mic: MicThresholds,
}

impl Default for Screen {
    fn default() -> Self {
        Screen::HD
    }
}

impl RenderConfig {
    pub fn with_mode(mode: LayoutMode) -> Self {
        Self {
            mode,
            ..Default::default()
        }
    }

    /// Stable hash of every parameter that influences rendered frames, mode
    /// excluded.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(&(
            &self.screen,
            &self.layout,
            &self.envelope,
            &self.pose,
            &self.mic,
        ))
        .expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// Per-viewer render loop: threads edge history, pose and mic state across
/// ticks.
#[derive(Debug, Clone)]
pub struct Renderer {
    viewer: ClientId,
    config: RenderConfig,
    history: EdgeHistory,
    poses: PoseState,
    mics: BTreeMap<ClientId, MicState>,
}

impl Renderer {
    pub fn new(viewer: ClientId, config: RenderConfig) -> Self {
        Self {
            viewer,
            config,
            history: EdgeHistory::default(),
            poses: PoseState::default(),
            mics: BTreeMap::new(),
        }
    }

    pub fn viewer(&self) -> &ClientId {
        &self.viewer
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    /// Renders one tick. Returns `Ok(None)` while the viewer is not a member
    /// or is alone in the session.
    pub fn render(&mut self, snap: &TickSnapshot) -> Result<Option<RenderFrame>, LayoutError> {
        let env = self.config.envelope;
        self.history.update(
            snap.edges.iter().map(|(s, t)| (s, t.as_ref())),
            snap.t,
            env.fade_in_ms,
            env.fade_out_ms,
        );
        for (id, level) in &snap.audio {
            let prev = self.mics.get(id).copied().unwrap_or_default();
            let next = audio_to_mic_state(*level, prev, self.config.mic)
                .map_err(|e| LayoutError::InvalidConfig(e.to_string()))?;
            self.mics.insert(id.clone(), next);
        }
        self.mics.retain(|id, _| snap.members.contains(id));

        if snap.members.len() < 2 || !snap.members.contains(&self.viewer) {
            return Ok(None);
        }
        let layout = compute_tile_layout(&snap.members, &self.viewer, self.config.screen, &self.config.layout)?;
        let input = FrameInput {
            viewer: &self.viewer,
            spans: self.history.spans(),
            layout: &layout,
            clock: snap.t,
            mics: &self.mics,
        };
        let frame = match self.config.mode {
            LayoutMode::Baseline => {
                let mut f = RenderFrame::empty(self.viewer.clone(), snap.t, LayoutMode::Baseline, layout.clone());
                f.mic_icons = input.mic_icons();
                f
            }
            LayoutMode::Directional => directional_frame(&input, &env),
            LayoutMode::Perspective => {
                let (frame, poses) = perspective_frame(&input, &self.poses, &self.config.pose, &env);
                self.poses = poses;
                frame
            }
        };
        Ok(Some(frame))
    }
}
