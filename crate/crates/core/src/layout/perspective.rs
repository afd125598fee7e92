use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{EnvelopeConfig, FrameInput, LayoutMode, Pose, RenderFrame};
use crate::{ClientId, Millis, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseConfig {
    /// Degrees.
    pub max_yaw: f64,
    /// Pixels.
    pub max_shake: f64,
    pub shake_hz: f64,
    /// Time constant of the exponential approach toward the goal yaw.
    pub tau_ms: Millis,
    /// Horizontal distance, as a fraction of screen width, at which the yaw
    /// saturates.
    pub reach_frac: f64,
}

impl Default for PoseConfig {
    fn default() -> Self {
        Self {
            max_yaw: 30.0,
            max_shake: 4.0,
            shake_hz: 2.0,
            tau_ms: 150.0,
            reach_frac: 0.5,
        }
    }
}

/// Current yaw of every tile plus the clock of the last frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseState {
    yaw: BTreeMap<ClientId, f64>,
    last_clock: Option<Millis>,
}

impl PoseState {
    pub fn yaw(&self, tile: &ClientId) -> f64 {
        self.yaw.get(tile).copied().unwrap_or(0.0)
    }
}

/// Yaw that turns a tile at `source` toward a tile at `target`. Only the
/// horizontal offset matters; it saturates at `reach_px`.
pub fn yaw_toward(source: Point, target: Point, max_yaw: f64, reach_px: f64) -> f64 {
    let dx = target.x - source.x;
    if dx == 0.0 || reach_px <= 0.0 {
        return 0.0;
    }
    (max_yaw * dx / reach_px).clamp(-max_yaw, max_yaw)
}

/// Exponential approach from `current` to `goal` over `dt_ms`.
pub fn interpolate_pose(current: f64, goal: f64, dt_ms: Millis, tau_ms: Millis) -> f64 {
    if dt_ms <= 0.0 {
        return current;
    }
    goal + (current - goal) * (-dt_ms / tau_ms).exp()
}

/// 3D mode: every tile turns toward whoever its owner is looking at. Tiles
/// whose owner looks at the viewer face forward and shake.
pub fn perspective_frame(
    input: &FrameInput<'_>,
    prev: &PoseState,
    config: &PoseConfig,
    env: &EnvelopeConfig,
) -> (RenderFrame, PoseState) {
    let mut frame = RenderFrame::empty(
        input.viewer.clone(),
        input.clock,
        LayoutMode::Perspective,
        input.layout.clone(),
    );
    let dt = prev.last_clock.map_or(0.0, |last| input.clock - last);
    let reach = config.reach_frac * input.layout.screen_w;
    let mut next = PoseState {
        yaw: BTreeMap::new(),
        last_clock: Some(input.clock),
    };

    for tile in &input.layout.tiles {
        let active = input
            .spans
            .iter()
            .find(|s| s.is_active() && s.source == tile.owner);
        let goal = match active {
            Some(span) if &span.target != input.viewer => input
                .layout
                .tile(&span.target)
                .map_or(0.0, |t| yaw_toward(tile.center(), t.center(), config.max_yaw, reach)),
            _ => 0.0,
        };
        let yaw = interpolate_pose(prev.yaw(&tile.owner), goal, dt, config.tau_ms)
            .clamp(-config.max_yaw, config.max_yaw);

        let shake = input
            .spans
            .iter()
            .find(|s| s.source == tile.owner && &s.target == input.viewer)
            .map_or(0.0, |s| {
                let amp = config.max_shake * s.opacity(input.clock, env.fade_in_ms, env.fade_out_ms);
                let phase = 2.0 * PI * config.shake_hz * (input.clock - s.started) / 1000.0;
                (amp * phase.sin()).clamp(-config.max_shake, config.max_shake)
            });

        next.yaw.insert(tile.owner.clone(), yaw);
        frame.poses.push(Pose {
            tile: tile.owner.clone(),
            yaw,
            shake,
        });
    }
    frame.mic_icons = input.mic_icons();
    (frame, next)
}
