use super::{Arrow, EnvelopeConfig, FrameInput, Glow, LayoutMode, RenderFrame};
use crate::geometry::nearest_border_points;

/// 2D mode: an arrow between tiles for every edge, except edges aimed at the
/// viewer, which light up the source tile with a glow instead.
pub fn directional_frame(input: &FrameInput<'_>, env: &EnvelopeConfig) -> RenderFrame {
    let mut frame = RenderFrame::empty(
        input.viewer.clone(),
        input.clock,
        LayoutMode::Directional,
        input.layout.clone(),
    );
    for span in input.spans {
        let opacity = span.opacity(input.clock, env.fade_in_ms, env.fade_out_ms);
        if opacity <= 0.0 && !span.is_active() {
            continue;
        }
        let Some(src) = input.layout.tile(&span.source) else {
            log::warn!("edge {} -> {} skipped: source has no tile", span.source, span.target);
            continue;
        };
        if &span.target == input.viewer {
            frame.glows.push(Glow {
                tile: span.source.clone(),
                intensity: opacity,
            });
            continue;
        }
        let Some(dst) = input.layout.tile(&span.target) else {
            log::warn!("edge {} -> {} skipped: target has no tile", span.source, span.target);
            continue;
        };
        let (from, to) = nearest_border_points(src, dst);
        frame.arrows.push(Arrow {
            source: span.source.clone(),
            target: span.target.clone(),
            opacity,
            from,
            to,
        });
    }
    frame.mic_icons = input.mic_icons();
    frame
}
