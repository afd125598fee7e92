use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ScriptSegment;
use crate::layout::TileLayout;
use crate::pipeline::GazeSample;
use crate::{ClientId, Millis, Point};

/// Points in the gaps between tiles: midpoints between horizontal neighbours
/// and between vertically stacked tiles.
pub fn gutter_points(layout: &TileLayout) -> Vec<Point> {
    let mut pts = Vec::new();
    for a in &layout.tiles {
        for b in &layout.tiles {
            let same_row = (a.y - b.y).abs() < 1e-9;
            if same_row && b.x > a.right() && layout.tiles.iter().all(|c| !(c.x > a.right() && c.x < b.x && (c.y - a.y).abs() < 1e-9)) {
                pts.push(Point::new((a.right() + b.x) / 2.0, a.center().y));
            }
        }
    }
    if pts.is_empty() {
        let top = layout.tiles.iter().map(|t| t.y).fold(f64::INFINITY, f64::min);
        pts.push(Point::new(layout.screen_w / 2.0, top / 2.0));
    }
    pts
}

/// Synthetic gaze for one member: each tick emits the scripted target's tile
/// center (or a gutter point when looking at nobody) plus isotropic Gaussian
/// noise.
pub fn generate_trace(
    script: &[ScriptSegment],
    members: &[ClientId],
    layout: &TileLayout,
    noise_sigma: f64,
    tick_ms: u64,
    seed: u64,
) -> Vec<GazeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gutters = gutter_points(layout);
    let end = script.last().map_or(0.0, |s| s.end_ms);
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = (k * tick_ms) as Millis;
        if t >= end {
            break;
        }
        let (idx, seg) = script
            .iter()
            .enumerate()
            .find(|(_, s)| t >= s.start_ms && t < s.end_ms)
            .expect("script tiles the duration");
        let aim = match seg.target.and_then(|i| members.get(i)).and_then(|id| layout.tile(id)) {
            Some(tile) => tile.center(),
            None => gutters[idx % gutters.len()],
        };
        let nx: f64 = StandardNormal.sample(&mut rng);
        let ny: f64 = StandardNormal.sample(&mut rng);
        out.push(GazeSample::new(
            t,
            aim.x + noise_sigma * nx,
            aim.y + noise_sigma * ny,
            layout.screen_w,
            layout.screen_h,
        ));
        k += 1;
    }
    out
}
