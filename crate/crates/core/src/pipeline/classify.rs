use crate::layout::TileLayout;
use crate::{ClientId, Point};

/// Which participant, if any, a smoothed gaze point is looking at.
///
/// Only the central half-width by half-height area of a tile counts. A hit on
/// the viewer's own tile reports nobody.
pub fn classify_target(point: Point, layout: &TileLayout, viewer: &ClientId) -> Option<ClientId> {
    layout
        .tiles
        .iter()
        .find(|tile| tile.central().contains(point))
        .filter(|tile| &tile.owner != viewer)
        .map(|tile| tile.owner.clone())
}
