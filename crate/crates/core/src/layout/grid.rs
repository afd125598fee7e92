use serde::{Deserialize, Serialize};

use super::{LayoutError, TileLayout};
use crate::{ClientId, TileRect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub w: f64,
    pub h: f64,
}

impl Screen {
    pub const HD: Screen = Screen { w: 1920.0, h: 1080.0 };

    pub fn new(w: f64, h: f64) -> Self {
        Self { w, h }
    }
}

/// Tile sizing, expressed on a reference screen and scaled to the real one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub reference: Screen,
    pub tile_w: f64,
    pub tile_h: f64,
    pub spacing: f64,
    pub min_spacing: f64,
    pub min_tile_w: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            reference: Screen::HD,
            tile_w: 560.0,
            tile_h: 420.0,
            spacing: 40.0,
            min_spacing: 4.0,
            min_tile_w: 64.0,
        }
    }
}

/// Row-major grid, members in the given (join) order, last row centered.
pub fn compute_tile_layout(
    members: &[ClientId],
    viewer: &ClientId,
    screen: Screen,
    config: &LayoutConfig,
) -> Result<TileLayout, LayoutError> {
    let n = members.len();
    if n < 2 {
        return Err(LayoutError::TooFewMembers(n));
    }
    if !members.contains(viewer) {
        return Err(LayoutError::UnknownViewer(viewer.clone()));
    }
    let infeasible = || LayoutError::Infeasible {
        w: screen.w,
        h: screen.h,
        members: n,
    };
    if !(screen.w > 0.0 && screen.h > 0.0) {
        return Err(infeasible());
    }

    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let scale = (screen.w / config.reference.w).min(screen.h / config.reference.h);
    let spacing = (config.spacing * scale).max(config.min_spacing);
    let aspect = config.tile_h / config.tile_w;

    let fit_w = (screen.w - (cols as f64 + 1.0) * spacing) / cols as f64;
    let fit_h = (screen.h - (rows as f64 + 1.0) * spacing) / rows as f64;
    let tile_w = (config.tile_w * scale).min(fit_w).min(fit_h / aspect);
    let tile_h = tile_w * aspect;
    if tile_w.is_nan() || tile_w < config.min_tile_w {
        return Err(infeasible());
    }

    let grid_h = rows as f64 * tile_h + (rows as f64 - 1.0) * spacing;
    let top = (screen.h - grid_h) / 2.0;
    let mut tiles = Vec::with_capacity(n);
    for (row, chunk) in members.chunks(cols).enumerate() {
        let k = chunk.len() as f64;
        let row_w = k * tile_w + (k - 1.0) * spacing;
        let left = (screen.w - row_w) / 2.0;
        let y = top + row as f64 * (tile_h + spacing);
        for (col, owner) in chunk.iter().enumerate() {
            let x = left + col as f64 * (tile_w + spacing);
            tiles.push(TileRect::new(owner.clone(), x, y, tile_w, tile_h));
        }
    }

    Ok(TileLayout {
        viewer: viewer.clone(),
        tiles,
        spacing,
        screen_w: screen.w,
        screen_h: screen.h,
    })
}
