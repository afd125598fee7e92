use serde::{Deserialize, Serialize};

use crate::ClientId;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A participant's video tile in viewer screen pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileRect {
    pub owner: ClientId,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl TileRect {
    pub fn new(owner: ClientId, x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { owner, x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.right() && p.y >= self.y && p.y <= self.bottom()
    }

    /// The half-width by half-height rectangle sharing this tile's center.
    /// Gaze inside it counts as looking at the tile's owner.
    pub fn central(&self) -> TileRect {
        TileRect {
            owner: self.owner.clone(),
            x: self.x + self.w / 4.0,
            y: self.y + self.h / 4.0,
            w: self.w / 2.0,
            h: self.h / 2.0,
        }
    }

    /// Axis-aligned gap between two rectangles: the larger of the horizontal
    /// and vertical separations. Negative when they overlap.
    pub fn gap(&self, other: &TileRect) -> f64 {
        let gx = (other.x - self.right()).max(self.x - other.right());
        let gy = (other.y - self.bottom()).max(self.y - other.bottom());
        gx.max(gy)
    }

    pub fn intersects(&self, other: &TileRect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }
}

/// Nearest pair of border points between two disjoint rectangles, `from` on
/// `a` and `to` on `b`. Where the projections overlap on an axis the
/// midpoint of the overlap is used for both points.
pub fn nearest_border_points(a: &TileRect, b: &TileRect) -> (Point, Point) {
    let (ax, bx) = axis_pair(a.x, a.right(), b.x, b.right());
    let (ay, by) = axis_pair(a.y, a.bottom(), b.y, b.bottom());
    (Point::new(ax, ay), Point::new(bx, by))
}

fn axis_pair(a0: f64, a1: f64, b0: f64, b1: f64) -> (f64, f64) {
    if a1 < b0 {
        (a1, b0)
    } else if b1 < a0 {
        (a0, b1)
    } else {
        let mid = (a0.max(b0) + a1.min(b1)) / 2.0;
        (mid, mid)
    }
}
