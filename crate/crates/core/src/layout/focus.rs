use serde::{Deserialize, Serialize};

use super::TileLayout;
use crate::{ClientId, Millis, Point, TileRect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    fn grow(self) -> Self {
        match self {
            Self::Small => Self::Medium,
            _ => Self::Large,
        }
    }

    fn shrink(self) -> Self {
        match self {
            Self::Large => Self::Medium,
            _ => Self::Small,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusConfig {
    /// Continuous focus needed to grow one size class.
    pub grow_ms: Millis,
    /// Time spent focused elsewhere before shrinking one size class.
    pub shrink_idle_ms: Millis,
    pub small_scale: f64,
    pub medium_scale: f64,
    pub large_scale: f64,
}

impl Default for FocusConfig {
    fn default() -> Self {
        Self {
            grow_ms: 3000.0,
            shrink_idle_ms: 5000.0,
            small_scale: 0.6,
            medium_scale: 0.8,
            large_scale: 1.0,
        }
    }
}

impl FocusConfig {
    fn scale(&self, class: SizeClass) -> f64 {
        match class {
            SizeClass::Small => self.small_scale,
            SizeClass::Medium => self.medium_scale,
            SizeClass::Large => self.large_scale,
        }
        .clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusEntry {
    pub owner: ClientId,
    /// Total focus received this session; never decreases.
    pub focus_ms: Millis,
    pub streak_ms: Millis,
    pub idle_ms: Millis,
    pub class: SizeClass,
}

/// Per-tile focus accounting for the scalable layout, plus which base grid
/// slot each tile currently occupies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusLedger {
    pub entries: Vec<FocusEntry>,
    /// `slots[i]` owns the i-th tile position of the base layout.
    pub slots: Vec<ClientId>,
}

impl FocusLedger {
    /// Every tile starts medium-sized in its base position.
    pub fn new(base: &TileLayout) -> Self {
        Self {
            entries: base
                .tiles
                .iter()
                .map(|t| FocusEntry {
                    owner: t.owner.clone(),
                    focus_ms: 0.0,
                    streak_ms: 0.0,
                    idle_ms: 0.0,
                    class: SizeClass::Medium,
                })
                .collect(),
            slots: base.tiles.iter().map(|t| t.owner.clone()).collect(),
        }
    }

    pub fn entry(&self, owner: &ClientId) -> Option<&FocusEntry> {
        self.entries.iter().find(|e| &e.owner == owner)
    }

    /// Places every tile in its slot, scaled about the slot center.
    pub fn layout(&self, base: &TileLayout, config: &FocusConfig) -> TileLayout {
        let tiles = base
            .tiles
            .iter()
            .zip(&self.slots)
            .map(|(slot, owner)| {
                let class = self.entry(owner).map_or(SizeClass::Medium, |e| e.class);
                let s = config.scale(class);
                let c = slot.center();
                let (w, h) = (slot.w * s, slot.h * s);
                TileRect::new(owner.clone(), c.x - w / 2.0, c.y - h / 2.0, w, h)
            })
            .collect();
        TileLayout {
            tiles,
            ..base.clone()
        }
    }

    /// Moves `owner` one slot closer to the slot nearest the screen center.
    fn migrate_toward_center(&mut self, owner: &ClientId, base: &TileLayout) {
        let centers: Vec<Point> = base.tiles.iter().map(TileRect::center).collect();
        let screen_c = Point::new(base.screen_w / 2.0, base.screen_h / 2.0);
        let Some(hub) = nearest(&centers, screen_c, |_| true) else {
            return;
        };
        let Some(cur) = self.slots.iter().position(|o| o == owner) else {
            return;
        };
        let cur_d = centers[cur].distance(centers[hub]);
        let step = nearest(&centers, centers[cur], |i| {
            i != cur && centers[i].distance(centers[hub]) < cur_d
        });
        if let Some(next) = step {
            self.slots.swap(cur, next);
        }
    }
}

fn nearest(points: &[Point], to: Point, allow: impl Fn(usize) -> bool) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(i, _)| allow(*i))
        .min_by(|(_, a), (_, b)| a.distance(to).total_cmp(&b.distance(to)))
        .map(|(i, _)| i)
}

/// Accrues `dt_ms` of focus on `focused` and returns the updated ledger with
/// the resulting layout. Time only counts while the viewer focuses on some
/// tile; other tiles then accumulate idle time and eventually shrink.
pub fn update_focus_layout(
    ledger: &FocusLedger,
    focused: Option<&ClientId>,
    dt_ms: Millis,
    base: &TileLayout,
    config: &FocusConfig,
) -> (FocusLedger, TileLayout) {
    let mut next = ledger.clone();
    let Some(focused) = focused.filter(|f| ledger.entry(f).is_some()) else {
        return (next.clone(), next.layout(base, config));
    };
    let dt = dt_ms.max(0.0);
    let mut migrations = 0;
    for e in &mut next.entries {
        if &e.owner == focused {
            e.focus_ms += dt;
            e.streak_ms += dt;
            e.idle_ms = 0.0;
            while e.streak_ms >= config.grow_ms {
                e.streak_ms -= config.grow_ms;
                e.class = e.class.grow();
                if e.class == SizeClass::Large {
                    migrations += 1;
                }
            }
        } else {
            e.streak_ms = 0.0;
            e.idle_ms += dt;
            while e.idle_ms >= config.shrink_idle_ms {
                e.idle_ms -= config.shrink_idle_ms;
                e.class = e.class.shrink();
            }
        }
    }
    for _ in 0..migrations {
        next.migrate_toward_center(focused, base);
    }
    let layout = next.layout(base, config);
    (next, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{compute_tile_layout, LayoutConfig, Screen};

    fn base() -> TileLayout {
        let m: Vec<ClientId> = (1..=5).map(|i| ClientId::new(format!("c{i}"))).collect();
        compute_tile_layout(&m, &m[0], Screen::HD, &LayoutConfig::default()).unwrap()
    }

    #[test]
    fn no_focus_leaves_layout_alone() {
        let b = base();
        let cfg = FocusConfig::default();
        let l0 = FocusLedger::new(&b);
        let before = l0.layout(&b, &cfg);
        let (l1, after) = update_focus_layout(&l0, None, 10_000.0, &b, &cfg);
        assert_eq!(l0, l1);
        assert_eq!(before, after);
    }

    #[test]
    fn continuous_focus_grows_one_class() {
        let b = base();
        let cfg = FocusConfig::default();
        let mut ledger = FocusLedger::new(&b);
        let x = ClientId::from("c4");
        for _ in 0..188 {
            ledger = update_focus_layout(&ledger, Some(&x), 16.0, &b, &cfg).0;
        }
        // 188 * 16 = 3008 ms: one crossing.
        assert_eq!(ledger.entry(&x).unwrap().class, SizeClass::Large);
        assert_eq!(ledger.entry(&"c2".into()).unwrap().class, SizeClass::Medium);
    }

    #[test]
    fn large_tile_moves_toward_center() {
        let b = base();
        let cfg = FocusConfig::default();
        let mut ledger = FocusLedger::new(&b);
        let x = ClientId::from("c4");
        let slot_before = ledger.slots.iter().position(|o| o == &x).unwrap();
        let (l, layout) = update_focus_layout(&ledger, Some(&x), 3000.0, &b, &cfg);
        ledger = l;
        let slot_after = ledger.slots.iter().position(|o| o == &x).unwrap();
        assert_ne!(slot_before, slot_after);
        let screen_c = Point::new(960.0, 540.0);
        assert!(
            b.tiles[slot_after].center().distance(screen_c) < b.tiles[slot_before].center().distance(screen_c)
        );
        assert!(layout.min_gap().unwrap() >= b.spacing - 1e-9);
    }

    /// Independent per-millisecond accumulation of a focus schedule.
    fn brute_force_classes(owners: &[&str], schedule: &[(Option<&str>, u32)], cfg: &FocusConfig) -> Vec<SizeClass> {
        let grow = cfg.grow_ms as u32;
        let shrink = cfg.shrink_idle_ms as u32;
        let mut class = vec![1i32; owners.len()];
        let mut streak = vec![0u32; owners.len()];
        let mut idle = vec![0u32; owners.len()];
        for (target, ms) in schedule {
            let Some(target) = target else { continue };
            for _ in 0..*ms {
                for i in 0..owners.len() {
                    if owners[i] == *target {
                        idle[i] = 0;
                        streak[i] += 1;
                        if streak[i] == grow {
                            streak[i] = 0;
                            class[i] = (class[i] + 1).min(2);
                        }
                    } else {
                        streak[i] = 0;
                        idle[i] += 1;
                        if idle[i] == shrink {
                            idle[i] = 0;
                            class[i] = (class[i] - 1).max(0);
                        }
                    }
                }
            }
        }
        class
            .into_iter()
            .map(|c| [SizeClass::Small, SizeClass::Medium, SizeClass::Large][c as usize])
            .collect()
    }

    #[test]
    fn scripted_schedule_matches_brute_force() {
        let b = base();
        let cfg = FocusConfig::default();
        let owners = ["c1", "c2", "c3", "c4", "c5"];
        let schedule = [
            (Some("c2"), 3200),
            (None, 4000),
            (Some("c3"), 2400),
            (Some("c2"), 6400),
            (Some("c5"), 11_200),
            (None, 800),
            (Some("c4"), 3008),
        ];
        let mut ledger = FocusLedger::new(&b);
        for (target, ms) in schedule {
            let t = target.map(ClientId::from);
            for _ in 0..ms / 16 {
                ledger = update_focus_layout(&ledger, t.as_ref(), 16.0, &b, &cfg).0;
            }
        }
        let want = brute_force_classes(&owners, &schedule, &cfg);
        let got: Vec<SizeClass> = owners.iter().map(|o| ledger.entry(&(*o).into()).unwrap().class).collect();
        assert_eq!(got, want);
        let total: f64 = ledger.entries.iter().map(|e| e.focus_ms).sum();
        assert_eq!(total, (3200 + 2400 + 6400 + 11_200 + 3008) as f64);
    }
}
