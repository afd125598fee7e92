use std::collections::BTreeSet;

use proptest::prelude::*;

use gazelink_core::layout::{
    compute_tile_layout, update_focus_layout, FocusConfig, FocusLedger, LayoutConfig, LayoutMode, RenderConfig, Renderer,
    Screen, TickSnapshot,
};
use gazelink_core::ClientId;

fn members(n: usize) -> Vec<ClientId> {
    (1..=n).map(|i| ClientId::new(format!("c{i}"))).collect()
}

fn snapshot(m: &[ClientId], edges: &[(usize, Option<usize>)], t: f64) -> TickSnapshot {
    TickSnapshot {
        tick: 1,
        t,
        members: m.to_vec(),
        edges: edges.iter().map(|(s, d)| (m[*s].clone(), d.map(|x| m[x].clone()))).collect(),
        audio: Vec::new(),
    }
}

proptest! {
    #[test]
    fn arrows_plus_glows_cover_every_edge(n in 2usize..9, raw in prop::collection::vec((0usize..8, prop::option::of(0usize..8)), 0..8), v in 0usize..8) {
        let m = members(n);
        let viewer = &m[v % n];
        let mut seen = BTreeSet::new();
        let edges: Vec<(usize, Option<usize>)> = raw
            .into_iter()
            .map(|(s, d)| (s % n, d.map(|x| x % n)))
            .filter(|(s, _)| seen.insert(*s))
            .collect();
        let mut r = Renderer::new(viewer.clone(), RenderConfig::with_mode(LayoutMode::Directional));
        let frame = r.render(&snapshot(&m, &edges, 1000.0)).unwrap().unwrap();
        let arrows: BTreeSet<(ClientId, ClientId)> = frame.arrows.iter().map(|a| (a.source.clone(), a.target.clone())).collect();
        let glows: BTreeSet<ClientId> = frame.glows.iter().map(|g| g.tile.clone()).collect();
        let mut want_arrows = BTreeSet::new();
        let mut want_glows = BTreeSet::new();
        for (s, d) in &edges {
            match d {
                Some(d) if d == s => {}
                Some(d) if &m[*d] == viewer => {
                    want_glows.insert(m[*s].clone());
                }
                Some(d) => {
                    want_arrows.insert((m[*s].clone(), m[*d].clone()));
                }
                None => {}
            }
        }
        prop_assert_eq!(arrows, want_arrows);
        prop_assert_eq!(glows, want_glows);
    }

    #[test]
    fn focus_layout_stays_disjoint(n in 2usize..10, focus in prop::collection::vec((prop::option::of(0usize..10), 100.0f64..4000.0), 1..60)) {
        let m = members(n);
        let base = compute_tile_layout(&m, &m[0], Screen::HD, &LayoutConfig::default()).unwrap();
        let cfg = FocusConfig::default();
        let mut ledger = FocusLedger::new(&base);
        for (f, dt) in focus {
            let target = f.map(|x| m[x % n].clone());
            let (next, layout) = update_focus_layout(&ledger, target.as_ref(), dt, &base, &cfg);
            ledger = next;
            prop_assert_eq!(layout.tiles.len(), n);
            for (i, a) in layout.tiles.iter().enumerate() {
                prop_assert!(a.x >= 0.0 && a.y >= 0.0 && a.right() <= 1920.0 && a.bottom() <= 1080.0);
                for b in &layout.tiles[i + 1..] {
                    prop_assert!(!a.intersects(b), "{:?} {:?}", a, b);
                }
            }
        }
    }

    #[test]
    fn opacity_is_continuous_across_ticks(flips in prop::collection::vec(any::<bool>(), 2..80)) {
        let m = members(3);
        let mut r = Renderer::new(m[2].clone(), RenderConfig::with_mode(LayoutMode::Directional));
        let mut prev = 0.0;
        for (k, on) in flips.into_iter().enumerate() {
            let edges = if on { vec![(0, Some(1))] } else { vec![(0, None)] };
            let frame = r.render(&snapshot(&m, &edges, 16.0 * (k + 1) as f64)).unwrap().unwrap();
            let op = frame.arrows.first().map_or(0.0, |a| a.opacity);
            // One 16 ms tick moves a 300 ms ramp by at most 16/300.
            prop_assert!((op - prev).abs() <= 16.0 / 300.0 + 1e-9, "{prev} -> {op}");
            prev = op;
        }
    }
}
