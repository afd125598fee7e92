//! Browser demo: the pointer stands in for the viewer's gaze, clicks script
//! what the other participants look at, and every animation frame renders
//! the viewer's RenderFrame in the chosen layout mode.

use std::collections::BTreeMap;

use gazelink_core::layout::{compute_tile_layout, LayoutMode, RenderConfig, RenderFrame, Renderer, Screen, TickSnapshot, TileLayout};
use gazelink_core::pipeline::{classify_target, filter_step, DwellState, FilterParams, FilterState, GazeSample, DEFAULT_DWELL_MS};
use gazelink_core::{ClientId, Point};
use wasm_bindgen::prelude::*;

/// Result of feeding one pointer sample through the gaze pipeline.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GazeReading {
    pub raw: Point,
    pub smoothed: Point,
    /// Tile whose central area the smoothed point is in.
    pub candidate: Option<ClientId>,
    /// Target after dwell hysteresis; this is what gets sent.
    pub reported: Option<ClientId>,
}

pub struct DemoState {
    members: Vec<ClientId>,
    screen: Screen,
    layout: TileLayout,
    renderer: Renderer,
    filter: FilterState,
    dwell: DwellState,
    edges: BTreeMap<ClientId, Option<ClientId>>,
    clock: f64,
    tick: u64,
    /// Peer picked by the last click, waiting for a target click.
    armed: Option<ClientId>,
}

impl DemoState {
    pub fn new(members: usize, width: f64, height: f64, mode: LayoutMode) -> Result<Self, String> {
        let members: Vec<ClientId> = (1..=members.max(2)).map(|i| ClientId::new(format!("c{i}"))).collect();
        let screen = Screen::new(width, height);
        let layout = compute_tile_layout(&members, &members[0], screen, &Default::default()).map_err(|e| e.to_string())?;
        let config = RenderConfig {
            mode,
            screen,
            ..RenderConfig::default()
        };
        Ok(Self {
            renderer: Renderer::new(members[0].clone(), config),
            members,
            screen,
            layout,
            filter: FilterState::default(),
            dwell: DwellState::default(),
            edges: BTreeMap::new(),
            clock: 0.0,
            tick: 0,
            armed: None,
        })
    }

    pub fn viewer(&self) -> &ClientId {
        &self.members[0]
    }

    pub fn set_mode(&mut self, mode: LayoutMode) {
        let config = RenderConfig {
            mode,
            ..*self.renderer.config()
        };
        self.renderer = Renderer::new(self.viewer().clone(), config);
    }

    /// Pointer position at `t` ms, treated as the viewer's gaze.
    pub fn pointer(&mut self, t: f64, x: f64, y: f64) -> Result<GazeReading, String> {
        let sample = GazeSample::new(t, x, y, self.screen.w, self.screen.h);
        let (state, smooth) = filter_step(self.filter, &FilterParams::default(), sample).map_err(|e| e.to_string())?;
        self.filter = state;
        let candidate = classify_target(smooth.point(), &self.layout, self.viewer());
        let reported = self.dwell.observe(candidate.clone(), t, DEFAULT_DWELL_MS);
        self.edges.insert(self.viewer().clone(), reported.clone());
        Ok(GazeReading {
            raw: sample.point(),
            smoothed: smooth.point(),
            candidate,
            reported,
        })
    }

    /// First click on a peer's tile picks it; the next click on any tile makes
    /// it look there, and a click between tiles makes it look at nobody.
    pub fn click(&mut self, x: f64, y: f64) -> Option<ClientId> {
        let p = Point::new(x, y);
        let hit = self.layout.tiles.iter().find(|t| t.contains(p)).map(|t| t.owner.clone());
        match self.armed.take() {
            Some(source) => {
                let target = hit.filter(|h| *h != source);
                self.edges.insert(source, target);
                None
            }
            None => {
                self.armed = hit.filter(|h| h != self.viewer());
                self.armed.clone()
            }
        }
    }

    /// Advances the clock and renders the viewer's frame.
    pub fn step(&mut self, dt_ms: f64) -> Result<RenderFrame, String> {
        self.clock += dt_ms.max(0.0);
        self.tick += 1;
        let snap = TickSnapshot {
            tick: self.tick,
            t: self.clock,
            members: self.members.clone(),
            edges: self.edges.iter().map(|(s, t)| (s.clone(), t.clone())).collect(),
            audio: Vec::new(),
        };
        self.renderer
            .render(&snap)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "viewer is alone".to_string())
    }
}

fn js_err(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json(v: &impl serde::Serialize) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(js_err)
}

#[wasm_bindgen]
pub struct Demo {
    state: DemoState,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(members: usize, width: f64, height: f64, mode: &str) -> Result<Demo, JsValue> {
        let mode = mode.parse().map_err(js_err)?;
        Ok(Demo {
            state: DemoState::new(members, width, height, mode).map_err(js_err)?,
        })
    }

    pub fn set_mode(&mut self, mode: &str) -> Result<(), JsValue> {
        self.state.set_mode(mode.parse().map_err(js_err)?);
        Ok(())
    }

    /// JSON `GazeReading`.
    pub fn pointer(&mut self, t: f64, x: f64, y: f64) -> Result<String, JsValue> {
        to_json(&self.state.pointer(t, x, y).map_err(js_err)?)
    }

    /// Id of the peer now waiting for a target, or empty.
    pub fn click(&mut self, x: f64, y: f64) -> String {
        self.state.click(x, y).map(|c| c.to_string()).unwrap_or_default()
    }

    /// JSON `RenderFrame`.
    pub fn step(&mut self, dt_ms: f64) -> Result<String, JsValue> {
        to_json(&self.state.step(dt_ms).map_err(js_err)?)
    }
}
