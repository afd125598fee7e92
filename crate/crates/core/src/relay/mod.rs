//! Session state machine behind the relay server.
//!
//! [`Session`] does no IO. Callers feed it joins, inbound [`Message`]s,
//! ticks and delivery results, and it hands back the [`Outgoing`] messages
//! to send plus a journal of [`SessionEvent`]s for the recorder. The tokio
//! server and the simulator both drive this same type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::layout::{LayoutMode, RenderConfig, Renderer, TickSnapshot};
use crate::protocol::{AudioEntry, EdgeEntry, ErrorCode, Message, Role};
use crate::{ClientId, Millis};

pub const DEFAULT_TICK_MS: u64 = 16;
pub const DEFAULT_CAPACITY: usize = 12;
pub const DEFAULT_MISS_THRESHOLD: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub tick_ms: u64,
    /// Maximum number of participants; the host does not count.
    pub capacity: usize,
    /// Consecutive undeliverable ticks before a member is evicted.
    pub miss_threshold: u32,
    /// Used for host snapshots of an observed participant's view.
    pub render: RenderConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            tick_ms: DEFAULT_TICK_MS,
            capacity: DEFAULT_CAPACITY,
            miss_threshold: DEFAULT_MISS_THRESHOLD,
            render: RenderConfig::with_mode(LayoutMode::Directional),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing {
    pub to: ClientId,
    pub msg: Message,
}

impl Outgoing {
    fn new(to: &ClientId, msg: Message) -> Self {
        Self { to: to.clone(), msg }
    }
}

/// State transitions worth persisting, in the order they were applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum SessionEvent {
    Join {
        id: ClientId,
        role: Role,
    },
    Leave {
        id: ClientId,
    },
    Gaze {
        seq: u64,
        source: ClientId,
        target: Option<ClientId>,
        t: Millis,
    },
    Audio {
        seq: u64,
        source: ClientId,
        level: f64,
    },
    State {
        tick: u64,
        edges: Vec<EdgeEntry>,
        audio: Vec<AudioEntry>,
    },
    Observe {
        host: ClientId,
        target: Option<ClientId>,
    },
}

#[derive(Debug, Clone)]
pub struct Joined {
    pub id: ClientId,
    pub role: Role,
    pub out: Vec<Outgoing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Stream {
    Gaze,
    Audio,
}

#[derive(Debug, Clone)]
struct Conn {
    role: Role,
    misses: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub anomalies: u64,
    pub stale: u64,
    pub evictions: u64,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    config: SessionConfig,
    conns: BTreeMap<ClientId, Conn>,
    /// Participants in join order.
    members: Vec<ClientId>,
    host: Option<ClientId>,
    edges: BTreeMap<ClientId, Option<ClientId>>,
    audio: BTreeMap<ClientId, f64>,
    last_seq: BTreeMap<(ClientId, Stream), u64>,
    observer: Option<Renderer>,
    tick: u64,
    next_client: u64,
    counters: Counters,
    journal: Vec<(Millis, SessionEvent)>,
}

impl Session {
    pub fn new(id: impl Into<String>, config: SessionConfig) -> Self {
        Self {
            id: id.into(),
            config,
            conns: BTreeMap::new(),
            members: Vec::new(),
            host: None,
            edges: BTreeMap::new(),
            audio: BTreeMap::new(),
            last_seq: BTreeMap::new(),
            observer: None,
            tick: 0,
            next_client: 0,
            counters: Counters::default(),
            journal: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn members(&self) -> &[ClientId] {
        &self.members
    }

    pub fn host(&self) -> Option<&ClientId> {
        self.host.as_ref()
    }

    pub fn observed(&self) -> Option<&ClientId> {
        self.observer.as_ref().map(Renderer::viewer)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn is_connected(&self, id: &ClientId) -> bool {
        self.conns.contains_key(id)
    }

    /// Current edge map in join order.
    pub fn edges(&self) -> Vec<EdgeEntry> {
        self.members
            .iter()
            .filter_map(|m| {
                self.edges.get(m).map(|t| EdgeEntry {
                    source: m.clone(),
                    target: t.clone(),
                })
            })
            .collect()
    }

    pub fn audio(&self) -> Vec<AudioEntry> {
        self.members
            .iter()
            .filter_map(|m| {
                self.audio.get(m).map(|l| AudioEntry {
                    id: m.clone(),
                    level: *l,
                })
            })
            .collect()
    }

    /// What renderers see at the current tick.
    pub fn snapshot(&self) -> TickSnapshot {
        snapshot_at(self.tick, self.config.tick_ms, &self.members, &self.edges(), &self.audio())
    }

    /// Drains the journal of applied events, each with the time it happened.
    pub fn take_journal(&mut self) -> Vec<(Millis, SessionEvent)> {
        std::mem::take(&mut self.journal)
    }

    /// Admits a new connection. On rejection the error message is returned
    /// for the caller to send before closing.
    pub fn join(&mut self, role: Role, now: Millis) -> Result<Joined, Message> {
        let mut role = role;
        let mut warning = None;
        if role == Role::Host && self.host.is_some() {
            role = Role::Participant;
            log::warn!("session {}: host already present, downgrading to participant", self.id);
            warning = Some(Message::error(
                ErrorCode::HostTaken,
                "session already has a host; joined as participant",
            ));
        }
        if role == Role::Participant && self.members.len() >= self.config.capacity {
            return Err(Message::error(
                ErrorCode::CapacityExceeded,
                format!("session is full ({} participants)", self.config.capacity),
            ));
        }

        self.next_client += 1;
        let id = ClientId::new(format!("c{}", self.next_client));
        let mut notify = Vec::new();
        if role == Role::Participant {
            for peer in self.conns.keys() {
                notify.push(Outgoing::new(peer, Message::PeerJoined { id: id.clone() }));
            }
            self.members.push(id.clone());
        } else {
            self.host = Some(id.clone());
        }
        self.conns.insert(id.clone(), Conn { role, misses: 0 });

        let mut out = vec![Outgoing::new(
            &id,
            Message::Welcome {
                id: id.clone(),
                members: self.members.clone(),
                tick_ms: self.config.tick_ms,
            },
        )];
        out.extend(warning.map(|w| Outgoing::new(&id, w)));
        out.extend(notify);
        self.journal.push((now, SessionEvent::Join { id: id.clone(), role }));
        Ok(Joined { id, role, out })
    }

    /// Removes a connection, whether it closed or was evicted.
    pub fn leave(&mut self, id: &ClientId, now: Millis) -> Vec<Outgoing> {
        let Some(conn) = self.conns.remove(id) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        match conn.role {
            Role::Host => {
                self.host = None;
                self.observer = None;
            }
            Role::Participant => {
                self.members.retain(|m| m != id);
                self.edges.remove(id);
                self.audio.remove(id);
                for target in self.edges.values_mut() {
                    if target.as_ref() == Some(id) {
                        *target = None;
                    }
                }
                if self.observed() == Some(id) {
                    self.observer = None;
                }
                for peer in self.conns.keys() {
                    out.push(Outgoing::new(peer, Message::PeerLeft { id: id.clone() }));
                }
            }
        }
        self.last_seq.retain(|(c, _), _| c != id);
        self.journal.push((now, SessionEvent::Leave { id: id.clone() }));
        out
    }

    /// Handles one inbound message from a joined connection.
    pub fn handle(&mut self, from: &ClientId, msg: Message, now: Millis) -> Vec<Outgoing> {
        let Some(role) = self.conns.get(from).map(|c| c.role) else {
            log::debug!("message from unknown connection {from} dropped");
            self.counters.anomalies += 1;
            return Vec::new();
        };
        match msg {
            Message::Signal { from: claimed, to, payload } => {
                if &claimed != from {
                    return vec![Outgoing::new(
                        from,
                        Message::error(ErrorCode::BadMessage, "signal sender does not match connection"),
                    )];
                }
                if !self.conns.contains_key(&to) {
                    return vec![Outgoing::new(
                        from,
                        Message::error(ErrorCode::UnknownRecipient, format!("no member {to}")),
                    )];
                }
                let dest = to.clone();
                vec![Outgoing::new(&dest, Message::Signal { from: claimed, to, payload })]
            }
            Message::Gaze { seq, source, target, t } => {
                if &source != from || !self.members.contains(&source) {
                    self.counters.anomalies += 1;
                    return Vec::new();
                }
                if !self.accept_seq(&source, Stream::Gaze, seq) {
                    return Vec::new();
                }
                let target = match target {
                    Some(t) if t == source => None,
                    Some(t) if !self.members.contains(&t) => {
                        self.counters.anomalies += 1;
                        None
                    }
                    other => other,
                };
                self.edges.insert(source.clone(), target.clone());
                self.journal.push((now, SessionEvent::Gaze { seq, source, target, t }));
                Vec::new()
            }
            Message::Audio { seq, source, level } => {
                if &source != from || !self.members.contains(&source) {
                    self.counters.anomalies += 1;
                    return Vec::new();
                }
                if !self.accept_seq(&source, Stream::Audio, seq) {
                    return Vec::new();
                }
                let level = if level.is_finite() { level.clamp(0.0, 1.0) } else { 0.0 };
                self.audio.insert(source.clone(), level);
                self.journal.push((now, SessionEvent::Audio { seq, source, level }));
                Vec::new()
            }
            Message::Observe { target } => {
                if role != Role::Host {
                    return vec![Outgoing::new(
                        from,
                        Message::error(ErrorCode::NotHost, "only the host may observe"),
                    )];
                }
                match &target {
                    Some(t) if !self.members.contains(t) => {
                        return vec![Outgoing::new(
                            from,
                            Message::error(ErrorCode::UnknownTarget, format!("no participant {t}")),
                        )];
                    }
                    Some(t) => self.observer = Some(Renderer::new(t.clone(), self.config.render)),
                    None => self.observer = None,
                }
                self.journal.push((
                    now,
                    SessionEvent::Observe {
                        host: from.clone(),
                        target,
                    },
                ));
                Vec::new()
            }
            other => vec![Outgoing::new(
                from,
                Message::error(
                    ErrorCode::BadMessage,
                    format!("unexpected {} message from client", other.kind()),
                ),
            )],
        }
    }

    fn accept_seq(&mut self, source: &ClientId, stream: Stream, seq: u64) -> bool {
        let key = (source.clone(), stream);
        match self.last_seq.get(&key) {
            Some(last) if seq <= *last => {
                self.counters.stale += 1;
                false
            }
            _ => {
                self.last_seq.insert(key, seq);
                true
            }
        }
    }

    /// Advances the session clock by one tick and broadcasts the coalesced
    /// state to every connection, plus a snapshot for an observing host.
    pub fn broadcast_tick(&mut self, now: Millis) -> Vec<Outgoing> {
        self.tick += 1;
        let edges = self.edges();
        let audio = self.audio();
        let state = Message::State {
            tick: self.tick,
            edges: edges.clone(),
            audio: audio.clone(),
        };
        let mut out: Vec<Outgoing> = self.conns.keys().map(|c| Outgoing::new(c, state.clone())).collect();
        self.journal.push((
            now,
            SessionEvent::State {
                tick: self.tick,
                edges: edges.clone(),
                audio: audio.clone(),
            },
        ));

        if let (Some(host), Some(renderer)) = (self.host.clone(), self.observer.as_mut()) {
            let snap = snapshot_at(self.tick, self.config.tick_ms, &self.members, &edges, &audio);
            match renderer.render(&snap) {
                Ok(Some(frame)) => out.push(Outgoing::new(
                    &host,
                    Message::Snapshot {
                        viewer: renderer.viewer().clone(),
                        tick: self.tick,
                        frame: Box::new(frame),
                    },
                )),
                Ok(None) => {}
                Err(e) => log::warn!("session {}: observed frame failed: {e}", self.id),
            }
        }
        out
    }

    /// Reports whether a tick broadcast reached `id`. Too many consecutive
    /// misses evict the connection.
    pub fn report_delivery(&mut self, id: &ClientId, delivered: bool, now: Millis) -> Vec<Outgoing> {
        let threshold = self.config.miss_threshold;
        let Some(conn) = self.conns.get_mut(id) else {
            return Vec::new();
        };
        if delivered {
            conn.misses = 0;
            return Vec::new();
        }
        conn.misses += 1;
        if conn.misses < threshold {
            return Vec::new();
        }
        log::info!("session {}: evicting {id} after {threshold} missed ticks", self.id);
        self.counters.evictions += 1;
        self.leave(id, now)
    }
}

/// Builds the renderer input for a broadcast tick.
pub fn snapshot_at(
    tick: u64,
    tick_ms: u64,
    members: &[ClientId],
    edges: &[EdgeEntry],
    audio: &[AudioEntry],
) -> TickSnapshot {
    TickSnapshot {
        tick,
        t: (tick * tick_ms) as Millis,
        members: members.to_vec(),
        edges: edges.iter().map(|e| (e.source.clone(), e.target.clone())).collect(),
        audio: audio.iter().map(|a| (a.id.clone(), a.level)).collect(),
    }
}
