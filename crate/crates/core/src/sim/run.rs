use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_trace, Scenario, SimError};
use crate::layout::{compute_tile_layout, RenderConfig, RenderFrame, Renderer, TileLayout};
use crate::pipeline::{classify_target, filter_step, ramp_lag_ms, DwellState, FilterState, GazeSample};
use crate::protocol::{EdgeEntry, Message, Role};
use crate::recorder::{EventLog, LogHeader};
use crate::relay::{Session, SessionConfig};
use crate::{ClientId, Millis};

/// Ramp speed used for the reported filter lag, in px/s.
const LAG_RAMP_SPEED: f64 = 100.0;
/// Server edge changes younger than this many ticks at the end of the run
/// are not scored for convergence.
const CONVERGENCE_HORIZON_TICKS: u64 = 10;
/// Sampling quantisation and filter settling added to the dwell period when
/// excluding samples after a scripted change from accuracy.
const TRANSITION_SLACK_TICKS: u64 = 2;
/// Audio level is sent every this many gaze samples.
const AUDIO_EVERY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub id: ClientId,
    /// Fraction of scored samples whose reported target matched the script.
    pub accuracy: f64,
    pub scored_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub members: Vec<MemberReport>,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    /// Delay from a server edge change to each client seeing it, in ticks.
    /// `None` when no change ever reached a client.
    pub mean_convergence_ticks: Option<f64>,
    pub max_convergence_ticks: Option<f64>,
    /// (client, change) pairs that never converged before the run ended.
    pub unconverged: usize,
    /// State broadcasts whose edges differed from the server map they were
    /// built from. Always zero unless the relay is broken.
    pub view_mismatches: usize,
    pub filter_lag_ms: f64,
    pub messages_sent: u64,
    pub messages_dropped: u64,
    pub ticks: u64,
}

/// Everything a run produces besides the report.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub report: SimReport,
    /// The session journal, as the recorder would have written it.
    pub log: EventLog,
    /// Snapshots the simulated host received, ordered by tick.
    pub host_frames: Vec<RenderFrame>,
    /// Frames rendered from the server state at every tick for the observed
    /// member, without going through the network.
    pub live_frames: Vec<RenderFrame>,
}

pub fn run_scenario(scenario: &Scenario) -> Result<SimReport, SimError> {
    Ok(run_scenario_full(scenario)?.report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct At {
    t: Millis,
    seq: u64,
}

impl Eq for At {}

impl PartialOrd for At {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for At {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t.total_cmp(&other.t).then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug)]
enum Event {
    Sample { client: usize, k: usize },
    ServerTick,
    ToServer { from: ClientId, msg: Message },
    /// `version` is the server edge-map version the message was built from.
    ToClient { to: ClientId, msg: Message, version: usize },
}

struct Queue {
    heap: BinaryHeap<Reverse<(At, usize)>>,
    events: Vec<Option<Event>>,
    seq: u64,
}

impl Queue {
    fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            events: Vec::new(),
            seq: 0,
        }
    }

    fn push(&mut self, t: Millis, e: Event) {
        self.seq += 1;
        self.events.push(Some(e));
        self.heap.push(Reverse((At { t, seq: self.seq }, self.events.len() - 1)));
    }

    fn pop(&mut self) -> Option<(Millis, Event)> {
        let Reverse((at, idx)) = self.heap.pop()?;
        Some((at.t, self.events[idx].take().expect("event popped once")))
    }
}

struct Net {
    cfg: super::NetConfig,
    rng: ChaCha8Rng,
    sent: u64,
    dropped: u64,
}

impl Net {
    /// Arrival time, or `None` if the message is lost.
    fn send(&mut self, now: Millis) -> Option<Millis> {
        self.sent += 1;
        let lost = self.cfg.loss > 0.0 && self.rng.random::<f64>() < self.cfg.loss;
        let jitter = if self.cfg.jitter_ms > 0.0 {
            self.rng.random_range(0.0..=self.cfg.jitter_ms)
        } else {
            0.0
        };
        if lost {
            self.dropped += 1;
            return None;
        }
        Some(now + self.cfg.latency_ms + jitter)
    }
}

struct Client {
    id: ClientId,
    layout: TileLayout,
    trace: Vec<GazeSample>,
    filter: FilterState,
    dwell: DwellState,
    gaze_seq: u64,
    audio_seq: u64,
    audio_rng: ChaCha8Rng,
    speaking: bool,
    /// (sample time, reported target) per sample.
    reported: Vec<(Millis, Option<ClientId>)>,
    /// (arrival time, version) per received state broadcast.
    arrivals: Vec<(Millis, usize)>,
}

/// Runs a scenario to completion on a virtual clock.
pub fn run_scenario_full(scenario: &Scenario) -> Result<SimRun, SimError> {
    scenario.validate()?;
    let tick = scenario.tick_ms as Millis;
    let render = RenderConfig {
        mode: scenario.mode,
        screen: scenario.screen,
        layout: scenario.layout,
        ..RenderConfig::default()
    };
    let mut session = Session::new(
        "sim",
        SessionConfig {
            tick_ms: scenario.tick_ms,
            capacity: scenario.members.max(1),
            render,
            ..SessionConfig::default()
        },
    );
    let mut log = EventLog::new(LogHeader::new("sim", scenario.tick_ms, render.fingerprint()));

    let mut ids = Vec::new();
    for _ in 0..scenario.members {
        let joined = session
            .join(Role::Participant, 0.0)
            .map_err(|m| SimError::InvalidScenario(format!("join rejected: {m:?}")))?;
        ids.push(joined.id);
    }
    let host = match scenario.observe {
        Some(target) => {
            let joined = session
                .join(Role::Host, 0.0)
                .map_err(|m| SimError::InvalidScenario(format!("host join rejected: {m:?}")))?;
            session.handle(&joined.id, Message::Observe { target: Some(ids[target].clone()) }, 0.0);
            Some(joined.id)
        }
        None => None,
    };
    log.extend(session.take_journal())?;

    let mut clients = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let layout = compute_tile_layout(&ids, id, scenario.screen, &scenario.layout)?;
        let trace = generate_trace(
            &scenario.scripts[i],
            &ids,
            &layout,
            scenario.noise_sigma,
            scenario.tick_ms,
            scenario.seed.wrapping_add(i as u64),
        );
        clients.push(Client {
            id: id.clone(),
            layout,
            trace,
            filter: FilterState::default(),
            dwell: DwellState::new(None),
            gaze_seq: 0,
            audio_seq: 0,
            audio_rng: ChaCha8Rng::seed_from_u64(scenario.seed ^ 0xa0d1_0000 ^ i as u64),
            speaking: false,
            reported: Vec::new(),
            arrivals: Vec::new(),
        });
    }

    let mut net = Net {
        cfg: scenario.net,
        rng: ChaCha8Rng::seed_from_u64(scenario.seed ^ 0x6e65_7400),
        sent: 0,
        dropped: 0,
    };
    let mut queue = Queue::new();
    for (c, client) in clients.iter().enumerate() {
        if !client.trace.is_empty() {
            queue.push(client.trace[0].t, Event::Sample { client: c, k: 0 });
        }
    }
    // Ticks sit half a period after samples so the two never tie.
    queue.push(tick / 2.0, Event::ServerTick);

    let mut versions: Vec<(Millis, Vec<EdgeEntry>)> = vec![(0.0, session.edges())];
    let mut observer = scenario.observe.map(|o| Renderer::new(ids[o].clone(), render));
    let mut live_frames = Vec::new();
    let mut host_frames: Vec<(u64, RenderFrame)> = Vec::new();
    let mut view_mismatches = 0usize;

    while let Some((now, event)) = queue.pop() {
        match event {
            Event::Sample { client: c, k } => {
                let cl = &mut clients[c];
                let sample = cl.trace[k];
                let (state, smooth) = filter_step(cl.filter, &scenario.filter, sample)
                    .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
                cl.filter = state;
                let candidate = classify_target(smooth.point(), &cl.layout, &cl.id);
                let target = cl.dwell.observe(candidate, sample.t, scenario.dwell_ms);
                cl.reported.push((sample.t, target.clone()));
                cl.gaze_seq += 1;
                let gaze = Message::Gaze {
                    seq: cl.gaze_seq,
                    source: cl.id.clone(),
                    target,
                    t: sample.t,
                };
                if let Some(at) = net.send(now) {
                    queue.push(at, Event::ToServer { from: cl.id.clone(), msg: gaze });
                }
                if k % AUDIO_EVERY == 0 {
                    if cl.audio_rng.random_bool(0.05) {
                        cl.speaking = !cl.speaking;
                    }
                    let level = if cl.speaking {
                        0.3 + 0.4 * cl.audio_rng.random::<f64>()
                    } else {
                        0.02 * cl.audio_rng.random::<f64>()
                    };
                    cl.audio_seq += 1;
                    let audio = Message::Audio {
                        seq: cl.audio_seq,
                        source: cl.id.clone(),
                        level,
                    };
                    if let Some(at) = net.send(now) {
                        queue.push(at, Event::ToServer { from: cl.id.clone(), msg: audio });
                    }
                }
                if let Some(next) = cl.trace.get(k + 1) {
                    queue.push(next.t, Event::Sample { client: c, k: k + 1 });
                }
            }
            Event::ToServer { from, msg } => {
                // Replies to clients (errors) are not modelled.
                let _ = session.handle(&from, msg, now);
                let edges = session.edges();
                if versions.last().is_some_and(|(_, v)| *v != edges) {
                    versions.push((now, edges));
                }
            }
            Event::ServerTick => {
                let version = versions.len() - 1;
                let out = session.broadcast_tick(now);
                if let Some(r) = observer.as_mut() {
                    if let Some(frame) = r.render(&session.snapshot())? {
                        live_frames.push(frame);
                    }
                }
                for o in out {
                    session.report_delivery(&o.to, true, now);
                    if let Some(at) = net.send(now) {
                        queue.push(at, Event::ToClient { to: o.to, msg: o.msg, version });
                    }
                }
                let next = now + tick;
                if next < scenario.duration_ms {
                    queue.push(next, Event::ServerTick);
                }
            }
            Event::ToClient { to, msg, version } => match msg {
                Message::State { edges, .. } => {
                    if edges != versions[version].1 {
                        view_mismatches += 1;
                    }
                    if let Some(cl) = clients.iter_mut().find(|c| c.id == to) {
                        cl.arrivals.push((now, version));
                    }
                }
                Message::Snapshot { tick, frame, .. } if host.as_ref() == Some(&to) => {
                    host_frames.push((tick, *frame));
                }
                _ => {}
            },
        }
        log.extend(session.take_journal())?;
    }
    host_frames.sort_by_key(|(t, _)| *t);

    let members = clients
        .iter()
        .enumerate()
        .map(|(i, cl)| score_member(scenario, &ids, i, cl))
        .collect::<Vec<_>>();
    let accs: Vec<f64> = members.iter().map(|m| m.accuracy).collect();
    let (conv, unconverged) = convergence(scenario, &versions, &clients);
    let report = SimReport {
        mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
        min_accuracy: accs.iter().copied().fold(f64::INFINITY, f64::min),
        members,
        mean_convergence_ticks: (!conv.is_empty()).then(|| conv.iter().sum::<f64>() / conv.len() as f64 / tick),
        max_convergence_ticks: conv.iter().copied().reduce(f64::max).map(|m| m / tick),
        unconverged,
        view_mismatches,
        filter_lag_ms: ramp_lag_ms(&scenario.filter, LAG_RAMP_SPEED, tick, 1000.0, 3000.0),
        messages_sent: net.sent,
        messages_dropped: net.dropped,
        ticks: session.tick(),
    };
    Ok(SimRun {
        report,
        log,
        host_frames: host_frames.into_iter().map(|(_, f)| f).collect(),
        live_frames,
    })
}

/// Accuracy over samples outside the transition window that follows each
/// scripted change (and the start): one dwell period plus a little slack.
fn score_member(scenario: &Scenario, ids: &[ClientId], i: usize, cl: &Client) -> MemberReport {
    let window = scenario.dwell_ms + (TRANSITION_SLACK_TICKS * scenario.tick_ms) as Millis;
    let mut hits = 0usize;
    let mut scored = 0usize;
    for (t, reported) in &cl.reported {
        let seg = scenario.scripts[i]
            .iter()
            .find(|s| *t >= s.start_ms && *t < s.end_ms)
            .expect("sample inside script");
        if *t < seg.start_ms + window {
            continue;
        }
        scored += 1;
        if reported.as_ref() == seg.target.map(|x| &ids[x]) {
            hits += 1;
        }
    }
    MemberReport {
        id: cl.id.clone(),
        accuracy: if scored == 0 { 1.0 } else { hits as f64 / scored as f64 },
        scored_samples: scored,
    }
}

/// Per (client, edge change) delay until the client first receives a
/// broadcast built from that change or a later one.
fn convergence(scenario: &Scenario, versions: &[(Millis, Vec<EdgeEntry>)], clients: &[Client]) -> (Vec<Millis>, usize) {
    let horizon = scenario.duration_ms - (CONVERGENCE_HORIZON_TICKS * scenario.tick_ms) as Millis;
    let mut delays = Vec::new();
    let mut unconverged = 0;
    for cl in clients {
        let mut seen = 0usize;
        // Arrival that last raised `seen`; it is the first to reach any
        // version up to `seen`.
        let mut raised_at = 0.0;
        let mut arrivals = cl.arrivals.iter();
        for (v, (t_v, _)) in versions.iter().enumerate().skip(1) {
            if *t_v > horizon {
                break;
            }
            let mut reached = None;
            if seen >= v {
                reached = Some(raised_at);
            }
            while reached.is_none() {
                match arrivals.next() {
                    Some((at, ver)) => {
                        if *ver > seen {
                            seen = *ver;
                            raised_at = *at;
                        }
                        if seen >= v {
                            reached = Some(*at);
                        }
                    }
                    None => break,
                }
            }
            match reached {
                Some(at) => delays.push((at - t_v).max(0.0)),
                None => unconverged += 1,
            }
        }
    }
    (delays, unconverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::NetConfig;

    fn short(sigma: f64, seed: u64) -> Scenario {
        Scenario::random(4, 15_000.0, sigma, seed)
    }

    #[test]
    fn noiseless_is_perfect() {
        let r = run_scenario(&short(0.0, 1)).unwrap();
        for m in &r.members {
            assert_eq!(m.accuracy, 1.0, "{m:?}");
            assert!(m.scored_samples > 0);
        }
        assert_eq!(r.view_mismatches, 0);
        assert_eq!(r.messages_dropped, 0);
    }

    #[test]
    fn fixed_seed_reproduces() {
        let mut s = short(50.0, 3);
        s.net = NetConfig {
            latency_ms: 20.0,
            jitter_ms: 10.0,
            loss: 0.1,
        };
        s.observe = Some(1);
        let a = run_scenario_full(&s).unwrap();
        let b = run_scenario_full(&s).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.log, b.log);
        assert_eq!(a.host_frames, b.host_frames);
        s.seed = 4;
        assert_ne!(run_scenario(&s).unwrap(), a.report);
    }

    #[test]
    fn total_loss_never_converges() {
        let mut s = short(0.0, 2);
        s.net.loss = 1.0;
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.mean_convergence_ticks, None);
        assert_eq!(r.messages_dropped, r.messages_sent);
    }

    #[test]
    fn lossless_fast_network_converges_within_two_ticks() {
        let mut s = short(30.0, 5);
        s.net = NetConfig {
            latency_ms: 5.0,
            jitter_ms: 2.0,
            loss: 0.0,
        };
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.unconverged, 0);
        assert!(r.max_convergence_ticks.unwrap() <= 2.0, "{r:?}");
    }

    #[test]
    fn accuracy_does_not_improve_with_noise() {
        let acc: Vec<f64> = [0.0, 40.0, 80.0, 160.0]
            .iter()
            .map(|s| run_scenario(&short(*s, 9)).unwrap().mean_accuracy)
            .collect();
        for w in acc.windows(2) {
            assert!(w[1] <= w[0] + 0.01, "{acc:?}");
        }
        assert!(acc[3] < acc[0]);
    }
}
