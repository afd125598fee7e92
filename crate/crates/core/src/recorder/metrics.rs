use std::collections::BTreeMap;

use serde::Serialize;

use super::EventLog;
use crate::protocol::Role;
use crate::relay::SessionEvent;
use crate::{ClientId, Millis};

/// `cells[i][j]` is the fraction of the session member `i` spent looking at
/// member `j`; `idle[i]` is the fraction spent looking at nobody (or absent).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttentionMatrix {
    pub members: Vec<ClientId>,
    pub cells: Vec<Vec<f64>>,
    pub idle: Vec<f64>,
    pub duration_ms: Millis,
}

impl AttentionMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source");
        for m in &self.members {
            out.push(',');
            out.push_str(m.as_str());
        }
        out.push_str(",idle\n");
        for (i, m) in self.members.iter().enumerate() {
            out.push_str(m.as_str());
            for v in &self.cells[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.idle[i]));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualEpisode {
    pub a: ClientId,
    pub b: ClientId,
    pub start: Millis,
    pub end: Millis,
}

/// Replays membership and gaze records as a step function of the edge map,
/// calling `segment` for every interval between consecutive record times.
fn sweep(log: &EventLog, mut segment: impl FnMut(&[ClientId], &BTreeMap<ClientId, ClientId>, Millis, Millis)) -> (Vec<ClientId>, Millis, Millis) {
    let records = log.records();
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return (Vec::new(), 0.0, 0.0);
    };
    let mut everyone: Vec<ClientId> = Vec::new();
    let mut present: Vec<ClientId> = Vec::new();
    let mut edges: BTreeMap<ClientId, ClientId> = BTreeMap::new();
    let mut prev_t = first.wall_t;
    for rec in records {
        if rec.wall_t > prev_t {
            segment(&present, &edges, prev_t, rec.wall_t);
            prev_t = rec.wall_t;
        }
        match &rec.event {
            SessionEvent::Join {
                id,
                role: Role::Participant,
            } => {
                if !everyone.contains(id) {
                    everyone.push(id.clone());
                }
                if !present.contains(id) {
                    present.push(id.clone());
                }
            }
            SessionEvent::Leave { id } => {
                present.retain(|m| m != id);
                edges.remove(id);
                edges.retain(|_, t| t != id);
            }
            SessionEvent::Gaze { source, target, .. } => {
                match target.as_ref().filter(|t| *t != source && present.contains(t)) {
                    Some(t) if present.contains(source) => {
                        edges.insert(source.clone(), t.clone());
                    }
                    _ => {
                        edges.remove(source);
                    }
                }
            }
            _ => {}
        }
    }
    (everyone, first.wall_t, last.wall_t)
}

/// Dwell fractions of who looked at whom over the whole log.
pub fn attention_matrix(log: &EventLog) -> AttentionMatrix {
    let mut looked: BTreeMap<(ClientId, ClientId), Millis> = BTreeMap::new();
    let mut idle_ms: BTreeMap<ClientId, Millis> = BTreeMap::new();
    let mut seen: Vec<ClientId> = Vec::new();
    let (members, start, end) = sweep(log, |present, edges, t0, t1| {
        let dt = t1 - t0;
        for m in present {
            if !seen.contains(m) {
                seen.push(m.clone());
            }
            match edges.get(m) {
                Some(t) => *looked.entry((m.clone(), t.clone())).or_default() += dt,
                None => *idle_ms.entry(m.clone()).or_default() += dt,
            }
        }
    });
    let duration = end - start;
    let n = members.len();
    let mut cells = vec![vec![0.0; n]; n];
    let mut idle = vec![1.0; n];
    if duration > 0.0 {
        for (i, src) in members.iter().enumerate() {
            for (j, dst) in members.iter().enumerate() {
                cells[i][j] = looked.get(&(src.clone(), dst.clone())).copied().unwrap_or(0.0) / duration;
            }
            // Time before joining or after leaving counts as idle.
            let present_ms: Millis = idle_ms.get(src).copied().unwrap_or(0.0)
                + looked
                    .iter()
                    .filter(|((s, _), _)| s == src)
                    .map(|(_, v)| *v)
                    .sum::<Millis>();
            let absent_ms = duration - present_ms;
            idle[i] = (idle_ms.get(src).copied().unwrap_or(0.0) + absent_ms) / duration;
        }
    }
    AttentionMatrix {
        members,
        cells,
        idle,
        duration_ms: duration,
    }
}

/// Maximal intervals in which two members were looking at each other.
/// Pairs are ordered by join order.
pub fn mutual_gaze_episodes(log: &EventLog) -> Vec<MutualEpisode> {
    let mut open: BTreeMap<(ClientId, ClientId), Millis> = BTreeMap::new();
    let mut episodes = Vec::new();
    let mut join_order: Vec<ClientId> = Vec::new();
    let (members, _, end) = sweep(log, |present, edges, t0, _t1| {
        for m in present {
            if !join_order.contains(m) {
                join_order.push(m.clone());
            }
        }
        let rank = |c: &ClientId| join_order.iter().position(|m| m == c).unwrap_or(usize::MAX);
        let mut now_mutual = Vec::new();
        for (a, b) in edges {
            if edges.get(b) == Some(a) && rank(a) < rank(b) {
                now_mutual.push((a.clone(), b.clone()));
            }
        }
        let ended: Vec<_> = open.keys().filter(|k| !now_mutual.contains(k)).cloned().collect();
        for pair in ended {
            let start = open.remove(&pair).expect("key exists");
            episodes.push(MutualEpisode {
                a: pair.0,
                b: pair.1,
                start,
                end: t0,
            });
        }
        for pair in now_mutual {
            open.entry(pair).or_insert(t0);
        }
    });
    let _ = members;
    for ((a, b), start) in open {
        episodes.push(MutualEpisode { a, b, start, end });
    }
    episodes.sort_by(|x, y| x.start.total_cmp(&y.start).then_with(|| (&x.a, &x.b).cmp(&(&y.a, &y.b))));
    episodes
}
