use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::opacity_envelope;
use crate::{ClientId, Millis};

/// One gaze edge's lifetime as seen by a renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpan {
    pub source: ClientId,
    pub target: ClientId,
    pub started: Millis,
    pub ended: Option<Millis>,
}

impl EdgeSpan {
    pub fn is_active(&self) -> bool {
        self.ended.is_none()
    }

    pub fn opacity(&self, now: Millis, fade_in: Millis, fade_out: Millis) -> f64 {
        match self.ended {
            None => opacity_envelope(now - self.started, None, fade_in, fade_out),
            Some(end) => opacity_envelope(end - self.started, Some(now - end), fade_in, fade_out),
        }
    }
}

/// Turns a sequence of edge-map snapshots into spans with start and end
/// times, keeping ended spans around until they have faded out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeHistory {
    spans: Vec<EdgeSpan>,
}

impl EdgeHistory {
    pub fn spans(&self) -> &[EdgeSpan] {
        &self.spans
    }

    /// Applies the edge map observed at `now`. Sources missing from `edges`
    /// are treated as looking at no one.
    pub fn update<'a, I>(&mut self, edges: I, now: Millis, fade_in: Millis, fade_out: Millis)
    where
        I: IntoIterator<Item = (&'a ClientId, Option<&'a ClientId>)>,
    {
        let current: BTreeMap<&ClientId, &ClientId> = edges
            .into_iter()
            .filter_map(|(s, t)| t.filter(|t| *t != s).map(|t| (s, t)))
            .collect();

        for span in self.spans.iter_mut().filter(|s| s.is_active()) {
            if current.get(&span.source) != Some(&&span.target) {
                span.ended = Some(now);
            }
        }
        for (source, target) in &current {
            let already = self
                .spans
                .iter()
                .any(|s| s.is_active() && &s.source == *source && &s.target == *target);
            if already {
                continue;
            }
            // A pair that comes back while still fading resumes from its
            // current opacity instead of jumping to zero.
            let mut started = now;
            if let Some(pos) = self
                .spans
                .iter()
                .position(|s| &s.source == *source && &s.target == *target)
            {
                let residual = self.spans[pos].opacity(now, fade_in, fade_out);
                started = now - residual * fade_in;
                self.spans.remove(pos);
            }
            self.spans.push(EdgeSpan {
                source: (*source).clone(),
                target: (*target).clone(),
                started,
                ended: None,
            });
        }
        self.spans
            .retain(|s| s.ended.is_none_or(|end| now - end < fade_out));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids() -> (ClientId, ClientId, ClientId) {
        ("a".into(), "b".into(), "c".into())
    }

    #[test]
    fn start_end_and_prune() {
        let (a, b, _) = ids();
        let mut h = EdgeHistory::default();
        h.update([(&a, Some(&b))], 0.0, 300.0, 300.0);
        assert_eq!(h.spans().len(), 1);
        h.update([(&a, Some(&b))], 16.0, 300.0, 300.0);
        assert_eq!(h.spans()[0].started, 0.0);
        h.update([(&a, None)], 400.0, 300.0, 300.0);
        assert_eq!(h.spans()[0].ended, Some(400.0));
        h.update([(&a, None)], 699.0, 300.0, 300.0);
        assert_eq!(h.spans().len(), 1);
        h.update([(&a, None)], 700.0, 300.0, 300.0);
        assert!(h.spans().is_empty());
    }

    #[test]
    fn retarget_keeps_old_span_fading() {
        let (a, b, c) = ids();
        let mut h = EdgeHistory::default();
        h.update([(&a, Some(&b))], 0.0, 300.0, 300.0);
        h.update([(&a, Some(&c))], 500.0, 300.0, 300.0);
        assert_eq!(h.spans().len(), 2);
        assert_eq!(h.spans().iter().filter(|s| s.is_active()).count(), 1);
    }

    #[test]
    fn resume_is_continuous() {
        let (a, b, _) = ids();
        let mut h = EdgeHistory::default();
        h.update([(&a, Some(&b))], 0.0, 300.0, 300.0);
        h.update([(&a, None)], 600.0, 300.0, 300.0);
        let before = h.spans()[0].opacity(750.0, 300.0, 300.0);
        h.update([(&a, Some(&b))], 750.0, 300.0, 300.0);
        assert_eq!(h.spans().len(), 1);
        let after = h.spans()[0].opacity(750.0, 300.0, 300.0);
        assert!((before - after).abs() < 1e-12, "{before} vs {after}");
    }

    #[test]
    fn self_edges_ignored() {
        let (a, _, _) = ids();
        let mut h = EdgeHistory::default();
        h.update([(&a, Some(&a))], 0.0, 300.0, 300.0);
        assert!(h.spans().is_empty());
    }
}
