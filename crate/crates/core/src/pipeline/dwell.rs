use crate::{ClientId, Millis};

pub const DEFAULT_DWELL_MS: Millis = 100.0;

/// Debounces raw classifications: the reported target only changes once a
/// new candidate has been stable for `dwell_ms`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DwellState {
    reported: Option<ClientId>,
    candidate: Option<ClientId>,
    since: Option<Millis>,
}

impl DwellState {
    pub fn new(initial: Option<ClientId>) -> Self {
        Self {
            reported: initial.clone(),
            candidate: initial,
            since: None,
        }
    }

    pub fn reported(&self) -> Option<&ClientId> {
        self.reported.as_ref()
    }

    /// Feeds one raw candidate observed at `t` and returns the target to
    /// report.
    pub fn observe(&mut self, candidate: Option<ClientId>, t: Millis, dwell_ms: Millis) -> Option<ClientId> {
        if self.since.is_none() || candidate != self.candidate {
            self.candidate = candidate;
            self.since = Some(t);
        }
        let since = self.since.unwrap_or(t);
        if self.candidate != self.reported && t - since >= dwell_ms {
            self.reported = self.candidate.clone();
        }
        self.reported.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> Option<ClientId> {
        Some(s.into())
    }

    #[test]
    fn steady_candidate_reported_after_dwell() {
        let mut d = DwellState::default();
        let mut first = None;
        for k in 0..=12 {
            let t = k as f64 * 16.0;
            let out = d.observe(id("a"), t, 100.0);
            if out.is_some() && first.is_none() {
                first = Some(t);
            }
        }
        // 112 ms is the first 16 ms tick at least 100 ms after the start.
        assert_eq!(first, Some(112.0));
        assert_eq!(d.reported(), Some(&"a".into()));
    }

    #[test]
    fn fast_alternation_never_changes_report() {
        let mut d = DwellState::new(id("z"));
        for k in 0..200 {
            let c = if k % 2 == 0 { id("a") } else { id("b") };
            assert_eq!(d.observe(c, k as f64 * 16.0, 100.0), id("z"));
        }
    }

    #[test]
    fn returning_to_reported_cancels_pending_switch() {
        let mut d = DwellState::new(id("a"));
        d.observe(id("b"), 0.0, 100.0);
        d.observe(id("b"), 64.0, 100.0);
        d.observe(id("a"), 80.0, 100.0);
        assert_eq!(d.observe(id("b"), 96.0, 100.0), id("a"));
        assert_eq!(d.observe(id("b"), 180.0, 100.0), id("a"));
        assert_eq!(d.observe(id("b"), 196.0, 100.0), id("b"));
    }
}
