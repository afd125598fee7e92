use serde::{Deserialize, Serialize};

use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    pub fade_in_ms: Millis,
    pub fade_out_ms: Millis,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            fade_in_ms: 300.0,
            fade_out_ms: 300.0,
        }
    }
}

/// Fade-in/fade-out opacity for a gaze edge.
///
/// `edge_age_ms` is how long the edge has been (or was) active. Once it has
/// ended, `since_end_ms` drives a linear fade from the opacity it reached down
/// to zero.
pub fn opacity_envelope(
    edge_age_ms: Millis,
    since_end_ms: Option<Millis>,
    fade_in_ms: Millis,
    fade_out_ms: Millis,
) -> f64 {
    let reached = (edge_age_ms.max(0.0) / fade_in_ms).min(1.0);
    match since_end_ms {
        None => reached,
        Some(since) => (reached * (1.0 - since.max(0.0) / fade_out_ms)).clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_points() {
        assert_eq!(opacity_envelope(0.0, None, 300.0, 300.0), 0.0);
        assert_eq!(opacity_envelope(150.0, None, 300.0, 300.0), 0.5);
        assert_eq!(opacity_envelope(300.0, None, 300.0, 300.0), 1.0);
        assert_eq!(opacity_envelope(10_000.0, None, 300.0, 300.0), 1.0);
    }

    #[test]
    fn fade_out_is_continuous() {
        assert_eq!(opacity_envelope(500.0, Some(0.0), 300.0, 300.0), 1.0);
        assert_eq!(opacity_envelope(500.0, Some(150.0), 300.0, 300.0), 0.5);
        assert_eq!(opacity_envelope(500.0, Some(300.0), 300.0, 300.0), 0.0);
        assert_eq!(opacity_envelope(500.0, Some(900.0), 300.0, 300.0), 0.0);
        // Ended half-way through the fade-in.
        assert_eq!(opacity_envelope(150.0, Some(0.0), 300.0, 300.0), 0.5);
        assert_eq!(opacity_envelope(150.0, Some(150.0), 300.0, 300.0), 0.25);
    }
}
