use std::collections::BTreeSet;

use crate::pipeline::GazeEdge;
use crate::ClientId;

/// Fraction of the other participants currently looking at `target`.
pub fn aggregate_gaze_share(edges: &[GazeEdge], target: &ClientId, members: usize) -> f64 {
    if members < 2 {
        return 0.0;
    }
    let sources: BTreeSet<&ClientId> = edges
        .iter()
        .filter(|e| e.target.as_ref() == Some(target) && &e.source != target)
        .map(|e| &e.source)
        .collect();
    (sources.len() as f64 / (members - 1) as f64).min(1.0)
}
