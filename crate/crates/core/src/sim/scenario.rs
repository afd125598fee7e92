use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::layout::{LayoutConfig, LayoutMode, Screen};
use crate::pipeline::{FilterParams, DEFAULT_DWELL_MS};
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NetConfig {
    pub latency_ms: Millis,
    /// Extra delay drawn uniformly from `[0, jitter_ms]` per message.
    pub jitter_ms: Millis,
    /// Independent per-message drop probability.
    pub loss: f64,
}

/// Member is looking at `target` (a member index) during `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptSegment {
    pub start_ms: Millis,
    pub end_ms: Millis,
    pub target: Option<usize>,
}

fn default_tick() -> u64 {
    16
}

fn default_dwell() -> Millis {
    DEFAULT_DWELL_MS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub members: usize,
    pub duration_ms: Millis,
    /// One script per member.
    pub scripts: Vec<Vec<ScriptSegment>>,
    /// Standard deviation of the isotropic gaze noise, in pixels.
    pub noise_sigma: f64,
    #[serde(default)]
    pub net: NetConfig,
    pub seed: u64,
    #[serde(default = "default_tick")]
    pub tick_ms: u64,
    #[serde(default = "default_dwell")]
    pub dwell_ms: Millis,
    #[serde(default)]
    pub filter: FilterParams,
    #[serde(default)]
    pub screen: Screen,
    #[serde(default)]
    pub layout: LayoutConfig,
    /// Member index the simulated host observes, if any.
    #[serde(default)]
    pub observe: Option<usize>,
    /// Layout mode used for host snapshots.
    #[serde(default)]
    pub mode: LayoutMode,
}

impl Scenario {
    /// A random but reproducible script: every member switches between
    /// looking at a random peer and looking at nobody every 1-4 seconds.
    pub fn random(members: usize, duration_ms: Millis, noise_sigma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5c21);
        let scripts = (0..members)
            .map(|me| {
                let mut segs = Vec::new();
                let mut t = 0.0;
                let mut prev: Option<Option<usize>> = None;
                while t < duration_ms {
                    let len = rng.random_range(1000.0..4000.0_f64).round();
                    let end = (t + len).min(duration_ms);
                    let target = loop {
                        let pick = if members > 1 && rng.random_bool(0.8) {
                            let other = rng.random_range(0..members - 1);
                            Some(if other >= me { other + 1 } else { other })
                        } else {
                            None
                        };
                        if prev != Some(pick) {
                            break pick;
                        }
                    };
                    segs.push(ScriptSegment {
                        start_ms: t,
                        end_ms: end,
                        target,
                    });
                    prev = Some(target);
                    t = end;
                }
                segs
            })
            .collect();
        Self {
            members,
            duration_ms,
            scripts,
            noise_sigma,
            net: NetConfig::default(),
            seed,
            tick_ms: default_tick(),
            dwell_ms: default_dwell(),
            filter: FilterParams::default(),
            screen: Screen::HD,
            layout: LayoutConfig::default(),
            observe: None,
            mode: LayoutMode::default(),
        }
    }

    /// Validation protocol: every member holds gaze on each peer's tile
    /// center in turn for `hold_ms`, cycling through peers in join order.
    pub fn fixation(members: usize, duration_ms: Millis, hold_ms: Millis, noise_sigma: f64, seed: u64) -> Self {
        let mut s = Self::random(members, duration_ms, noise_sigma, seed);
        s.scripts = (0..members)
            .map(|me| {
                let mut segs = Vec::new();
                let mut t = 0.0;
                let mut k = 0;
                while t < duration_ms {
                    let end = (t + hold_ms).min(duration_ms);
                    segs.push(ScriptSegment {
                        start_ms: t,
                        end_ms: end,
                        target: Some((me + 1 + k % (members - 1)) % members),
                    });
                    t = end;
                    k += 1;
                }
                segs
            })
            .collect();
        s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.members < 2 {
            return bad(format!("need at least 2 members, got {}", self.members));
        }
        if self.scripts.len() != self.members {
            return bad(format!("{} scripts for {} members", self.scripts.len(), self.members));
        }
        if self.duration_ms.is_nan() || self.duration_ms <= 0.0 || self.tick_ms == 0 {
            return bad("duration and tick must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.net.loss) {
            return bad(format!("loss {} outside [0, 1]", self.net.loss));
        }
        if self.net.latency_ms < 0.0 || self.net.jitter_ms < 0.0 || self.noise_sigma < 0.0 {
            return bad("latency, jitter and noise must be non-negative".into());
        }
        if self.observe.is_some_and(|o| o >= self.members) {
            return bad("observed member out of range".into());
        }
        self.filter
            .validate()
            .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        for (me, script) in self.scripts.iter().enumerate() {
            let mut t = 0.0;
            for seg in script {
                if seg.start_ms != t || seg.end_ms.is_nan() || seg.end_ms <= seg.start_ms {
                    return bad(format!("member {me}: segments must tile [0, duration) in order"));
                }
                if seg.target.is_some_and(|x| x >= self.members || x == me) {
                    return bad(format!("member {me}: bad target {:?}", seg.target));
                }
                t = seg.end_ms;
            }
            if t != self.duration_ms {
                return bad(format!("member {me}: script ends at {t}, duration is {}", self.duration_ms));
            }
        }
        Ok(())
    }

    pub fn target_at(&self, member: usize, t: Millis) -> Option<usize> {
        self.scripts[member]
            .iter()
            .find(|s| t >= s.start_ms && t < s.end_ms)
            .and_then(|s| s.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_scripts_are_valid_and_reproducible() {
        let a = Scenario::random(5, 60_000.0, 70.0, 7);
        a.validate().unwrap();
        assert_eq!(a, Scenario::random(5, 60_000.0, 70.0, 7));
        assert_ne!(a.scripts, Scenario::random(5, 60_000.0, 70.0, 8).scripts);
    }

    #[test]
    fn fixation_cycles_through_peers() {
        let s = Scenario::fixation(3, 10_000.0, 2_000.0, 0.0, 1);
        s.validate().unwrap();
        let targets: Vec<_> = s.scripts[0].iter().map(|g| g.target).collect();
        assert_eq!(targets, vec![Some(1), Some(2), Some(1), Some(2), Some(1)]);
        assert_eq!(s.scripts[2][0].target, Some(0));
    }

    #[test]
    fn validation_catches_gaps_and_self_targets() {
        let mut s = Scenario::random(3, 10_000.0, 0.0, 1);
        s.scripts[0][0].end_ms -= 1.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::random(3, 10_000.0, 0.0, 1);
        s.scripts[1][0].target = Some(1);
        assert!(s.validate().is_err());
        let mut s = Scenario::random(3, 10_000.0, 0.0, 1);
        s.net.loss = 1.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_defaults() {
        let json = r#"{"members":2,"duration_ms":100,"seed":1,"noise_sigma":0,
            "scripts":[[{"start_ms":0,"end_ms":100,"target":1}],[{"start_ms":0,"end_ms":100,"target":null}]]}"#;
        let s: Scenario = serde_json::from_str(json).unwrap();
        s.validate().unwrap();
        assert_eq!(s.tick_ms, 16);
        assert_eq!(s.dwell_ms, 100.0);
        assert_eq!(s.net, NetConfig::default());
        assert_eq!(s.target_at(0, 50.0), Some(1));
    }
}
