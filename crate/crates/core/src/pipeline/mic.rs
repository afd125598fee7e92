use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MicState {
    On,
    #[default]
    Off,
}

impl MicState {
    pub fn is_on(self) -> bool {
        self == MicState::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicThresholds {
    pub on: f64,
    pub off: f64,
}

impl Default for MicThresholds {
    fn default() -> Self {
        Self { on: 0.1, off: 0.05 }
    }
}

impl MicThresholds {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if 0.0 <= self.off && self.off < self.on && self.on <= 1.0 {
            Ok(())
        } else {
            Err(PipelineError::Config(format!(
                "mic thresholds need 0 <= off < on <= 1 (got on={}, off={})",
                self.on, self.off
            )))
        }
    }
}

/// Hysteresis between two audio thresholds.
pub fn audio_to_mic_state(level: f64, prev: MicState, thresholds: MicThresholds) -> Result<MicState, PipelineError> {
    thresholds.validate()?;
    Ok(if level >= thresholds.on {
        MicState::On
    } else if level <= thresholds.off {
        MicState::Off
    } else {
        prev
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        let th = MicThresholds::default();
        assert_eq!(audio_to_mic_state(0.0, MicState::Off, th).unwrap(), MicState::Off);
        assert_eq!(audio_to_mic_state(1.0, MicState::Off, th).unwrap(), MicState::On);
    }

    #[test]
    fn sequence_matches_brute_force() {
        let th = MicThresholds { on: 0.5, off: 0.2 };
        let levels = [0.0, 0.3, 0.49, 0.5, 0.3, 0.21, 0.2, 0.35, 0.9, 0.1, 0.6, 0.25];
        // Hand-walked: off until >= 0.5, stays on until <= 0.2.
        let expected = [
            false, false, false, true, true, true, false, false, true, false, true, true,
        ];
        let mut state = MicState::Off;
        for (level, want) in levels.iter().zip(expected) {
            state = audio_to_mic_state(*level, state, th).unwrap();
            assert_eq!(state.is_on(), want, "level {level}");
        }
    }

    #[test]
    fn bad_thresholds() {
        for (on, off) in [(0.2, 0.2), (0.1, 0.3), (1.1, 0.1), (0.5, -0.1)] {
            assert!(audio_to_mic_state(0.0, MicState::Off, MicThresholds { on, off }).is_err());
        }
    }
}
