use serde::{Deserialize, Serialize};

use super::{GazeSample, PipelineError};
use crate::Point;

pub const CALIBRATION_PASS_PERCENT: f64 = 80.0;

/// Hit radius on a 1920 px wide screen; scaled with screen width.
pub const REFERENCE_RADIUS_PX: f64 = 60.0;
const REFERENCE_WIDTH_PX: f64 = 1920.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Percentage in `[0, 100]`.
    pub accuracy: f64,
    pub samples_used: usize,
    pub passed: bool,
}

/// Default hit radius for a screen `screen_w` pixels wide.
pub fn default_radius(screen_w: f64) -> f64 {
    REFERENCE_RADIUS_PX * screen_w / REFERENCE_WIDTH_PX
}

/// Scores one calibration point: the percentage of predictions that landed
/// within `radius` of `target`.
pub fn score_calibration(
    predictions: &[GazeSample],
    target: Point,
    radius: f64,
) -> Result<CalibrationReport, PipelineError> {
    if predictions.is_empty() {
        return Err(PipelineError::InsufficientData);
    }
    let inside = predictions
        .iter()
        .filter(|p| p.point().distance(target) <= radius)
        .count();
    let accuracy = 100.0 * inside as f64 / predictions.len() as f64;
    Ok(CalibrationReport {
        accuracy,
        samples_used: predictions.len(),
        passed: accuracy >= CALIBRATION_PASS_PERCENT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> GazeSample {
        GazeSample::new(0.0, x, y, 1920.0, 1080.0)
    }

    #[test]
    fn all_on_target() {
        let preds = vec![at(500.0, 500.0); 9];
        let r = score_calibration(&preds, Point::new(500.0, 500.0), 60.0).unwrap();
        assert_eq!(r.accuracy, 100.0);
        assert!(r.passed);
        assert_eq!(r.samples_used, 9);
    }

    #[test]
    fn all_at_twice_radius() {
        let preds = vec![at(620.0, 500.0); 5];
        let r = score_calibration(&preds, Point::new(500.0, 500.0), 60.0).unwrap();
        assert_eq!(r.accuracy, 0.0);
        assert!(!r.passed);
    }

    #[test]
    fn seven_of_ten() {
        let mut preds = vec![at(510.0, 500.0); 7];
        preds.extend(vec![at(800.0, 800.0); 3]);
        let r = score_calibration(&preds, Point::new(500.0, 500.0), 60.0).unwrap();
        assert!((r.accuracy - 70.0).abs() < 1e-12);
        assert!(!r.passed);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(
            score_calibration(&[], Point::new(0.0, 0.0), 60.0),
            Err(PipelineError::InsufficientData)
        );
    }

    #[test]
    fn radius_scales_with_width() {
        assert_eq!(default_radius(1920.0), 60.0);
        assert_eq!(default_radius(960.0), 30.0);
    }
}
