//! 1€ filter applied independently to both screen axes.
//!
//! <https://gery.casiez.net/1euro/>

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GazeSample, PipelineError};
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Minimum cutoff frequency in Hz. Lower means less jitter, more lag.
    pub mincutoff: f64,
    /// Speed coefficient. Higher means less lag on fast motion.
    pub beta: f64,
    /// Cutoff for the derivative estimate in Hz.
    pub dcutoff: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            mincutoff: 0.3,
            beta: 0.3,
            dcutoff: 1.0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.mincutoff > 0.0 && self.dcutoff > 0.0 && self.beta >= 0.0) {
            return Err(PipelineError::Config(format!(
                "filter params need mincutoff > 0, dcutoff > 0, beta >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Prev {
    x: f64,
    y: f64,
    dx: f64,
    dy: f64,
    t: Millis,
}

/// Per-stream filter memory. `Default` is the uninitialized state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterState {
    prev: Option<Prev>,
}

impl FilterState {
    pub fn is_initialized(&self) -> bool {
        self.prev.is_some()
    }

    pub fn last_t(&self) -> Option<Millis> {
        self.prev.map(|p| p.t)
    }
}

fn alpha(cutoff: f64, te: f64) -> f64 {
    let tau = 1.0 / (2.0 * PI * cutoff);
    1.0 / (1.0 + tau / te)
}

/// Returns `(smoothed, smoothed_derivative)` for one axis.
fn axis(params: &FilterParams, te: f64, x: f64, prev_x: f64, prev_dx: f64) -> (f64, f64) {
    let dx = (x - prev_x) / te;
    let a_d = alpha(params.dcutoff, te);
    let dx_hat = a_d * dx + (1.0 - a_d) * prev_dx;
    let cutoff = params.mincutoff + params.beta * dx_hat.abs();
    let a = alpha(cutoff, te);
    (a * x + (1.0 - a) * prev_x, dx_hat)
}

/// Advances the filter by one sample.
///
/// The first sample passes through unchanged with a zero derivative. A sample
/// whose timestamp does not strictly follow the previous one is rejected and
/// the caller keeps its old state.
pub fn filter_step(
    state: FilterState,
    params: &FilterParams,
    sample: GazeSample,
) -> Result<(FilterState, GazeSample), PipelineError> {
    let Some(prev) = state.prev else {
        let next = Prev {
            x: sample.x,
            y: sample.y,
            dx: 0.0,
            dy: 0.0,
            t: sample.t,
        };
        return Ok((FilterState { prev: Some(next) }, sample));
    };
    if sample.t.is_nan() || sample.t <= prev.t {
        return Err(PipelineError::NonMonotonic {
            prev: prev.t,
            got: sample.t,
        });
    }
    let te = (sample.t - prev.t) / 1000.0;
    let (x, dx) = axis(params, te, sample.x, prev.x, prev.dx);
    let (y, dy) = axis(params, te, sample.y, prev.y, prev.dy);
    let next = Prev {
        x,
        y,
        dx,
        dy,
        t: sample.t,
    };
    Ok((
        FilterState { prev: Some(next) },
        GazeSample { x, y, ..sample },
    ))
}

/// Mean displacement lag, in ms, of the filter tracking a horizontal ramp at
/// `speed` px/s sampled every `tick_ms`, measured over `[warmup_ms, total_ms]`.
pub fn ramp_lag_ms(
    params: &FilterParams,
    speed: f64,
    tick_ms: Millis,
    warmup_ms: Millis,
    total_ms: Millis,
) -> f64 {
    let mut state = FilterState::default();
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut k = 0u64;
    loop {
        let t = k as f64 * tick_ms;
        if t > total_ms {
            break;
        }
        let raw = speed * t / 1000.0;
        let (next, out) = filter_step(state, params, GazeSample::new(t, raw, 0.0, 1920.0, 1080.0))
            .expect("ramp timestamps increase");
        state = next;
        if t >= warmup_ms {
            sum += (raw - out.x).abs() / speed * 1000.0;
            n += 1;
        }
        k += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: f64, x: f64) -> GazeSample {
        GazeSample::new(t, x, x, 1920.0, 1080.0)
    }

    #[test]
    fn first_sample_passes_through() {
        let (state, out) = filter_step(FilterState::default(), &FilterParams::default(), s(0.0, 100.0)).unwrap();
        assert!(state.is_initialized());
        assert_eq!((out.x, out.y), (100.0, 100.0));
    }

    #[test]
    fn constant_stream_is_a_fixed_point() {
        let p = FilterParams::default();
        let mut st = FilterState::default();
        for k in 0..500 {
            let (next, out) = filter_step(st, &p, s(k as f64 * 16.0, 100.0)).unwrap();
            assert_eq!(out.x, 100.0);
            assert_eq!(out.y, 100.0);
            st = next;
        }
    }

    #[test]
    fn second_output_matches_hand_evaluated_recurrence() {
        // Straight-line evaluation of the recurrence for x = [0, 10], Te = 16 ms,
        // params (0.3, 0.3, 1.0), computed outside this crate.
        let p = FilterParams::default();
        let (st, _) = filter_step(FilterState::default(), &p, s(0.0, 0.0)).unwrap();
        let (_, out) = filter_step(st, &p, s(16.0, 10.0)).unwrap();
        assert!((out.x - 6.366309095671828).abs() < 1e-12, "{}", out.x);
    }

    #[test]
    fn non_monotonic_sample_is_rejected() {
        let p = FilterParams::default();
        let (st, _) = filter_step(FilterState::default(), &p, s(16.0, 0.0)).unwrap();
        let err = filter_step(st, &p, s(16.0, 5.0)).unwrap_err();
        assert_eq!(err, PipelineError::NonMonotonic { prev: 16.0, got: 16.0 });
        assert!(filter_step(st, &p, s(8.0, 5.0)).is_err());
        assert_eq!(st.last_t(), Some(16.0));
    }

    #[test]
    fn invalid_params() {
        let mut p = FilterParams::default();
        assert!(p.validate().is_ok());
        p.mincutoff = 0.0;
        assert!(p.validate().is_err());
        p = FilterParams { beta: -1.0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn ramp_lag_under_five_ms() {
        let lag = ramp_lag_ms(&FilterParams::default(), 100.0, 16.0, 1000.0, 3000.0);
        // Steady-state fixed point of the recurrence is ~4.18 ms.
        assert!((lag - 4.176).abs() < 0.01, "{lag}");
    }
}
