//! Per-AP crystal oscillator model, the reference-clock cycle-counting CFO
//! estimator, and the DCXO tuning controller.
//!
//! The estimator counts 40 MHz LO edges over a window defined by the
//! syntonized 125 MHz reference. At the 2.5 s default window the expected
//! count is 100e6 edges, so one count is 0.01 ppm (24.12 Hz at 2412 MHz).
//! The controller applies the full estimated correction in one shot
//! (deadbeat) whenever the measured deviation leaves a small deadband,
//! which reproduces convergence from tens of kHz within a few windows.

use thiserror::Error;

use crate::sim::{RngStream, SimTime};

/// Crystal + DCXO state of one AP.
#[derive(Debug, Clone)]
pub struct OscillatorState {
    pub nominal_hz: f64,
    /// Current raw frequency error of the free-running crystal.
    pub offset_ppm: f64,
    /// Std dev of the Gaussian random-walk increment applied to `offset_ppm`
    /// per measurement period.
    pub drift_step_ppm: f64,
    /// DCXO steps currently applied.
    pub tuning_word: i64,
    /// ppm per DCXO step.
    pub tuning_lsb_ppm: f64,
    /// Crystal stability bound; initial offsets must lie within it and the
    /// effective tuning correction is clamped to it.
    pub stability_bound_ppm: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClockError {
    #[error("initial offset {0} ppm exceeds stability bound {1} ppm")]
    OffsetOutOfBounds(f64, f64),
    #[error("tuning LSB must be positive, got {0}")]
    NonPositiveLsb(f64),
    #[error("expected edge count {0} is not integral (nominal_hz * period_s must be exact)")]
    NonIntegralEdges(f64),
    #[error("empty sample series")]
    EmptySeries,
}

impl OscillatorState {
    pub fn new(
        offset_ppm: f64,
        drift_step_ppm: f64,
        tuning_lsb_ppm: f64,
        stability_bound_ppm: f64,
    ) -> Result<Self, ClockError> {
        if offset_ppm.abs() > stability_bound_ppm {
            return Err(ClockError::OffsetOutOfBounds(
                offset_ppm,
                stability_bound_ppm,
            ));
        }
        if tuning_lsb_ppm <= 0.0 {
            return Err(ClockError::NonPositiveLsb(tuning_lsb_ppm));
        }
        Ok(OscillatorState {
            nominal_hz: 40e6,
            offset_ppm,
            drift_step_ppm,
            tuning_word: 0,
            tuning_lsb_ppm,
            stability_bound_ppm,
        })
    }

    /// Default AD9361-class crystal: 0.0125 ppm worst-case DCXO step,
    /// +-18.1 ppm stability.
    pub fn with_defaults(offset_ppm: f64, drift_step_ppm: f64) -> Result<Self, ClockError> {
        Self::new(offset_ppm, drift_step_ppm, 0.0125, 18.1)
    }

    /// Frequency shift the DCXO word adds, clamped to the stability bound
    /// (the datasheet gives no step range; pulling beyond the crystal's own
    /// stability is meaningless). A negative word pulls the LO down.
    pub fn correction_ppm(&self) -> f64 {
        (self.tuning_word as f64 * self.tuning_lsb_ppm)
            .clamp(-self.stability_bound_ppm, self.stability_bound_ppm)
    }

    /// Residual frequency error after tuning.
    pub fn effective_offset_ppm(&self) -> f64 {
        self.offset_ppm + self.correction_ppm()
    }

    /// Residual error in Hz at the given carrier.
    pub fn true_offset_hz(&self, carrier_hz: f64) -> f64 {
        self.effective_offset_ppm() * carrier_hz * 1e-6
    }

    /// One random-walk drift increment (call once per measurement period).
    pub fn advance_drift(&mut self, rng: &mut RngStream) {
        self.offset_ppm += rng.gaussian(self.drift_step_ppm);
    }

    pub fn apply_tuning_delta(&mut self, delta: i64) {
        self.tuning_word += delta;
    }
}

/// Cycle-counting estimator parameters.
#[derive(Debug, Clone)]
pub struct CfoEstimatorConfig {
    pub ref_hz: f64,
    pub period_s: f64,
    pub expected_edges: u64,
    pub resolution_ppm: f64,
}

impl CfoEstimatorConfig {
    pub fn new(ref_hz: f64, period_s: f64, nominal_hz: f64) -> Result<Self, ClockError> {
        let edges = nominal_hz * period_s;
        if edges.fract() != 0.0 || edges <= 0.0 {
            return Err(ClockError::NonIntegralEdges(edges));
        }
        let expected_edges = edges as u64;
        Ok(CfoEstimatorConfig {
            ref_hz,
            period_s,
            expected_edges,
            resolution_ppm: 1e6 / edges,
        })
    }

    /// 125 MHz reference, 2.5 s window, 40 MHz LO: 100e6 edges, 0.01 ppm.
    pub fn defaults() -> Self {
        Self::new(125e6, 2.5, 40e6).expect("default window is integral")
    }

    pub fn period(&self) -> SimTime {
        SimTime::from_secs_f64(self.period_s)
    }
}

/// One CFO measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoSample {
    pub t: SimTime,
    /// Measured count minus expected count.
    pub count_deviation: i64,
    pub est_ppm: f64,
    pub est_hz_at_carrier: f64,
}

/// Count LO edges over one reference window. The counter gate is not phase
/// aligned to the LO, so the count lands on `floor(true_ratio + phase)` with
/// `phase` uniform in [0, 1): round-toward-zero of the true ratio give or
/// take one count, and never more than one count from the truth.
pub fn measure(
    osc: &OscillatorState,
    cfg: &CfoEstimatorConfig,
    carrier_hz: f64,
    t: SimTime,
    rng: &mut RngStream,
) -> CfoSample {
    let true_ratio = osc.effective_offset_ppm() / cfg.resolution_ppm;
    let phase = rng.uniform01();
    let count_deviation = (true_ratio + phase).floor() as i64;
    let est_ppm = count_deviation as f64 * cfg.resolution_ppm;
    CfoSample {
        t,
        count_deviation,
        est_ppm,
        est_hz_at_carrier: est_ppm * carrier_hz * 1e-6,
    }
}

/// DCXO correction policy.
#[derive(Debug, Clone)]
pub struct TuningControllerConfig {
    /// No correction while |count_deviation| stays at or below this.
    pub deadband_counts: i64,
    pub max_step_per_period: Option<i64>,
    pub enabled: bool,
}

impl Default for TuningControllerConfig {
    fn default() -> Self {
        TuningControllerConfig {
            deadband_counts: 2,
            max_step_per_period: None,
            enabled: true,
        }
    }
}

/// Deadbeat correction: cancel the full estimated offset in one tuning
/// burst, clamped to `max_step_per_period` when set. Returns the tuning-word
/// delta to apply.
pub fn control_step(sample: &CfoSample, ctrl: &TuningControllerConfig, tuning_lsb_ppm: f64) -> i64 {
    if !ctrl.enabled || sample.count_deviation.abs() <= ctrl.deadband_counts {
        return 0;
    }
    let raw = -(sample.est_ppm / tuning_lsb_ppm).round() as i64;
    match ctrl.max_step_per_period {
        Some(max) => raw.clamp(-max, max),
        None => raw,
    }
}

/// Smallest sample magnitude x such that at most `fraction` of the samples
/// exceed x (the empirical 1-fraction quantile of absolute values).
pub fn exceedance_point(series: &[f64], fraction: f64) -> Result<f64, ClockError> {
    if series.is_empty() {
        return Err(ClockError::EmptySeries);
    }
    assert!(
        fraction > 0.0 && fraction < 1.0,
        "fraction must be in (0, 1)"
    );
    let mut abs: Vec<f64> = series.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in CFO series"));
    let n = abs.len();
    let allowed = (fraction * n as f64).floor() as usize;
    Ok(abs[n - 1 - allowed.min(n - 1)])
}
