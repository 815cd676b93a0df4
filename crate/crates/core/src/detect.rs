//! Streaming leak detector for a two-sensor pipeline section.
//!
//! Samples from the inlet and outlet sensors are compared against a
//! baseline. Once k consecutive exceedances confirm a leak, the detector
//! waits until t̂₀ + t₁ and localizes from the first sample of each sensor
//! at or after that instant.
//!
//! ```text
//! IDLE ──exceed──▶ SUSPECT ──k exceedances──▶ FIXATION_WAIT ──both sensors ≥ t̂₀+t₁──▶ MONITORING
//!   ▲                 │ residual < threshold·hysteresis                                 │
//!   └─────────────────┘◀──────────────────── both residuals back below hysteresis ◀─────┘
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localize::{estimate, fixation_time, DropPair, LocalizationReport, Method};
use crate::model::PipelineSpec;
use crate::series::SeriesControl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inlet,
    Outlet,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Location::Inlet => "inlet",
            Location::Outlet => "outlet",
        })
    }
}

/// One pressure reading, serialized as `{"t": .., "loc": .., "p": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    #[serde(rename = "t")]
    pub time: f64,
    #[serde(rename = "loc")]
    pub location: Location,
    #[serde(rename = "p")]
    pub pressure: f64,
}

impl SensorSample {
    pub fn validate(&self) -> Result<()> {
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::domain(format!("sample time {} must be >= 0", self.time)));
        }
        if !(self.pressure.is_finite() && self.pressure > 0.0) {
            return Err(Error::domain(format!("sample pressure {} must be positive", self.pressure)));
        }
        Ok(())
    }
}

/// Where the expected pre-leak pressures come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Baseline {
    /// The configured steady profile at x = 0 and x = L.
    Steady,
    /// Mean of the first `samples` readings of each sensor.
    Calibrate { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    /// Pa.
    pub threshold: f64,
    pub confirm_count: usize,
    /// s.
    pub cadence: f64,
    /// s; derived from the wave transit time when absent.
    pub fixation: Option<f64>,
    /// Fraction of the threshold below which a suspect run resets.
    pub hysteresis: f64,
    pub methods: Vec<Method>,
    pub baseline: Baseline,
    /// Cadences to wait for the second sensor once the first has passed t̂₀ + t₁.
    pub counterpart_timeout: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            threshold: 500.0,
            confirm_count: 3,
            cadence: 10.0,
            fixation: None,
            hysteresis: 0.5,
            methods: vec![Method::ClosedForm, Method::NumericInversion],
            baseline: Baseline::Steady,
            counterpart_timeout: 3.0,
        }
    }
}

impl DetectionConfig {
    /// Validates the configuration and returns the fixation time t₁ in use.
    pub fn resolve(&self, spec: &PipelineSpec) -> Result<f64> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::config("threshold must be positive"));
        }
        if self.confirm_count < 1 {
            return Err(Error::config("confirm_count must be at least 1"));
        }
        if !(self.cadence.is_finite() && self.cadence > 0.0) {
            return Err(Error::config("cadence must be positive"));
        }
        if !(self.hysteresis > 0.0 && self.hysteresis <= 1.0) {
            return Err(Error::config("hysteresis must lie in (0, 1]"));
        }
        if !(self.counterpart_timeout.is_finite() && self.counterpart_timeout >= 0.0) {
            return Err(Error::config("counterpart_timeout must be >= 0"));
        }
        if let Baseline::Calibrate { samples } = self.baseline {
            if samples == 0 {
                return Err(Error::config("calibration needs at least one sample"));
            }
        }
        let t1 = match self.fixation {
            Some(t1) => t1,
            None => fixation_time(spec, self.cadence)?,
        };
        if !(t1.is_finite() && t1 >= self.cadence) {
            return Err(Error::config(format!(
                "fixation time {t1} s must be at least one cadence ({} s)",
                self.cadence
            )));
        }
        Ok(t1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Calibrating,
    Idle,
    Suspect,
    FixationWait,
    Monitoring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Alarm,
    Localization,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalizationStatus {
    Ok,
    InsufficientData,
    UndefinedRatio,
    InconsistentObservation,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlarmPayload {
    pub trigger: SensorSample,
    pub onset_estimate: f64,
    pub onset_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationPayload {
    pub status: LocalizationStatus,
    pub method: Method,
    pub onset_estimate: f64,
    pub elapsed_s: Option<f64>,
    pub inlet_drop_pa: Option<f64>,
    pub outlet_drop_pa: Option<f64>,
    pub report: Option<LocalizationReport>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResetPayload {
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EventPayload {
    Alarm(AlarmPayload),
    Localization(LocalizationPayload),
    Reset(ResetPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionEvent {
    pub kind: EventKind,
    pub time: f64,
    pub payload: EventPayload,
}

impl DetectionEvent {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }
}

#[derive(Debug, Clone, Default)]
struct Track {
    last_time: Option<f64>,
    baseline: f64,
    calibration_sum: f64,
    calibration_count: usize,
    run_start: Option<f64>,
    count: usize,
    last_residual: f64,
    fixation_sample: Option<SensorSample>,
}

impl Track {
    fn clear_run(&mut self) {
        self.run_start = None;
        self.count = 0;
    }
}

/// Detector state for one pipeline. Samples must be fed by a single writer.
#[derive(Debug, Clone)]
pub struct Detector {
    spec: PipelineSpec,
    cfg: DetectionConfig,
    ctrl: SeriesControl,
    t1: f64,
    phase: Phase,
    inlet: Track,
    outlet: Track,
    onset: Option<f64>,
    clock: f64,
}

const ONSET_NOTE: &str =
    "first threshold exceedance; lags the true onset by up to the wave transit time L/c";

impl Detector {
    pub fn new(spec: &PipelineSpec, cfg: &DetectionConfig, ctrl: &SeriesControl) -> Result<Self> {
        let t1 = cfg.resolve(spec)?;
        ctrl.validate()?;
        let mut inlet = Track::default();
        let mut outlet = Track::default();
        let phase = match cfg.baseline {
            Baseline::Steady => {
                inlet.baseline = spec.inlet_pressure();
                outlet.baseline = spec.outlet_pressure();
                Phase::Idle
            }
            Baseline::Calibrate { .. } => Phase::Calibrating,
        };
        Ok(Self {
            spec: *spec,
            cfg: cfg.clone(),
            ctrl: *ctrl,
            t1,
            phase,
            inlet,
            outlet,
            onset: None,
            clock: 0.0,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn fixation(&self) -> f64 {
        self.t1
    }

    pub fn onset_estimate(&self) -> Option<f64> {
        self.onset
    }

    pub fn baselines(&self) -> (f64, f64) {
        (self.inlet.baseline, self.outlet.baseline)
    }

    fn track_mut(&mut self, loc: Location) -> &mut Track {
        match loc {
            Location::Inlet => &mut self.inlet,
            Location::Outlet => &mut self.outlet,
        }
    }

    fn event(&self, kind: EventKind, payload: EventPayload) -> DetectionEvent {
        DetectionEvent {
            kind,
            time: self.clock,
            payload,
        }
    }

    /// Consumes one sample. An out-of-order sample is rejected and leaves the state untouched.
    pub fn ingest(&mut self, sample: SensorSample) -> Result<Vec<DetectionEvent>> {
        sample.validate()?;
        let track = self.track_mut(sample.location);
        if let Some(last) = track.last_time {
            if sample.time < last {
                return Err(Error::Ordering {
                    location: sample.location.to_string(),
                    time: sample.time,
                    last,
                });
            }
        }
        track.last_time = Some(sample.time);
        self.clock = self.clock.max(sample.time);

        if self.phase == Phase::Calibrating {
            self.calibrate(sample);
            return Ok(Vec::new());
        }

        let threshold = self.cfg.threshold;
        let low = threshold * self.cfg.hysteresis;
        let track = self.track_mut(sample.location);
        let residual = (track.baseline - sample.pressure).abs();
        track.last_residual = residual;

        let mut events = Vec::new();
        match self.phase {
            Phase::Calibrating => unreachable!(),
            Phase::Idle | Phase::Suspect => {
                let track = self.track_mut(sample.location);
                if residual > threshold {
                    if track.count == 0 {
                        track.run_start = Some(sample.time);
                    }
                    track.count += 1;
                } else if residual < low {
                    track.clear_run();
                }
                let confirmed = track.count >= self.cfg.confirm_count;
                if confirmed {
                    let onset = [&self.inlet, &self.outlet]
                        .iter()
                        .filter_map(|t| t.run_start)
                        .fold(f64::INFINITY, f64::min);
                    self.onset = Some(onset);
                    self.phase = Phase::FixationWait;
                    events.push(self.event(
                        EventKind::Alarm,
                        EventPayload::Alarm(AlarmPayload {
                            trigger: sample,
                            onset_estimate: onset,
                            onset_note: ONSET_NOTE.to_string(),
                        }),
                    ));
                    self.check_fixation(sample, &mut events);
                } else {
                    let suspect = self.inlet.count > 0 || self.outlet.count > 0;
                    if self.phase == Phase::Suspect && !suspect {
                        events.push(self.event(
                            EventKind::Reset,
                            EventPayload::Reset(ResetPayload {
                                reason: "residual fell below hysteresis before confirmation".into(),
                            }),
                        ));
                    }
                    self.phase = if suspect { Phase::Suspect } else { Phase::Idle };
                }
            }
            Phase::FixationWait => self.check_fixation(sample, &mut events),
            Phase::Monitoring => {
                if self.inlet.last_residual < low && self.outlet.last_residual < low {
                    self.rearm();
                    events.push(self.event(
                        EventKind::Reset,
                        EventPayload::Reset(ResetPayload {
                            reason: "pressures returned to baseline".into(),
                        }),
                    ));
                }
            }
        }
        Ok(events)
    }

    /// Flushes a pending localization when the stream ends.
    pub fn finish(&mut self) -> Vec<DetectionEvent> {
        if self.phase != Phase::FixationWait {
            return Vec::new();
        }
        self.phase = Phase::Monitoring;
        self.insufficient("stream ended before both sensors reported at the fixation time")
    }

    fn calibrate(&mut self, sample: SensorSample) {
        let Baseline::Calibrate { samples } = self.cfg.baseline else {
            unreachable!("calibrating only with a calibration baseline")
        };
        let track = self.track_mut(sample.location);
        if track.calibration_count < samples {
            track.calibration_sum += sample.pressure;
            track.calibration_count += 1;
            track.baseline = track.calibration_sum / track.calibration_count as f64;
        }
        if self.inlet.calibration_count >= samples && self.outlet.calibration_count >= samples {
            self.phase = Phase::Idle;
        }
    }

    fn rearm(&mut self) {
        for t in [&mut self.inlet, &mut self.outlet] {
            t.clear_run();
            t.fixation_sample = None;
        }
        self.onset = None;
        self.phase = Phase::Idle;
    }

    fn check_fixation(&mut self, sample: SensorSample, events: &mut Vec<DetectionEvent>) {
        let onset = self.onset.expect("onset set when confirmed");
        let target = onset + self.t1;
        let track = self.track_mut(sample.location);
        if sample.time >= target && track.fixation_sample.is_none() {
            track.fixation_sample = Some(sample);
        }
        match (self.inlet.fixation_sample, self.outlet.fixation_sample) {
            (Some(a), Some(b)) => {
                self.phase = Phase::Monitoring;
                let time = a.time.max(b.time);
                events.extend(self.localize(a, b, time));
            }
            (Some(ready), None) | (None, Some(ready)) => {
                let waited = sample.time - ready.time;
                if sample.location == ready.location
                    && waited > self.cfg.counterpart_timeout * self.cfg.cadence
                {
                    self.phase = Phase::Monitoring;
                    events.extend(self.insufficient(&format!(
                        "no {} sample at or after t = {target} s",
                        match ready.location {
                            Location::Inlet => Location::Outlet,
                            Location::Outlet => Location::Inlet,
                        }
                    )));
                }
            }
            (None, None) => {}
        }
    }

    fn insufficient(&self, detail: &str) -> Vec<DetectionEvent> {
        let onset = self.onset.unwrap_or(f64::NAN);
        self.cfg
            .methods
            .iter()
            .map(|&method| {
                self.event(
                    EventKind::Localization,
                    EventPayload::Localization(LocalizationPayload {
                        status: LocalizationStatus::InsufficientData,
                        method,
                        onset_estimate: onset,
                        elapsed_s: None,
                        inlet_drop_pa: None,
                        outlet_drop_pa: None,
                        report: None,
                        detail: Some(detail.to_string()),
                    }),
                )
            })
            .collect()
    }

    fn localize(&self, inlet: SensorSample, outlet: SensorSample, time: f64) -> Vec<DetectionEvent> {
        let onset = self.onset.expect("onset set when confirmed");
        let (a, b) = if inlet.location == Location::Inlet {
            (inlet, outlet)
        } else {
            (outlet, inlet)
        };
        let inlet_drop = self.inlet.baseline - a.pressure;
        let outlet_drop = self.outlet.baseline - b.pressure;
        let elapsed = time - onset;
        self.cfg
            .methods
            .iter()
            .map(|&method| {
                let outcome = DropPair::new(inlet_drop, outlet_drop, elapsed)
                    .and_then(|pair| estimate(&self.spec, &pair, method, &self.ctrl));
                let (status, report, detail) = match outcome {
                    Ok(r) => (LocalizationStatus::Ok, Some(r), None),
                    Err(e) => {
                        let status = match e.root() {
                            Error::UndefinedRatio { .. } => LocalizationStatus::UndefinedRatio,
                            Error::InconsistentObservation { .. } => {
                                LocalizationStatus::InconsistentObservation
                            }
                            _ => LocalizationStatus::Failed,
                        };
                        (status, None, Some(e.to_string()))
                    }
                };
                DetectionEvent {
                    kind: EventKind::Localization,
                    time,
                    payload: EventPayload::Localization(LocalizationPayload {
                        status,
                        method,
                        onset_estimate: onset,
                        elapsed_s: Some(elapsed),
                        inlet_drop_pa: Some(inlet_drop),
                        outlet_drop_pa: Some(outlet_drop),
                        report,
                        detail,
                    }),
                }
            })
            .collect()
    }
}

/// Feeds a whole stream through a fresh detector, flushing at the end.
pub fn run_detection(
    spec: &PipelineSpec,
    cfg: &DetectionConfig,
    ctrl: &SeriesControl,
    samples: &[SensorSample],
) -> Result<Vec<DetectionEvent>> {
    let mut detector = Detector::new(spec, cfg, ctrl)?;
    let mut events = Vec::new();
    for &s in samples {
        events.extend(detector.ingest(s)?);
    }
    events.extend(detector.finish());
    Ok(events)
}
