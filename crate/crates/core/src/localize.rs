//! Leak position estimates from the inlet and outlet pressure drops read at
//! a fixation time t₁ after onset.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LeakScenario, PipelineSpec};
use crate::series::{leak_drop, SeriesControl};

/// Outlet drops closer to zero than this make the ratio undefined, Pa.
pub const RATIO_FLOOR_PA: f64 = 1.0;
/// Negative drops down to this are tolerated as sensor noise, Pa.
pub const NEGATIVE_DROP_ALLOWANCE_PA: f64 = -1.0;
/// Bisection stops once the bracket is narrower than this, m.
pub const INVERSION_TOLERANCE_M: f64 = 1.0;
/// Transit-time multiplier for the default fixation time.
pub const FIXATION_FACTOR: f64 = 1.15;

/// Pressure drops at both ends after `elapsed` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropPair {
    pub inlet_drop: f64,
    pub outlet_drop: f64,
    pub elapsed: f64,
}

impl DropPair {
    pub fn new(inlet_drop: f64, outlet_drop: f64, elapsed: f64) -> Result<Self> {
        if !(elapsed.is_finite() && elapsed > 0.0) {
            return Err(Error::domain(format!("elapsed time must be positive, got {elapsed}")));
        }
        for (name, d) in [("inlet", inlet_drop), ("outlet", outlet_drop)] {
            if !(d.is_finite() && d >= NEGATIVE_DROP_ALLOWANCE_PA) {
                return Err(Error::domain(format!("{name} drop {d} Pa is negative beyond noise")));
            }
        }
        Ok(Self {
            inlet_drop,
            outlet_drop,
            elapsed,
        })
    }

    /// Drops from measured end pressures, relative to the steady profile.
    pub fn from_pressures(spec: &PipelineSpec, inlet: f64, outlet: f64, elapsed: f64) -> Result<Self> {
        Self::new(
            spec.inlet_pressure() - inlet,
            spec.outlet_pressure() - outlet,
            elapsed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "numeric-inversion")]
    NumericInversion,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq10" | "closed-form" => Ok(Method::ClosedForm),
            "invert" | "numeric-inversion" => Ok(Method::NumericInversion),
            other => Err(Error::config(format!("unknown localization method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub method: Method,
    #[serde(rename = "ratio")]
    pub ratio: f64,
    #[serde(rename = "weight")]
    pub weight: f64,
    #[serde(rename = "estimate_m")]
    pub estimate: f64,
    pub in_range: bool,
    #[serde(rename = "truth_m")]
    pub truth: Option<f64>,
    #[serde(rename = "rel_error")]
    pub relative_error: Option<f64>,
}

impl LocalizationReport {
    fn new(spec: &PipelineSpec, method: Method, ratio: f64, weight: f64, estimate: f64) -> Self {
        Self {
            method,
            ratio,
            weight,
            estimate,
            in_range: (0.0..=spec.length()).contains(&estimate),
            truth: None,
            relative_error: None,
        }
    }

    /// Attaches the true position and the relative error |ℓ̂ − ℓ|/ℓ.
    pub fn with_truth(mut self, truth: f64) -> Self {
        self.truth = Some(truth);
        self.relative_error = Some((self.estimate - truth).abs() / truth);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Inlet drop over outlet drop.
pub fn drop_ratio(pair: &DropPair) -> Result<f64> {
    if pair.outlet_drop.abs() < RATIO_FLOOR_PA {
        return Err(Error::UndefinedRatio {
            outlet_drop: pair.outlet_drop,
        });
    }
    Ok(pair.inlet_drop / pair.outlet_drop)
}

/// w(t₁) = 2/3 + (2α₃t₁ − 4e^{−α₃t₁} − e^{−2α₃t₁})/π².
pub fn weight_coefficient(spec: &PipelineSpec, t1: f64) -> Result<f64> {
    if !(t1.is_finite() && t1 > 0.0) {
        return Err(Error::domain(format!("t1 must be positive, got {t1}")));
    }
    let s = spec.alpha3() * t1;
    Ok(2.0 / 3.0 + (2.0 * s - 4.0 * (-s).exp() - (-2.0 * s).exp()) / (PI * PI))
}

/// ℓ̂ = L·(1/2 + w·(1 − r)/(1 + r)) for an already computed ratio.
pub fn closed_form_from_ratio(spec: &PipelineSpec, ratio: f64, t1: f64) -> Result<LocalizationReport> {
    if (1.0 + ratio).abs() < f64::EPSILON {
        return Err(Error::domain("ratio of -1 has no estimate"));
    }
    let w = weight_coefficient(spec, t1)?;
    let l = spec.length();
    let estimate = if ratio == 1.0 {
        0.5 * l
    } else if ratio.is_infinite() {
        l * (0.5 - w)
    } else {
        l * (0.5 + w * (1.0 - ratio) / (1.0 + ratio))
    };
    Ok(LocalizationReport::new(spec, Method::ClosedForm, ratio, w, estimate))
}

pub fn estimate_closed_form(spec: &PipelineSpec, pair: &DropPair) -> Result<LocalizationReport> {
    closed_form_from_ratio(spec, drop_ratio(pair)?, pair.elapsed)
}

/// Series tolerance for forward ratios, Pa per unit leak flux. The far-end
/// drop can be many orders of magnitude below the near-end drop, so the
/// ordinary field tolerance would swamp it.
pub const RATIO_TAIL_TOLERANCE: f64 = 1e-12;

/// Forward drop ratio at t₁ for a leak at `position` (flux cancels).
pub fn forward_ratio(spec: &PipelineSpec, position: f64, t1: f64, ctrl: &SeriesControl) -> Result<f64> {
    let leak = LeakScenario::new(spec, position, 1.0, 0.0)?;
    let tight = SeriesControl {
        tail_tolerance: ctrl.tail_tolerance.min(RATIO_TAIL_TOLERANCE),
        ..*ctrl
    };
    let inlet = leak_drop(spec, &leak, 0.0, t1, &tight)?;
    let outlet = leak_drop(spec, &leak, spec.length(), t1, &tight)?;
    Ok(inlet / outlet)
}

/// Inverts the forward model's ratio for the position by bisection.
pub fn inversion_from_ratio(
    spec: &PipelineSpec,
    ratio: f64,
    t1: f64,
    ctrl: &SeriesControl,
) -> Result<LocalizationReport> {
    let w = weight_coefficient(spec, t1)?;
    let l = spec.length();
    if ratio == 1.0 {
        return Ok(LocalizationReport::new(spec, Method::NumericInversion, ratio, w, 0.5 * l));
    }
    let (mut lo, mut hi) = (INVERSION_TOLERANCE_M, l - INVERSION_TOLERANCE_M);
    // ratio decreases with position; bisect on ln r
    let max = forward_ratio(spec, lo, t1, ctrl)?;
    let min = forward_ratio(spec, hi, t1, ctrl)?;
    let inconsistent = || Error::InconsistentObservation { ratio, min, max, t1 };
    if !(ratio.is_finite() && ratio > 0.0) || ratio > max || ratio < min {
        return Err(inconsistent());
    }
    let target = ratio.ln();
    while hi - lo > INVERSION_TOLERANCE_M {
        let mid = 0.5 * (lo + hi);
        if forward_ratio(spec, mid, t1, ctrl)?.ln() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LocalizationReport::new(
        spec,
        Method::NumericInversion,
        ratio,
        w,
        0.5 * (lo + hi),
    ))
}

pub fn estimate_numeric_inversion(
    spec: &PipelineSpec,
    pair: &DropPair,
    ctrl: &SeriesControl,
) -> Result<LocalizationReport> {
    inversion_from_ratio(spec, drop_ratio(pair)?, pair.elapsed, ctrl)
}

pub fn estimate(
    spec: &PipelineSpec,
    pair: &DropPair,
    method: Method,
    ctrl: &SeriesControl,
) -> Result<LocalizationReport> {
    match method {
        Method::ClosedForm => estimate_closed_form(spec, pair),
        Method::NumericInversion => estimate_numeric_inversion(spec, pair, ctrl),
    }
}

/// Snap window for the ceiling, as a fraction of the cadence.
const FIXATION_SNAP: f64 = 1e-3;

/// 1.15·L/c rounded up to the next multiple of `cadence`.
///
/// Values within 0.1 % of a cadence above a multiple snap down to it, so
/// the 300.03 s of the reference line lands on 300 s at a 100 s cadence.
pub fn fixation_time(spec: &PipelineSpec, cadence: f64) -> Result<f64> {
    fixation_time_with_factor(spec, cadence, FIXATION_FACTOR)
}

pub fn fixation_time_with_factor(spec: &PipelineSpec, cadence: f64, factor: f64) -> Result<f64> {
    if !(cadence.is_finite() && cadence > 0.0) {
        return Err(Error::domain("cadence must be positive"));
    }
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::domain("fixation factor must be positive"));
    }
    let raw = factor * spec.length() / spec.sound_speed();
    let steps = (raw / cadence - FIXATION_SNAP).ceil().max(1.0);
    Ok(steps * cadence)
}

/// One row of [`bias_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub truth_m: f64,
    pub ratio: f64,
    pub closed_form_m: f64,
    pub closed_form_error_m: f64,
    pub inversion_m: f64,
    pub inversion_error_m: f64,
}

/// Forward model plus both localizers for each true position.
pub fn bias_sweep(
    spec: &PipelineSpec,
    t1: f64,
    positions: &[f64],
    ctrl: &SeriesControl,
) -> Result<Vec<SweepRow>> {
    positions
        .iter()
        .map(|&truth| {
            let ratio = forward_ratio(spec, truth, t1, ctrl)?;
            let cf = closed_form_from_ratio(spec, ratio, t1)?;
            let inv = inversion_from_ratio(spec, ratio, t1, ctrl)?;
            Ok(SweepRow {
                truth_m: truth,
                ratio,
                closed_form_m: cf.estimate,
                closed_form_error_m: cf.estimate - truth,
                inversion_m: inv.estimate,
                inversion_error_m: inv.estimate - truth,
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("truth_m,ratio,closed_form_m,closed_form_error_m,inversion_m,inversion_error_m\n");
    for r in rows {
        out.push_str(&format!(
            "{:.2},{:.6e},{:.2},{:.2},{:.2},{:.2}\n",
            r.truth_m, r.ratio, r.closed_form_m, r.closed_form_error_m, r.inversion_m, r.inversion_error_m
        ));
    }
    out
}
