//! Closed-form transient field for a constant point leak with fixed
//! boundary fluxes.
//!
//! The pressure drop relative to the steady profile is
//!
//! ```text
//! ΔP(x,τ) = (c²G/L)·τ
//!         + 2a·G·[(x² + ℓ²)/(2L) + L/3 − max(x, ℓ)]
//!         − (4aLG/π²)·Σ cos(nπx/L)·cos(nπℓ/L)·exp(−n²α₃τ)/n²
//! ```
//!
//! The linear term is the line-pack depletion and the bracket is the
//! quasi-steady Neumann Green's function; together with the series the
//! drop vanishes at τ = 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LeakScenario, PipelineSpec};

/// Truncation controls for the infinite cosine series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesControl {
    pub max_terms: usize,
    /// Pa.
    pub tail_tolerance: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 10_000,
            tail_tolerance: 0.1,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::config("max_terms must be at least 1"));
        }
        if !(self.tail_tolerance.is_finite() && self.tail_tolerance > 0.0) {
            return Err(Error::config("tail_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Upper bound on Σ_{n>N} amplitude·exp(−n²·s)/n², using Σ_{n>N} 1/n² < 1/N.
pub(crate) fn exp_tail_bound(amplitude: f64, s: f64, n: usize) -> f64 {
    let next = (n + 1) as f64;
    amplitude * (-next * next * s).exp() / n as f64
}

/// Smallest N whose tail bound is within tolerance, or an accuracy error
/// carrying the best bound reachable inside the budget.
pub(crate) fn terms_for<F>(ctrl: &SeriesControl, bound: F) -> Result<usize>
where
    F: Fn(usize) -> f64,
{
    ctrl.validate()?;
    let tol = ctrl.tail_tolerance;
    let best = bound(ctrl.max_terms);
    if best > tol {
        return Err(Error::Accuracy {
            achieved: best,
            requested: tol,
            terms: ctrl.max_terms,
        });
    }
    let (mut lo, mut hi) = (1usize, ctrl.max_terms);
    if bound(lo) <= tol {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Evaluated drop together with the number of series terms used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropEvaluation {
    pub drop: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

pub fn leak_drop_detailed(
    spec: &PipelineSpec,
    leak: &LeakScenario,
    x: f64,
    t: f64,
    ctrl: &SeriesControl,
) -> Result<DropEvaluation> {
    spec.check_x(x)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let tau = t - leak.onset;
    let g = leak.flux;
    if tau <= 0.0 || g == 0.0 {
        return Ok(DropEvaluation {
            drop: 0.0,
            terms: 0,
            tail_bound: 0.0,
        });
    }

    let l = spec.length();
    let two_a = spec.two_a();
    let c2 = spec.sound_speed() * spec.sound_speed();
    let ell = leak.position;
    // 4aLG/π² with 4a = 2·(2a)
    let amplitude = 2.0 * two_a * l * g / (PI * PI);
    let s = spec.alpha3() * tau;
    let terms = terms_for(ctrl, |n| exp_tail_bound(amplitude, s, n))?;

    let kx = PI * x / l;
    let kl = PI * ell / l;
    let series: f64 = (1..=terms)
        .map(|n| {
            let nf = n as f64;
            (nf * kx).cos() * (nf * kl).cos() * (-nf * nf * s).exp() / (nf * nf)
        })
        .sum();

    let linepack = c2 * g / l * tau;
    let quasi_steady = two_a * g * ((x * x + ell * ell) / (2.0 * l) + l / 3.0 - x.max(ell));
    Ok(DropEvaluation {
        drop: linepack + quasi_steady - amplitude * series,
        terms,
        tail_bound: exp_tail_bound(amplitude, s, terms),
    })
}

/// Pressure drop below the steady profile caused by the leak.
pub fn leak_drop(
    spec: &PipelineSpec,
    leak: &LeakScenario,
    x: f64,
    t: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    leak_drop_detailed(spec, leak, x, t, ctrl).map(|e| e.drop)
}

/// Absolute pressure: steady profile minus leak drop.
pub fn pressure_closed_form(
    spec: &PipelineSpec,
    leak: &LeakScenario,
    x: f64,
    t: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    let drop = leak_drop(spec, leak, x, t, ctrl)?;
    Ok(spec.steady_profile(x)? - drop)
}

/// Σ_{n≥1} cos(nθ)/n², in closed form π²/6 − π|θ|/2 + θ²/4 after folding θ into [−π, π].
pub(crate) fn cosine_over_n2(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > PI {
        t = two_pi - t;
    }
    PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0
}
