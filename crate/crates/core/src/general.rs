//! General transient solution for time-varying inlet, outlet and leak fluxes.
//!
//! The field is expanded in the Neumann eigenfunctions cos(nπx/L). Each
//! mode obeys
//!
//! ```text
//! b'_n = −α_n·b_n + (2c²/L)·[G0(t) − (−1)ⁿ·Gs(t) − cos(nπℓ/L)·Gut(t)]
//! ```
//!
//! and the mean moves with the cumulative flux imbalance. The modal
//! convolutions are split into a quasi-static part f_n(t)/α_n, whose sum over
//! n has a closed form, and a remainder that decays like 1/n⁴. Both the
//! cumulative integral and the remainder are integrated exactly for the
//! piecewise-linear interpolant of the schedule, so stiff high modes carry
//! no quadrature error.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PipelineSpec;
use crate::series::{cosine_over_n2, exp_tail_bound, terms_for, SeriesControl};

/// Uniformly sampled boundary and leak fluxes starting at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSchedule {
    time_step: f64,
    inlet: Vec<f64>,
    outlet: Vec<f64>,
    leak: Vec<f64>,
}

impl FlowSchedule {
    pub fn new(time_step: f64, inlet: Vec<f64>, outlet: Vec<f64>, leak: Vec<f64>) -> Result<Self> {
        if !(time_step.is_finite() && time_step > 0.0) {
            return Err(Error::config("schedule time step must be positive"));
        }
        if inlet.is_empty() || inlet.len() != outlet.len() || inlet.len() != leak.len() {
            return Err(Error::config(
                "inlet, outlet and leak series must be non-empty and share one time grid",
            ));
        }
        if [&inlet, &outlet, &leak]
            .iter()
            .any(|s| s.iter().any(|&g| !(g.is_finite() && g >= 0.0)))
        {
            return Err(Error::config("schedule fluxes must be finite and >= 0"));
        }
        Ok(Self {
            time_step,
            inlet,
            outlet,
            leak,
        })
    }

    /// Samples `f(t) -> (G0, Gs, Gut)` on `0, dt, …` up to and including `duration`.
    pub fn from_fn<F>(time_step: f64, duration: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64, f64),
    {
        if !(time_step > 0.0 && duration >= 0.0) {
            return Err(Error::config("need time_step > 0 and duration >= 0"));
        }
        let steps = (duration / time_step - 1e-9).ceil().max(0.0) as usize;
        let (mut g0, mut gs, mut gut) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..=steps {
            let (a, b, c) = f(k as f64 * time_step);
            g0.push(a);
            gs.push(b);
            gut.push(c);
        }
        Self::new(time_step, g0, gs, gut)
    }

    pub fn constant(time_step: f64, duration: f64, inlet: f64, outlet: f64, leak: f64) -> Result<Self> {
        Self::from_fn(time_step, duration, |_| (inlet, outlet, leak))
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn len(&self) -> usize {
        self.inlet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inlet.is_empty()
    }

    /// Last covered time.
    pub fn end(&self) -> f64 {
        (self.len() - 1) as f64 * self.time_step
    }

    pub fn inlet(&self) -> &[f64] {
        &self.inlet
    }

    pub fn outlet(&self) -> &[f64] {
        &self.outlet
    }

    pub fn leak(&self) -> &[f64] {
        &self.leak
    }

    fn covers(&self, t: f64) -> bool {
        t >= 0.0 && t <= self.end() + 1e-9 * self.time_step.max(1.0)
    }

    /// Segment index and offset inside it; the last sample maps to the end of the last segment.
    fn locate(&self, t: f64) -> (usize, f64) {
        if self.len() == 1 {
            return (0, 0.0);
        }
        let last = self.len() - 2;
        let k = ((t / self.time_step).floor() as usize).min(last);
        (k, (t - k as f64 * self.time_step).clamp(0.0, self.time_step))
    }
}

/// Piecewise-linear view of one flux series.
struct Series<'a> {
    values: &'a [f64],
    dt: f64,
}

impl Series<'_> {
    fn slope(&self, k: usize) -> f64 {
        if k + 1 < self.values.len() {
            (self.values[k + 1] - self.values[k]) / self.dt
        } else {
            0.0
        }
    }

    fn value(&self, k: usize, offset: f64) -> f64 {
        self.values[k] + self.slope(k) * offset
    }

    /// ∫₀ᵗ g dτ (trapezoidal, exact for the interpolant).
    fn integral(&self, k: usize, offset: f64) -> f64 {
        let whole: f64 = self.values[..=k]
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * self.dt)
            .sum();
        whole + 0.5 * (self.values[k] + self.value(k, offset)) * offset
    }

    fn max_abs_slope(&self, k: usize) -> f64 {
        (0..=k).map(|j| self.slope(j).abs()).fold(0.0, f64::max)
    }

    /// Σ_k s_k·(e^{−α(t−t_{k+1})} − e^{−α(t−t_k)}) up to segment `k` with the partial last segment.
    fn slope_memory(&self, alpha: f64, k: usize, offset: f64) -> f64 {
        let decay = (-alpha * self.dt).exp();
        let mut u = 0.0;
        for j in 0..k {
            u = u * decay + self.slope(j) * (1.0 - decay);
        }
        let partial = (-alpha * offset).exp();
        u * partial + self.slope(k) * (1.0 - partial)
    }
}

/// Pressure with evaluation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralEvaluation {
    pub pressure: f64,
    pub terms: usize,
    /// Set when the schedule step exceeds a quarter of the fastest retained
    /// mode's time constant 1/α_N.
    pub coarse_quadrature: bool,
}

/// Solver bound to one pipeline, schedule and leak position.
#[derive(Debug, Clone)]
pub struct GeneralSolver<'a> {
    spec: &'a PipelineSpec,
    schedule: &'a FlowSchedule,
    position: f64,
    ctrl: SeriesControl,
}

/// Modal state at one instant; evaluates P(x) for any x.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    spec: &'a PipelineSpec,
    position: f64,
    initial: bool,
    mean: f64,
    inlet: f64,
    outlet: f64,
    leak: f64,
    coefficients: Vec<f64>,
    coarse_quadrature: bool,
}

impl<'a> GeneralSolver<'a> {
    pub fn new(
        spec: &'a PipelineSpec,
        schedule: &'a FlowSchedule,
        position: f64,
        ctrl: &SeriesControl,
    ) -> Result<Self> {
        ctrl.validate()?;
        if !(position > 0.0 && position < spec.length()) {
            return Err(Error::domain(format!(
                "leak position {position} m must lie strictly inside the pipeline"
            )));
        }
        Ok(Self {
            spec,
            schedule,
            position,
            ctrl: *ctrl,
        })
    }

    pub fn snapshot(&self, t: f64) -> Result<Snapshot<'a>> {
        if !t.is_finite() || !self.schedule.covers(t) {
            return Err(Error::domain(format!(
                "t = {t} s outside schedule range [0, {}]",
                self.schedule.end()
            )));
        }
        let spec = self.spec;
        let sched = self.schedule;
        let dt = sched.time_step;
        let series = |v: &'a [f64]| Series { values: v, dt };
        let g0 = series(&sched.inlet);
        let gs = series(&sched.outlet);
        let gut = series(&sched.leak);
        let (k, offset) = sched.locate(t);

        let l = spec.length();
        let two_a = spec.two_a();
        let c2 = spec.sound_speed() * spec.sound_speed();
        let base_g = spec.base_flux();

        if t == 0.0 {
            return Ok(Snapshot {
                spec,
                position: self.position,
                initial: true,
                mean: 0.0,
                inlet: 0.0,
                outlet: 0.0,
                leak: 0.0,
                coefficients: Vec::new(),
                coarse_quadrature: false,
            });
        }

        let imbalance = g0.integral(k, offset) - gs.integral(k, offset) - gut.integral(k, offset);
        let mean = spec.inlet_pressure() - 0.5 * two_a * base_g * l + c2 / l * imbalance;

        let alpha3 = spec.alpha3();
        let s = alpha3 * t;
        let modal_gain = 2.0 * c2 / l;
        let ic_amplitude = 4.0 * two_a * base_g * l / (PI * PI);
        let start_sum = sched.inlet[0] + sched.outlet[0] + sched.leak[0];
        let slope_sum = g0.max_abs_slope(k) + gs.max_abs_slope(k) + gut.max_abs_slope(k);
        let quasi_gain = modal_gain / alpha3;
        let bound = |n: usize| {
            let nf = n as f64;
            exp_tail_bound(ic_amplitude, s, n)
                + exp_tail_bound(quasi_gain * start_sum, s, n)
                + quasi_gain * slope_sum / (alpha3 * 3.0 * nf * nf * nf)
        };
        let terms = terms_for(&self.ctrl, bound)?;

        let kl = PI * self.position / l;
        let coefficients = (1..=terms)
            .map(|n| {
                let nf = n as f64;
                let alpha = nf * nf * alpha3;
                let fade = (-alpha * t).exp();
                let remainder = |g: &Series, first: f64| {
                    (first * fade + g.slope_memory(alpha, k, offset) / alpha) / alpha
                };
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let ic = if n % 2 == 1 {
                    ic_amplitude / (nf * nf) * fade
                } else {
                    0.0
                };
                ic - modal_gain
                    * (remainder(&g0, sched.inlet[0])
                        - sign * remainder(&gs, sched.outlet[0])
                        - (nf * kl).cos() * remainder(&gut, sched.leak[0]))
            })
            .collect();

        let fastest = (terms as f64).powi(2) * alpha3;
        Ok(Snapshot {
            spec,
            position: self.position,
            initial: false,
            mean,
            inlet: g0.value(k, offset),
            outlet: gs.value(k, offset),
            leak: gut.value(k, offset),
            coefficients,
            coarse_quadrature: sched.len() > 1 && dt > 0.25 / fastest,
        })
    }
}

impl Snapshot<'_> {
    pub fn terms(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coarse_quadrature(&self) -> bool {
        self.coarse_quadrature
    }

    pub fn pressure(&self, x: f64) -> Result<f64> {
        self.spec.check_x(x)?;
        if self.initial {
            return self.spec.steady_profile(x);
        }
        let l = self.spec.length();
        let kx = PI * x / l;
        let kl = PI * self.position / l;
        let gain = 2.0 * self.spec.two_a() * l / (PI * PI);
        let quasi = gain
            * (self.inlet * cosine_over_n2(kx)
                - self.outlet * cosine_over_n2(kx + PI)
                - self.leak * 0.5 * (cosine_over_n2(kx - kl) + cosine_over_n2(kx + kl)));
        let modal: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * kx).cos())
            .sum();
        Ok(self.mean + quasi + modal)
    }
}

/// P(x, t) for a time-varying flux schedule and a leak at `position`.
pub fn pressure_general(
    spec: &PipelineSpec,
    schedule: &FlowSchedule,
    position: f64,
    x: f64,
    t: f64,
    ctrl: &SeriesControl,
) -> Result<GeneralEvaluation> {
    spec.check_x(x)?;
    let snap = GeneralSolver::new(spec, schedule, position, ctrl)?.snapshot(t)?;
    Ok(GeneralEvaluation {
        pressure: snap.pressure(x)?,
        terms: snap.terms(),
        coarse_quadrature: snap.coarse_quadrature(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LeakScenario;
    use crate::series::pressure_closed_form;

    #[test]
    fn zero_leak_keeps_steady_profile() {
        let spec = PipelineSpec::paper_ref();
        let sched = FlowSchedule::constant(10.0, 900.0, 30.0, 30.0, 0.0).unwrap();
        let ctrl = SeriesControl::default();
        for &t in &[0.0, 5.0, 100.0, 455.0, 900.0] {
            for &x in &[0.0, 1.25e4, 5.0e4, 1.0e5] {
                let p = pressure_general(&spec, &sched, 5.0e3, x, t, &ctrl).unwrap().pressure;
                let s = spec.steady_profile(x).unwrap();
                assert!((p - s).abs() < 2.0 * ctrl.tail_tolerance, "x={x} t={t}: {p} vs {s}");
            }
        }
    }

    #[test]
    fn constant_schedule_reduces_to_closed_form() {
        let spec = PipelineSpec::paper_ref();
        let sched = FlowSchedule::constant(10.0, 900.0, 30.0, 30.0, 30.0).unwrap();
        let ctrl = SeriesControl::default();
        let leak = LeakScenario::new(&spec, 2.0e4, 30.0, 0.0).unwrap();
        for &t in &[50.0, 300.0, 640.0, 900.0] {
            for &x in &[0.0, 2.0e4, 6.1e4, 1.0e5] {
                let g = pressure_general(&spec, &sched, 2.0e4, x, t, &ctrl).unwrap().pressure;
                let c = pressure_closed_form(&spec, &leak, x, t, &ctrl).unwrap();
                assert!((g - c).abs() < 1.0, "x={x} t={t}: {g} vs {c}");
            }
        }
    }

    #[test]
    fn out_of_range_time_rejected() {
        let spec = PipelineSpec::paper_ref();
        let sched = FlowSchedule::constant(1.0, 10.0, 30.0, 30.0, 0.0).unwrap();
        let ctrl = SeriesControl::default();
        assert!(matches!(
            pressure_general(&spec, &sched, 5.0e3, 0.0, 11.0, &ctrl),
            Err(Error::Domain(_))
        ));
        assert!(pressure_general(&spec, &sched, 0.0, 0.0, 1.0, &ctrl).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(FlowSchedule::new(1.0, vec![1.0], vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(FlowSchedule::new(0.0, vec![1.0], vec![1.0], vec![0.0]).is_err());
        assert!(FlowSchedule::new(1.0, vec![-1.0], vec![1.0], vec![0.0]).is_err());
        let s = FlowSchedule::constant(2.0, 9.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.end(), 10.0);
    }

    #[test]
    fn interpolant_integral_and_memory() {
        let values = [0.0, 2.0, 2.0, 5.0];
        let g = Series {
            values: &values,
            dt: 1.0,
        };
        assert!((g.integral(2, 0.5) - (1.0 + 2.0 + 0.5 * (2.0 + 3.5) * 0.5)).abs() < 1e-12);
        // brute-force quadrature of ∫ g'(τ) e^{−α(t−τ)} dτ
        let alpha = 0.7;
        let t = 2.5;
        let n = 200_000;
        let h = t / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let tau = (i as f64 + 0.5) * h;
                let k = tau.floor() as usize;
                g.slope(k) * (-alpha * (t - tau)).exp() * h
            })
            .sum();
        let exact = g.slope_memory(alpha, 2, 0.5) / alpha;
        assert!((brute - exact).abs() < 1e-6, "{brute} vs {exact}");
    }
}
