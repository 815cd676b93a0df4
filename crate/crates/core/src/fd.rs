//! Finite-difference reference solution of the leak diffusion problem
//!
//! ```text
//! ∂P/∂t = (c²/2a)·∂²P/∂x² − c²·G_ut·δ(x − ℓ),   ∂P/∂x = −2a·G0 at both ends
//! ```
//!
//! on a uniform node grid with a θ-weighted time march. Neumann ends use
//! ghost nodes; the point source is shared by the two nodes bracketing ℓ.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PressureField;
use crate::model::{LeakScenario, PipelineSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdConfig {
    pub dx: f64,
    pub dt: f64,
    pub theta: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            dx: 250.0,
            dt: 1.0,
            theta: 0.5,
        }
    }
}

impl FdConfig {
    /// Number of cells, after checking every invariant against `spec`.
    pub fn validate(&self, spec: &PipelineSpec) -> Result<usize> {
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::config("dx must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt must be positive"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::config("theta must lie in [0, 1]"));
        }
        let cells = spec.length() / self.dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::config(format!(
                "dx = {} does not divide L = {}",
                self.dx,
                spec.length()
            )));
        }
        if rounded < 16.0 {
            return Err(Error::config("grid needs at least 16 cells"));
        }
        if self.theta < 0.5 {
            let limit = self.dx * self.dx / (2.0 * spec.diffusivity() * (1.0 - 2.0 * self.theta));
            if self.dt > limit {
                return Err(Error::config(format!(
                    "dt = {} s exceeds explicit stability limit {limit:.4e} s for theta = {}",
                    self.dt, self.theta
                )));
            }
        }
        Ok(rounded as usize)
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm).
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Time-marching state of one finite-difference run.
#[derive(Debug, Clone)]
pub struct FdSolver {
    spec: PipelineSpec,
    leak: LeakScenario,
    cfg: FdConfig,
    pressure: Vec<f64>,
    time: f64,
    // discrete source per unit time at each node, Pa/s
    source: Vec<f64>,
    // constant ghost-node boundary contribution per unit time
    boundary: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl FdSolver {
    pub fn new(spec: &PipelineSpec, leak: &LeakScenario, cfg: &FdConfig) -> Result<Self> {
        let cells = cfg.validate(spec)?;
        leak.validate(spec)?;
        let dx = cfg.dx;
        let l = spec.length();
        if leak.position < 0.5 * dx || leak.position > l - 0.5 * dx {
            return Err(Error::domain(format!(
                "leak at {} m is within dx/2 of a boundary",
                leak.position
            )));
        }
        let nodes = cells + 1;
        let gradient = spec.steady_gradient();
        let pressure: Vec<f64> = (0..nodes)
            .map(|i| spec.inlet_pressure() - gradient * i as f64 * dx)
            .collect();

        let c2 = spec.sound_speed() * spec.sound_speed();
        let mut source = vec![0.0; nodes];
        let f = leak.position / dx;
        let i = (f.floor() as usize).min(cells - 1);
        let w = f - i as f64;
        let volume = |k: usize| if k == 0 || k == cells { 0.5 * dx } else { dx };
        source[i] -= c2 * leak.flux * (1.0 - w) / volume(i);
        source[i + 1] -= c2 * leak.flux * w / volume(i + 1);

        let d = spec.diffusivity();
        let mut boundary = vec![0.0; nodes];
        boundary[0] = 2.0 * d * gradient / dx;
        boundary[cells] = -2.0 * d * gradient / dx;

        let r = cfg.theta * cfg.dt * d / (dx * dx);
        let mut lower = vec![-r; nodes];
        let diag = vec![1.0 + 2.0 * r; nodes];
        let mut upper = vec![-r; nodes];
        upper[0] = -2.0 * r;
        lower[cells] = -2.0 * r;
        lower[0] = 0.0;
        upper[cells] = 0.0;

        Ok(Self {
            spec: *spec,
            leak: *leak,
            cfg: *cfg,
            pressure,
            time: 0.0,
            source,
            boundary,
            lower,
            diag,
            upper,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn pressures(&self) -> &[f64] {
        &self.pressure
    }

    pub fn dx(&self) -> f64 {
        self.cfg.dx
    }

    /// Homogeneous second difference with mirrored ghost nodes.
    fn laplacian(&self, p: &[f64], out: &mut [f64]) {
        let n = p.len() - 1;
        let k = self.spec.diffusivity() / (self.cfg.dx * self.cfg.dx);
        out[0] = k * 2.0 * (p[1] - p[0]);
        for i in 1..n {
            out[i] = k * (p[i - 1] - 2.0 * p[i] + p[i + 1]);
        }
        out[n] = k * 2.0 * (p[n - 1] - p[n]);
    }

    pub fn step(&mut self) {
        self.step_scaled(1.0);
    }

    /// One step with the leak flux multiplied by `leak_scale` over the step,
    /// for driving time-varying leaks.
    pub fn step_scaled(&mut self, leak_scale: f64) {
        let dt = self.cfg.dt;
        let start = self.time;
        let end = start + dt;
        let active = (end - start.max(self.leak.onset)).clamp(0.0, dt);

        let mut lap = vec![0.0; self.pressure.len()];
        self.laplacian(&self.pressure, &mut lap);
        let explicit = (1.0 - self.cfg.theta) * dt;
        let mut rhs: Vec<f64> = self
            .pressure
            .iter()
            .zip(&lap)
            .zip(self.boundary.iter().zip(&self.source))
            .map(|((p, l), (b, s))| p + explicit * l + dt * b + leak_scale * active * s)
            .collect();
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut rhs);
        self.pressure = rhs;
        self.time = end;
    }

    /// Trapezoidal spatial mean (1/L)∫P dx.
    pub fn discrete_mean(&self) -> f64 {
        let p = &self.pressure;
        let n = p.len() - 1;
        let inner: f64 = p[1..n].iter().sum();
        (inner + 0.5 * (p[0] + p[n])) / n as f64
    }

    /// Linear interpolation of the current nodal solution.
    pub fn interpolate(&self, x: f64) -> f64 {
        interpolate_nodes(&self.pressure, self.cfg.dx, x)
    }
}

fn interpolate_nodes(p: &[f64], dx: f64, x: f64) -> f64 {
    let n = p.len() - 1;
    let f = (x / dx).clamp(0.0, n as f64);
    let i = (f.floor() as usize).min(n - 1);
    let w = f - i as f64;
    p[i] * (1.0 - w) + p[i + 1] * w
}

/// Runs the θ-scheme up to `t_end` and samples the solution onto the given grid.
pub fn solve_fd(
    spec: &PipelineSpec,
    leak: &LeakScenario,
    fd: &FdConfig,
    t_end: f64,
    sample_x: &[f64],
    sample_t: &[f64],
) -> Result<PressureField> {
    let mut solver = FdSolver::new(spec, leak, fd)?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::domain("t_end must be >= 0"));
    }
    if let Some(&x) = sample_x.iter().find(|&&x| !spec.contains(x)) {
        return Err(Error::domain(format!("sample x = {x} m outside the pipeline")));
    }
    if let Some(&t) = sample_t.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
        return Err(Error::domain(format!("sample t = {t} s outside [0, {t_end}]")));
    }
    if sample_t.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("sample_t must be strictly increasing"));
    }

    let mut pressures = Vec::with_capacity(sample_x.len() * sample_t.len());
    let mut previous = solver.pressures().to_vec();
    let mut previous_time = 0.0;
    for &t in sample_t {
        while solver.time() < t - 1e-9 * fd.dt {
            previous.clone_from(&solver.pressure);
            previous_time = solver.time();
            solver.step();
        }
        let span = solver.time() - previous_time;
        let w = if span > 0.0 {
            ((t - previous_time) / span).clamp(0.0, 1.0)
        } else {
            1.0
        };
        for &x in sample_x {
            let a = interpolate_nodes(&previous, fd.dx, x);
            let b = solver.interpolate(x);
            pressures.push(a * (1.0 - w) + b * w);
        }
    }
    PressureField::new(sample_x.to_vec(), sample_t.to_vec(), pressures)
}

/// Elementwise difference metrics between two fields on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub max_abs_diff_pa: f64,
    pub max_rel_diff: f64,
    pub argmax_x_m: f64,
    pub argmax_t_s: f64,
    pub points: usize,
}

impl ComparisonReport {
    /// Flat `key=value` block, one pair per line.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "max_abs_diff_pa={:.6}", self.max_abs_diff_pa);
        let _ = writeln!(s, "max_rel_diff={:.6e}", self.max_rel_diff);
        let _ = writeln!(s, "argmax_x_m={}", self.argmax_x_m);
        let _ = writeln!(s, "argmax_t_s={}", self.argmax_t_s);
        let _ = writeln!(s, "points={}", self.points);
        s
    }
}

pub fn compare_fields(a: &PressureField, b: &PressureField) -> Result<ComparisonReport> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!(
            "{}x{} vs {}x{} or differing coordinates",
            a.x_points().len(),
            a.t_points().len(),
            b.x_points().len(),
            b.t_points().len()
        )));
    }
    let nx = a.x_points().len();
    let mut report = ComparisonReport {
        max_abs_diff_pa: 0.0,
        max_rel_diff: 0.0,
        argmax_x_m: f64::NAN,
        argmax_t_s: f64::NAN,
        points: a.pressures().len(),
    };
    for (k, (pa, pb)) in a.pressures().iter().zip(b.pressures()).enumerate() {
        let diff = (pa - pb).abs();
        let scale = pa.abs().max(pb.abs());
        let rel = if scale > 0.0 { diff / scale } else { 0.0 };
        report.max_rel_diff = report.max_rel_diff.max(rel);
        if diff > report.max_abs_diff_pa || report.argmax_x_m.is_nan() {
            report.max_abs_diff_pa = diff;
            report.argmax_x_m = a.x_points()[k % nx];
            report.argmax_t_s = a.t_points()[k / nx];
        }
    }
    Ok(report)
}
