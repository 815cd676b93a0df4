//! Tabulated pressure fields P(x, t) and their CSV form.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::general::{FlowSchedule, GeneralSolver};
use crate::model::{LeakScenario, PipelineSpec};
use crate::series::{pressure_closed_form, SeriesControl};

pub const CSV_HEADER: &str = "x_m,t_s,pressure_pa";

/// Pressures on a rectangular space-time grid, stored row-major by t then x.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    x_points: Vec<f64>,
    t_points: Vec<f64>,
    pressures: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl PressureField {
    pub fn new(x_points: Vec<f64>, t_points: Vec<f64>, pressures: Vec<f64>) -> Result<Self> {
        if !strictly_increasing(&x_points) {
            return Err(Error::domain("x_points must be strictly increasing"));
        }
        if !strictly_increasing(&t_points) {
            return Err(Error::domain("t_points must be strictly increasing"));
        }
        if t_points.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::domain("t_points must be >= 0"));
        }
        if pressures.len() != x_points.len() * t_points.len() {
            return Err(Error::domain(format!(
                "expected {} pressures, got {}",
                x_points.len() * t_points.len(),
                pressures.len()
            )));
        }
        Ok(Self {
            x_points,
            t_points,
            pressures,
        })
    }

    pub fn x_points(&self) -> &[f64] {
        &self.x_points
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t_points
    }

    pub fn pressures(&self) -> &[f64] {
        &self.pressures
    }

    pub fn is_empty(&self) -> bool {
        self.pressures.is_empty()
    }

    pub fn get(&self, ix: usize, it: usize) -> f64 {
        self.pressures[it * self.x_points.len() + ix]
    }

    /// Pressure at the grid point with exactly these coordinates.
    pub fn at(&self, x: f64, t: f64) -> Option<f64> {
        let ix = self.x_points.iter().position(|&v| v == x)?;
        let it = self.t_points.iter().position(|&v| v == t)?;
        Some(self.get(ix, it))
    }

    /// Same grid, values mapped elementwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x_points: self.x_points.clone(),
            t_points: self.t_points.clone(),
            pressures: self.pressures.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.x_points == other.x_points && self.t_points == other.t_points
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.pressures.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (it, t) in self.t_points.iter().enumerate() {
            for (ix, x) in self.x_points.iter().enumerate() {
                let _ = writeln!(out, "{x},{t},{:.3}", self.get(ix, it));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `{CSV_HEADER}`, got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(',').map(str::trim);
            let mut next = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("row {}: missing {name}", i + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: bad {name}: {e}", i + 2)))
            };
            let x = next("x_m")?;
            let t = next("t_s")?;
            let p = next("pressure_pa")?;
            rows.push((x, t, p));
        }
        let mut t_points: Vec<f64> = Vec::new();
        let mut x_points: Vec<f64> = Vec::new();
        for &(x, t, _) in &rows {
            if t_points.last() != Some(&t) {
                t_points.push(t);
            }
            if t_points.len() == 1 {
                x_points.push(x);
            }
        }
        let nx = x_points.len();
        for (k, &(x, t, _)) in rows.iter().enumerate() {
            if nx == 0 || x != x_points[k % nx] || t != t_points[k / nx] {
                return Err(Error::Parse(format!(
                    "row {} breaks the t-major rectangular grid",
                    k + 2
                )));
            }
        }
        let pressures = rows.into_iter().map(|(_, _, p)| p).collect();
        Self::new(x_points, t_points, pressures)
    }
}

/// What drives a tabulation.
#[derive(Debug, Clone)]
pub enum FieldSource {
    /// Constant leak evaluated with the closed form.
    Leak(LeakScenario),
    /// Time-varying boundary and leak fluxes evaluated with the general solver.
    Schedule {
        schedule: FlowSchedule,
        position: f64,
    },
}

fn check_grid(spec: &PipelineSpec, xs: &[f64], ts: &[f64]) -> Result<()> {
    if !strictly_increasing(xs) || !strictly_increasing(ts) {
        return Err(Error::domain("grid points must be strictly increasing"));
    }
    if let Some(&x) = xs.iter().find(|&&x| !spec.contains(x)) {
        return Err(Error::domain(format!("x = {x} m outside the pipeline")));
    }
    if ts.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::domain("t must be >= 0"));
    }
    Ok(())
}

/// Fills a pressure field, evaluating grid points in parallel.
pub fn tabulate_field(
    spec: &PipelineSpec,
    source: &FieldSource,
    xs: &[f64],
    ts: &[f64],
    ctrl: &SeriesControl,
) -> Result<PressureField> {
    check_grid(spec, xs, ts)?;
    let at = |x: f64, t: f64| move |e: Error| Error::AtPoint {
        x,
        t,
        source: Box::new(e),
    };
    let pressures: Vec<f64> = match source {
        FieldSource::Leak(leak) => {
            let cells: Vec<(f64, f64)> = ts
                .iter()
                .flat_map(|&t| xs.iter().map(move |&x| (x, t)))
                .collect();
            cells
                .par_iter()
                .map(|&(x, t)| pressure_closed_form(spec, leak, x, t, ctrl).map_err(at(x, t)))
                .collect::<Result<_>>()?
        }
        FieldSource::Schedule { schedule, position } => {
            let solver = GeneralSolver::new(spec, schedule, *position, ctrl)?;
            let rows: Vec<Vec<f64>> = ts
                .par_iter()
                .map(|&t| {
                    let snap = solver.snapshot(t).map_err(at(f64::NAN, t))?;
                    xs.iter()
                        .map(|&x| snap.pressure(x).map_err(at(x, t)))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?;
            rows.into_iter().flatten().collect()
        }
    };
    PressureField::new(xs.to_vec(), ts.to_vec(), pressures)
}
