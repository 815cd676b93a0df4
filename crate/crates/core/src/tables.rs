//! Reference tables and plot series for the three standard leak positions
//! on the reference pipeline.
//!
//! Pressure tables are rendered in units of 10⁴ Pa rounded to 0.01, so
//! they can be diffed textually against hand-digitized tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{tabulate_field, FieldSource, PressureField};
use crate::localize::{closed_form_from_ratio, drop_ratio, weight_coefficient, DropPair};
use crate::model::{LeakScenario, PipelineSpec};
use crate::series::SeriesControl;

/// Tabulation points, km.
pub const TABLE_X_KM: [f64; 11] = [0.0, 5.0, 12.5, 25.0, 37.5, 50.0, 62.5, 75.0, 87.5, 95.0, 100.0];
/// Tabulation times, s.
pub const TABLE_TIMES: [f64; 9] = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0, 900.0];
/// Leak positions of tables 1, 2 and 3, m.
pub const TABLE_POSITIONS: [f64; 3] = [5.0e3, 5.0e4, 9.5e4];
/// Leak flux used for all tables, Pa·s/m.
pub const TABLE_LEAK_FLUX: f64 = 30.0;
/// Rounding step of tabulated pressures, Pa.
pub const TABLE_STEP_PA: f64 = 100.0;
/// Times of the localization table, s.
pub const LOCALIZATION_TIMES: [f64; 6] = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0];
/// Times plotted in the profile graphs, s.
pub const GRAPH_TIMES: [f64; 5] = [100.0, 300.0, 500.0, 700.0, 900.0];

pub fn round_to_table(p: f64) -> f64 {
    (p / TABLE_STEP_PA).round() * TABLE_STEP_PA
}

fn position_for(n: usize) -> Result<f64> {
    match n {
        1..=3 => Ok(TABLE_POSITIONS[n - 1]),
        _ => Err(Error::domain(format!("pressure tables are numbered 1 to 3, got {n}"))),
    }
}

/// Pressure table `n` (1 to 3) on the reference grid, rounded to 100 Pa.
pub fn table_field(n: usize) -> Result<PressureField> {
    let position = position_for(n)?;
    let spec = PipelineSpec::paper_ref();
    let leak = LeakScenario::new(&spec, position, TABLE_LEAK_FLUX, 0.0)?;
    let xs: Vec<f64> = TABLE_X_KM.iter().map(|k| k * 1e3).collect();
    let field = tabulate_field(&spec, &FieldSource::Leak(leak), &xs, &TABLE_TIMES, &SeriesControl::default())?;
    Ok(field.map(round_to_table))
}

fn matrix_csv(field: &PressureField, ts: &[f64]) -> String {
    let mut out = String::from("x_km");
    for t in ts {
        let _ = write!(out, ",t{t}");
    }
    out.push('\n');
    for &x in field.x_points() {
        let _ = write!(out, "{}", x / 1e3);
        for &t in ts {
            let p = field.at(x, t).expect("time on grid");
            let _ = write!(out, ",{:.2}", p / 1e4);
        }
        out.push('\n');
    }
    out
}

/// One row of the localization table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationRow {
    pub truth_m: f64,
    pub t_s: f64,
    /// 10⁴ Pa.
    pub inlet: f64,
    /// 10⁴ Pa.
    pub outlet: f64,
    pub weight: f64,
    /// None when the outlet drop is zero.
    pub ratio: Option<f64>,
    pub estimate_m: Option<f64>,
    pub rel_error: Option<f64>,
    pub in_range: Option<bool>,
}

/// Localizes from end pressures given in 10⁴ Pa, as printed in a table.
pub fn localization_row(
    spec: &PipelineSpec,
    truth_m: f64,
    t_s: f64,
    inlet: f64,
    outlet: f64,
) -> Result<LocalizationRow> {
    // drops are formed on the 0.01·10⁴ Pa grid, as a hand calculation would
    let inlet_drop = ((spec.inlet_pressure() / 1e4 - inlet) * 100.0).round() * 100.0;
    let outlet_drop = ((spec.outlet_pressure() / 1e4 - outlet) * 100.0).round() * 100.0;
    let pair = DropPair::new(inlet_drop, outlet_drop, t_s)?;
    let weight = weight_coefficient(spec, t_s)?;
    let mut row = LocalizationRow {
        truth_m,
        t_s,
        inlet,
        outlet,
        weight,
        ratio: None,
        estimate_m: None,
        rel_error: None,
        in_range: None,
    };
    match drop_ratio(&pair) {
        Ok(ratio) => {
            let report = closed_form_from_ratio(spec, ratio, t_s)?.with_truth(truth_m);
            row.ratio = Some(ratio);
            row.estimate_m = Some(report.estimate);
            row.rel_error = report.relative_error;
            row.in_range = Some(report.in_range);
        }
        Err(Error::UndefinedRatio { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Localization table rows: mid-pipe, near-inlet and near-outlet blocks.
pub fn localization_rows() -> Result<Vec<LocalizationRow>> {
    let spec = PipelineSpec::paper_ref();
    let mut rows = Vec::new();
    for n in [2, 1, 3] {
        let field = table_field(n)?;
        let truth = position_for(n)?;
        for &t in &LOCALIZATION_TIMES {
            let inlet = field.at(0.0, t).expect("on grid") / 1e4;
            let outlet = field.at(spec.length(), t).expect("on grid") / 1e4;
            rows.push(localization_row(&spec, truth, t, inlet, outlet)?);
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

/// Table `n`: 1 to 3 are pressure matrices, 4 is the localization comparison.
pub fn reproduce_table(n: usize) -> Result<String> {
    if n == 4 {
        let mut out = String::from("truth_m,t_s,inlet_1e4pa,outlet_1e4pa,weight,ratio,estimate_m,rel_error,in_range\n");
        for r in localization_rows()? {
            let _ = writeln!(
                out,
                "{:.2},{:.2},{:.2},{:.2},{:.2},{},{},{},{}",
                r.truth_m,
                r.t_s,
                r.inlet,
                r.outlet,
                r.weight,
                opt(r.ratio, 4),
                opt(r.estimate_m, 2),
                opt(r.rel_error, 2),
                r.in_range.map_or_else(|| "-".to_string(), |b| b.to_string()),
            );
        }
        return Ok(out);
    }
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("tables are numbered 1 to 4, got {n}")));
    }
    Ok(matrix_csv(&table_field(n)?, &TABLE_TIMES))
}

/// End drops (inlet, outlet) in 10⁴ Pa from a rounded table at time t.
fn end_drops(spec: &PipelineSpec, field: &PressureField, t: f64) -> (f64, f64) {
    let inlet = (spec.inlet_pressure() - field.at(0.0, t).expect("on grid")) / 1e4;
    let outlet = (spec.outlet_pressure() - field.at(spec.length(), t).expect("on grid")) / 1e4;
    (inlet, outlet)
}

/// Plot-ready CSV for graph `which`.
///
/// 1 to 3 give pressure profiles (10⁴ Pa) at t = 100, 300, …, 900 s for the
/// leak of the matching table; 4 gives the inlet minus outlet drop (10⁴ Pa)
/// and 5 the inlet over outlet drop ratio, both versus t for the three leak
/// positions and from the rounded tables. Undefined ratios are left blank.
pub fn graph_series(which: usize) -> Result<String> {
    match which {
        1..=3 => Ok(matrix_csv(&table_field(which)?, &GRAPH_TIMES)),
        4 | 5 => {
            let spec = PipelineSpec::paper_ref();
            let fields = (1..=3).map(table_field).collect::<Result<Vec<_>>>()?;
            let mut out = String::from("t_s");
            for p in TABLE_POSITIONS {
                let _ = write!(out, ",l{p}");
            }
            out.push('\n');
            for &t in &TABLE_TIMES {
                let _ = write!(out, "{t}");
                for f in &fields {
                    let (inlet, outlet) = end_drops(&spec, f, t);
                    let cell = if which == 4 {
                        format!("{:.2}", inlet - outlet)
                    } else if (outlet * 1e4).abs() < crate::localize::RATIO_FLOOR_PA {
                        String::new()
                    } else {
                        format!("{:.6}", inlet / outlet)
                    };
                    let _ = write!(out, ",{cell}");
                }
                out.push('\n');
            }
            Ok(out)
        }
        _ => Err(Error::domain(format!("graphs are numbered 1 to 5, got {which}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(csv: &str, x_km: &str, col: usize) -> String {
        csv.lines()
            .find(|l| l.split(',').next() == Some(x_km))
            .and_then(|l| l.split(',').nth(col).map(str::to_string))
            .unwrap()
    }

    #[test]
    fn spot_cells() {
        let t1 = reproduce_table(1).unwrap();
        assert_eq!(t1.lines().next().unwrap(), "x_km,t100,t200,t300,t400,t500,t600,t700,t800,t900");
        assert_eq!(cell(&t1, "0", 6), "46.38");
        let outlet: f64 = cell(&t1, "100", 9).parse().unwrap();
        assert!((outlet - 24.37).abs() <= 0.03);
        assert_eq!(cell(&reproduce_table(2).unwrap(), "50", 1), "37.95");
        assert_eq!(t1.lines().count(), 12);
    }

    #[test]
    fn localization_mid_row() {
        let rows = localization_rows().unwrap();
        assert_eq!(rows.len(), 18);
        let mid = rows.iter().find(|r| r.truth_m == 5.0e4 && r.t_s == 300.0).unwrap();
        assert_eq!(mid.ratio, Some(1.0));
        assert!((mid.estimate_m.unwrap() - 5.0e4).abs() < 1e-6);
        assert_eq!(format!("{:.2}", mid.rel_error.unwrap()), "0.00");
        let csv = reproduce_table(4).unwrap();
        assert!(csv.lines().any(|l| l.starts_with("50000.00,300.00,") && l.contains(",1.0000,50000.00,0.00,true")));
    }

    #[test]
    fn undefined_ratio_renders_dash() {
        let spec = PipelineSpec::paper_ref();
        let r = localization_row(&spec, 5.0e3, 100.0, 52.23, 25.0).unwrap();
        assert!(r.ratio.is_none() && r.estimate_m.is_none());
    }

    #[test]
    fn graph_shapes() {
        let g4 = graph_series(4).unwrap();
        assert_eq!(g4.lines().next().unwrap(), "t_s,l5000,l50000,l95000");
        assert_eq!(g4.lines().count(), 10);
        let g5 = graph_series(5).unwrap();
        for line in g5.lines().skip(1) {
            assert_eq!(line.split(',').nth(2).unwrap(), "1.000000");
        }
        assert_eq!(graph_series(1).unwrap().lines().next().unwrap(), "x_km,t100,t300,t500,t700,t900");
        assert!(graph_series(6).is_err());
        assert!(reproduce_table(0).is_err());
    }
}
