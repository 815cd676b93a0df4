//! Fixture loading shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

/// A pressure matrix in 10⁴ Pa: rows of (x in km, values at t = 100..900 s).
#[derive(Debug, Clone)]
pub struct Matrix {
    pub times: Vec<f64>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl Matrix {
    pub fn parse(csv: &str) -> Self {
        let mut lines = csv.lines();
        let header = lines.next().expect("header");
        let times = header
            .split(',')
            .skip(1)
            .map(|h| h.trim_start_matches('t').parse().expect("time column"))
            .collect();
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut cells = l.split(',').map(|c| c.parse::<f64>().expect("number"));
                let x = cells.next().expect("x");
                (x, cells.collect())
            })
            .collect();
        Self { times, rows }
    }

    pub fn get(&self, x_km: f64, t: f64) -> f64 {
        let j = self.times.iter().position(|&v| v == t).expect("time");
        let row = self.rows.iter().find(|r| r.0 == x_km).expect("x");
        row.1[j]
    }
}

/// One printed row of the localization comparison table.
#[derive(Debug, Clone, Copy)]
pub struct PrintedRow {
    pub truth_m: f64,
    pub inlet: f64,
    pub outlet: f64,
    pub t_s: f64,
    pub weight: f64,
    pub ratio: Option<f64>,
    pub estimate_m: Option<f64>,
}

pub fn printed_localization() -> Vec<PrintedRow> {
    let opt = |s: &str| if s == "-" { None } else { Some(s.parse::<f64>().expect("number")) };
    fixture("table4.csv")
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            PrintedRow {
                truth_m: c[0].parse().unwrap(),
                inlet: c[1].parse().unwrap(),
                outlet: c[2].parse().unwrap(),
                t_s: c[3].parse().unwrap(),
                weight: c[4].parse().unwrap(),
                ratio: opt(c[5]),
                estimate_m: opt(c[6]),
            }
        })
        .collect()
}
