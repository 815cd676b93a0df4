//! Independent oracle checks: parameter fits against the printed tables,
//! the finite-difference solver and brute-force reference values.

mod common;

use std::f64::consts::PI;

use common::{fixture, Matrix};
use gasleak::fd::{compare_fields, solve_fd, FdConfig, FdSolver};
use gasleak::field::{tabulate_field, FieldSource, PressureField};
use gasleak::general::FlowSchedule;
use gasleak::localize::weight_coefficient;
use gasleak::model::{LeakScenario, PipelineSpec};
use gasleak::series::{leak_drop, SeriesControl};
use gasleak::tables::{TABLE_TIMES, TABLE_X_KM};

fn table_xs() -> Vec<f64> {
    TABLE_X_KM.iter().map(|k| k * 1e3).collect()
}

#[test]
fn leak_flux_fit_to_inlet_column() {
    // the drop is linear in the leak flux, so the least-squares fit is a ratio of sums
    let spec = PipelineSpec::paper_ref();
    let ctrl = SeriesControl::default();
    let unit = LeakScenario::new(&spec, 5.0e3, 1.0, 0.0).unwrap();
    let printed = Matrix::parse(&fixture("table1.csv"));
    let (mut num, mut den) = (0.0, 0.0);
    for &t in &TABLE_TIMES {
        let observed = (55.0 - printed.get(0.0, t)) * 1e4;
        let f = leak_drop(&spec, &unit, 0.0, t, &ctrl).unwrap();
        num += observed * f;
        den += f * f;
    }
    let g = num / den;
    println!("fitted leak flux {g:.3} Pa*s/m");
    assert!((g - 30.0).abs() < 0.15, "{g}");
    assert!((g - spec.base_flux()).abs() < 0.15);
}

#[test]
fn printed_weight_denominator_does_not_fit() {
    // the dimensionally inconsistent /L form stays at about 2/3
    let spec = PipelineSpec::paper_ref();
    let printed = [0.27, 0.36, 0.45, 0.53, 0.59, 0.66];
    let alpha = spec.alpha3();
    for (k, &p) in printed.iter().enumerate() {
        let t = 100.0 * (k + 1) as f64;
        let s = alpha * t;
        let over_l = 2.0 / 3.0 + (2.0 * s - 4.0 * (-s).exp() - (-2.0 * s).exp()) / spec.length();
        assert!((over_l - p).abs() > 0.005, "t={t}: {over_l}");
        assert!((weight_coefficient(&spec, t).unwrap() - p).abs() < 0.01);
    }
}

#[test]
fn closed_form_matches_brute_force_series() {
    let spec = PipelineSpec::paper_ref();
    let leak = LeakScenario::new(&spec, 3.3e4, 30.0, 0.0).unwrap();
    let (l, two_a, c2) = (spec.length(), spec.two_a(), spec.sound_speed().powi(2));
    for (x, t) in [(0.0, 50.0), (2.0e4, 300.0), (3.3e4, 1.0), (1.0e5, 900.0)] {
        let ell = leak.position;
        let s = spec.alpha3() * t;
        let series: f64 = (1..=200_000)
            .map(|n| {
                let n = n as f64;
                (n * PI * x / l).cos() * (n * PI * ell / l).cos() * (-n * n * s).exp() / (n * n)
            })
            .sum();
        let brute = c2 * 30.0 / l * t + two_a * 30.0 * ((x * x + ell * ell) / (2.0 * l) + l / 3.0 - x.max(ell))
            - 2.0 * two_a * l * 30.0 / (PI * PI) * series;
        let ours = leak_drop(&spec, &leak, x, t, &SeriesControl::default()).unwrap();
        assert!((ours - brute).abs() < 0.2, "x={x} t={t}: {ours} vs {brute}");
    }
}

#[test]
fn fd_refinement_converges_for_all_table_positions() {
    let spec = PipelineSpec::paper_ref();
    let ctrl = SeriesControl::default();
    let xs = table_xs();
    for position in [5.0e3, 5.0e4, 9.5e4] {
        let leak = LeakScenario::new(&spec, position, 30.0, 0.0).unwrap();
        let exact = tabulate_field(&spec, &FieldSource::Leak(leak), &xs, &TABLE_TIMES, &ctrl).unwrap();
        let mut last = f64::INFINITY;
        for (dx, dt) in [(500.0, 2.0), (250.0, 1.0), (125.0, 0.5)] {
            let fd = FdConfig { dx, dt, theta: 0.5 };
            let field = solve_fd(&spec, &leak, &fd, 900.0, &xs, &TABLE_TIMES).unwrap();
            let dev = compare_fields(&exact, &field).unwrap().max_abs_diff_pa;
            assert!(dev < last, "position {position}: dx={dx} dev {dev} not below {last}");
            last = dev;
        }
        assert!(last < 0.005 * spec.inlet_pressure());
    }
}

#[test]
fn ramped_leak_general_solution_matches_fd() {
    let spec = PipelineSpec::paper_ref();
    let ctrl = SeriesControl::default();
    let position = 2.5e4;
    let ramp = |t: f64| 30.0 * (t / 100.0).min(1.0);
    let schedule = FlowSchedule::from_fn(1.0, 900.0, |t| (30.0, 30.0, ramp(t))).unwrap();
    let xs = table_xs();
    let general = tabulate_field(
        &spec,
        &FieldSource::Schedule { schedule, position },
        &xs,
        &TABLE_TIMES,
        &ctrl,
    )
    .unwrap();

    let fd = FdConfig::default();
    let leak = LeakScenario::new(&spec, position, 30.0, 0.0).unwrap();
    let mut solver = FdSolver::new(&spec, &leak, &fd).unwrap();
    let mut pressures = Vec::new();
    for &t in &TABLE_TIMES {
        while solver.time() < t - 1e-9 {
            // the ramp is linear inside a step, so its midpoint value is the step mean
            let mid = solver.time() + 0.5 * fd.dt;
            solver.step_scaled(ramp(mid) / 30.0);
        }
        pressures.extend(xs.iter().map(|&x| solver.interpolate(x)));
    }
    let oracle = PressureField::new(xs.clone(), TABLE_TIMES.to_vec(), pressures).unwrap();
    let dev = compare_fields(&general, &oracle).unwrap().max_abs_diff_pa;
    println!("ramped leak: general vs FD max deviation {dev:.3} Pa");
    assert!(dev <= 0.005 * spec.inlet_pressure());
}

#[test]
fn general_solution_with_unbalanced_boundary_flux() {
    // extra outflow Gs − G0 with no leak depletes the mean at c²(Gs − G0)/L,
    // the same as a leak of that size placed anywhere
    let spec = PipelineSpec::paper_ref();
    let ctrl = SeriesControl::default();
    let schedule = FlowSchedule::constant(1.0, 600.0, 30.0, 40.0, 0.0).unwrap();
    let xs: Vec<f64> = (0..=200).map(|k| 500.0 * k as f64).collect();
    let field = tabulate_field(
        &spec,
        &FieldSource::Schedule {
            schedule,
            position: 5.0e4,
        },
        &xs,
        &[0.0, 600.0],
        &ctrl,
    )
    .unwrap();
    let mean = |it: usize| {
        let n = xs.len() - 1;
        let inner: f64 = (1..n).map(|ix| field.get(ix, it)).sum();
        (inner + 0.5 * (field.get(0, it) + field.get(n, it))) / n as f64
    };
    let expected = spec.sound_speed().powi(2) * 10.0 / spec.length() * 600.0;
    assert!(((mean(0) - mean(1)) - expected).abs() < 1.0, "{} vs {expected}", mean(0) - mean(1));
    // the outlet gradient follows the new outlet flux
    let slope = (field.get(200, 1) - field.get(199, 1)) / 500.0;
    assert!((slope + spec.two_a() * 40.0).abs() < 0.05 * spec.two_a() * 40.0, "{slope}");
}
