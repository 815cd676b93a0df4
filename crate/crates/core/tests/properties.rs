//! Property tests for the model invariants.

use proptest::prelude::*;

use gasleak::fd::{FdConfig, FdSolver};
use gasleak::localize::{
    closed_form_from_ratio, drop_ratio, estimate, forward_ratio, inversion_from_ratio, DropPair, Method,
};
use gasleak::model::{LeakScenario, PipelineSpec};
use gasleak::series::{leak_drop, pressure_closed_form, SeriesControl};

const L: f64 = 1.0e5;

fn spec() -> PipelineSpec {
    PipelineSpec::paper_ref()
}

fn ctrl() -> SeriesControl {
    SeriesControl::default()
}

fn leak(position: f64, flux: f64) -> LeakScenario {
    LeakScenario::new(&spec(), position, flux, 0.0).unwrap()
}

/// Trapezoidal spatial mean of the leak drop on a 50 m grid.
fn mean_drop(lk: &LeakScenario, t: f64) -> f64 {
    let n = 2000;
    let h = L / n as f64;
    let f = |i: usize| leak_drop(&spec(), lk, i as f64 * h, t, &ctrl()).unwrap();
    let inner: f64 = (1..n).map(f).sum();
    (inner + 0.5 * (f(0) + f(n))) / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_symmetry(x in 0.0..L, t in 0.5..900.0f64, ell in 1.0e3..9.9e4f64) {
        let a = leak_drop(&spec(), &leak(ell, 30.0), x, t, &ctrl()).unwrap();
        let b = leak_drop(&spec(), &leak(L - ell, 30.0), L - x, t, &ctrl()).unwrap();
        prop_assert!((a - b).abs() <= 2.0 * ctrl().tail_tolerance, "{} vs {}", a, b);
    }

    #[test]
    fn zero_leak_is_steady(x in 0.0..L, t in 0.0..2000.0f64, ell in 1.0e3..9.9e4f64) {
        let p = pressure_closed_form(&spec(), &leak(ell, 0.0), x, t, &ctrl()).unwrap();
        prop_assert_eq!(p, spec().steady_profile(x).unwrap());
    }

    #[test]
    fn onset_recovery(x in 0.0..L, onset in 0.0..500.0f64, ell in 1.0e3..9.9e4f64) {
        let lk = LeakScenario::new(&spec(), ell, 30.0, onset).unwrap();
        let p = pressure_closed_form(&spec(), &lk, x, onset, &ctrl()).unwrap();
        prop_assert!((p - spec().steady_profile(x).unwrap()).abs() <= ctrl().tail_tolerance);
    }

    #[test]
    fn boundary_slopes(t in 10.0..900.0f64, ell in 5.0e3..9.5e4f64) {
        let lk = leak(ell, 30.0);
        let h = 10.0;
        let p = |x: f64| pressure_closed_form(&spec(), &lk, x, t, &ctrl()).unwrap();
        let expected = -spec().two_a() * spec().base_flux();
        let inlet = (p(h) - p(0.0)) / h;
        let outlet = (p(L) - p(L - h)) / h;
        prop_assert!((inlet - expected).abs() <= 0.005 * expected.abs(), "inlet {}", inlet);
        prop_assert!((outlet - expected).abs() <= 0.005 * expected.abs(), "outlet {}", outlet);
    }

    #[test]
    fn drop_grows_monotonically(x in 0.0..L, ell in 1.0e3..9.9e4f64) {
        let lk = leak(ell, 30.0);
        let mut last = 0.0;
        for k in 1..=90 {
            let d = leak_drop(&spec(), &lk, x, 10.0 * k as f64, &ctrl()).unwrap();
            prop_assert!(d >= last - 2.0 * ctrl().tail_tolerance, "t={}: {} < {}", 10 * k, d, last);
            last = d;
        }
    }

    #[test]
    fn ratio_is_scale_invariant(ell in 2.0e3..9.8e4f64, k in 0.01..100.0f64, t1 in 100.0..900.0f64) {
        // tight truncation so that tiny far-end drops are resolved
        let tight = SeriesControl { tail_tolerance: 1e-9, ..ctrl() };
        let pair = |g: f64| {
            let lk = leak(ell, g);
            DropPair::new(
                leak_drop(&spec(), &lk, 0.0, t1, &tight).unwrap(),
                leak_drop(&spec(), &lk, L, t1, &tight).unwrap(),
                t1,
            )
            .unwrap()
        };
        let (a, b) = (pair(30.0), pair(30.0 * k));
        prop_assume!(a.outlet_drop.min(b.outlet_drop) > 10.0);
        let (ra, rb) = (drop_ratio(&a).unwrap(), drop_ratio(&b).unwrap());
        prop_assert!((ra - rb).abs() <= 1e-6 * ra.abs().max(1e-12), "{} vs {}", ra, rb);
        let ea = estimate(&spec(), &a, Method::ClosedForm, &ctrl()).unwrap().estimate;
        let eb = estimate(&spec(), &b, Method::ClosedForm, &ctrl()).unwrap().estimate;
        prop_assert!((ea - eb).abs() < 1e-3);
    }

    #[test]
    fn unit_ratio_gives_midpoint(t1 in 1.0..2000.0f64) {
        prop_assert_eq!(closed_form_from_ratio(&spec(), 1.0, t1).unwrap().estimate, L / 2.0);
        prop_assert_eq!(inversion_from_ratio(&spec(), 1.0, t1, &ctrl()).unwrap().estimate, L / 2.0);
    }

    #[test]
    fn inversion_round_trip(ell in 1.0e3..9.9e4f64, t1 in 100.0..900.0f64) {
        let r = forward_ratio(&spec(), ell, t1, &ctrl()).unwrap();
        let back = inversion_from_ratio(&spec(), r, t1, &ctrl()).unwrap().estimate;
        prop_assert!((back - ell).abs() <= 50.0, "{} -> {}", ell, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn line_pack_depletion(t1 in 1.0..400.0f64, dt in 1.0..500.0f64, ell in 1.0e3..9.9e4f64) {
        let lk = leak(ell, 30.0);
        let t2 = t1 + dt;
        let rate = spec().sound_speed().powi(2) * 30.0 / L;
        let change = mean_drop(&lk, t2) - mean_drop(&lk, t1);
        prop_assert!((change - rate * dt).abs() <= 2.0 * ctrl().tail_tolerance, "{} vs {}", change, rate * dt);
    }

    #[test]
    fn fd_conserves_line_pack_balance(ell in 1.0e3..9.9e4f64, theta in 0.5..1.0f64, steps in 10usize..200) {
        let lk = leak(ell, 30.0);
        let mut solver = FdSolver::new(&spec(), &lk, &FdConfig { dx: 500.0, dt: 2.0, theta }).unwrap();
        let start = solver.discrete_mean();
        for _ in 0..steps {
            solver.step();
        }
        let rate = spec().sound_speed().powi(2) * 30.0 / L;
        let change = start - solver.discrete_mean();
        prop_assert!((change - rate * solver.time()).abs() < 1e-6 * spec().inlet_pressure());
    }
}

#[test]
fn implicit_scheme_is_stable_at_huge_steps() {
    let lk = leak(5.0e4, 30.0);
    let fd = FdConfig {
        dx: 250.0,
        dt: 50.0,
        theta: 1.0,
    };
    let mut solver = FdSolver::new(&spec(), &lk, &fd).unwrap();
    for _ in 0..18 {
        solver.step();
    }
    let floor = spec().outlet_pressure() - 2.0e5;
    assert!(solver
        .pressures()
        .iter()
        .all(|p| p.is_finite() && *p > floor && *p < spec().inlet_pressure()));
    // θ = 1 is monotone: the profile stays decreasing away from the inlet side of the leak
    let p = solver.pressures();
    assert!(p.windows(2).take(150).all(|w| w[0] >= w[1]));
}

#[test]
fn explicit_scheme_rejects_unstable_steps() {
    let fd = FdConfig {
        dx: 250.0,
        dt: 1.0,
        theta: 0.0,
    };
    assert!(FdSolver::new(&spec(), &leak(5.0e4, 30.0), &fd).is_err());
}

#[test]
fn forward_ratio_strictly_decreasing() {
    for k in 1..=9 {
        let t1 = 100.0 * k as f64;
        let ratios: Vec<f64> = (1..=99)
            .map(|i| forward_ratio(&spec(), L * i as f64 / 100.0, t1, &ctrl()).unwrap())
            .collect();
        for (i, w) in ratios.windows(2).enumerate() {
            assert!(w[1] < w[0], "t1={t1}: r({}) = {} !< {}", i + 2, w[1], w[0]);
        }
    }
}

#[test]
fn closed_form_limits() {
    let t1 = 300.0;
    let w = gasleak::localize::weight_coefficient(&spec(), t1).unwrap();
    let hi = closed_form_from_ratio(&spec(), 1e6, t1).unwrap().estimate;
    let lo = closed_form_from_ratio(&spec(), 1e-6, t1).unwrap().estimate;
    assert!((hi - L * (0.5 - w)).abs() < 1.0);
    assert!((lo - L * (0.5 + w)).abs() < 1.0);
}
