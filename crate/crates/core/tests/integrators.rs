use std::f64::consts::{E, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strobo_core::error::IntegrationError;
use strobo_core::integrators::*;
use strobo_core::model::{ConstantHistory, History};
use strobo_core::toggle::{toggle_oscillatory, ToggleParams};

fn tol(rel: f64, abs: f64) -> Tolerances {
    Tolerances::new(rel, abs).unwrap()
}

/// `x'(t) = c x(t - tau)`.
struct LinearDelay {
    c: f64,
    history: ConstantHistory,
    tau: f64,
}

impl DelaySystem for LinearDelay {
    type Hist = ConstantHistory;
    fn dim(&self) -> usize {
        1
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn history(&self) -> &ConstantHistory {
        &self.history
    }
    fn eval(&self, _t: f64, _s: f64, _x: &[f64], lags: &[&[f64]], out: &mut [f64]) {
        out[0] = self.c * lags[0][0];
    }
}

fn linear(c: f64) -> LinearDelay {
    LinearDelay {
        c,
        history: ConstantHistory::new(vec![1.0]),
        tau: 1.0,
    }
}

#[test]
fn exponential_growth_reaches_e() {
    let sol = integrate_ode(|_, y, o| o[0] = y[0], 0.0, 1.0, &[1.0], tol(1e-10, 1e-12), &[]).unwrap();
    assert!((sol.last_state()[0] - E).abs() < 1e-9);
}

#[test]
fn exponential_decay_within_tolerance() {
    let sol = integrate_ode(|_, y, o| o[0] = -y[0], 0.0, 1.0, &[1.0], tol(1e-8, 1e-10), &[]).unwrap();
    assert!((sol.last_state()[0] - (-1.0f64).exp()).abs() <= 1e-7);
}

#[test]
fn fast_cosine_integrates_to_zero_at_stroboscopic_end() {
    let w = 16.0 * PI;
    let sol = integrate_ode(|t, _, o| o[0] = (w * t).cos(), 0.0, 2.0, &[0.0], tol(1e-10, 1e-12), &[]).unwrap();
    assert!(sol.last_state()[0].abs() < 1e-8);
}

#[test]
fn invalid_requests_are_rejected() {
    assert!(Tolerances::new(1e-15, 1e-10).is_err());
    assert!(Tolerances::new(1e-8, 1e-17).is_err());
    let r = integrate_ode(|_, y, o| o[0] = y[0], 1.0, 1.0, &[1.0], tol(1e-8, 1e-10), &[]);
    assert!(matches!(r, Err(IntegrationError::InvalidRequest(_))));
}

#[test]
fn singular_rhs_underflows() {
    // y' = 1 / (1 - t) blows up at t = 1
    let r = integrate_ode(|t, _, o| o[0] = 1.0 / (1.0 - t), 0.0, 2.0, &[0.0], tol(1e-8, 1e-10), &[]);
    assert!(matches!(
        r,
        Err(IntegrationError::StepSizeUnderflow { .. }) | Err(IntegrationError::NonFinite { .. })
    ));
}

#[test]
fn step_budget_is_enforced() {
    let mut opts = StepOptions::new(tol(1e-10, 1e-12));
    opts.max_steps = 5;
    let r = integrate_ode_with(|t, _, o| o[0] = (100.0 * t).cos(), 0.0, 10.0, &[0.0], &opts);
    assert!(matches!(r, Err(IntegrationError::MaxStepsExceeded { max: 5, .. })));
}

#[test]
fn sampling_is_exact_at_mesh_points() {
    let sol = integrate_ode(|_, y, o| o[0] = y[0], 0.0, 1.0, &[1.0], tol(1e-8, 1e-10), &[]).unwrap();
    assert_eq!(sol.eval(0.0).unwrap(), vec![1.0]);
    for i in 0..=sol.steps() {
        let t = sol.mesh()[i];
        assert_eq!(sol.eval(t).unwrap().as_slice(), sol.state_at_mesh(i));
    }
    let s = sample(&sol, &[0.5]).unwrap();
    assert!((s[0][0] - 0.5f64.exp()).abs() < 1e-8);
    assert!(matches!(sol.eval(1.5), Err(IntegrationError::OutOfSpan { .. })));
}

#[test]
fn interpolant_is_continuous_at_junctions() {
    let sol = integrate_ode(
        |t, y, o| {
            o[0] = y[1];
            o[1] = -y[0] + (3.0 * t).sin();
        },
        0.0,
        5.0,
        &[1.0, 0.0],
        tol(1e-8, 1e-10),
        &[],
    )
    .unwrap();
    for i in 1..sol.steps() {
        let t = sol.mesh()[i];
        let left = sol.eval(t.next_down()).unwrap();
        let at = sol.state_at_mesh(i);
        for j in 0..2 {
            assert!((left[j] - at[j]).abs() <= 1e-10 * at[j].abs().max(1.0));
        }
    }
}

#[test]
fn dense_output_tracks_tight_reintegration() {
    // Van der Pol, mildly nonlinear
    let rhs = |_: f64, y: &[f64], o: &mut [f64]| {
        o[0] = y[1];
        o[1] = (1.0 - y[0] * y[0]) * y[1] - y[0];
    };
    let t_end = 6.0;
    let loose = tol(1e-6, 1e-8);
    let sol = integrate_ode(rhs, 0.0, t_end, &[2.0, 0.0], loose, &[]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pts: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..t_end)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut opts = StepOptions::new(tol(1e-13, 1e-15));
    opts.breakpoints = pts.clone();
    let tight = integrate_ode_with(rhs, 0.0, t_end, &[2.0, 0.0], &opts).unwrap();
    let norm = (0..=sol.steps())
        .flat_map(|i| sol.state_at_mesh(i).to_vec())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    // the tight run stops at every sample point, so its values there are mesh values
    let worst = pts
        .iter()
        .map(|&t| {
            let a = sol.eval(t).unwrap();
            let b = tight.eval(t).unwrap();
            (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
        })
        .fold(0.0f64, f64::max);
    assert!(worst <= 10.0 * loose.rel * norm, "worst {worst:e}");
}

#[test]
fn fixed_step_convergence_is_fifth_order() {
    let err = |h: f64| {
        let mut opts = StepOptions::new(Tolerances::default());
        opts.fixed_step = Some(h);
        let sol = integrate_ode_with(|_, y, o| o[0] = y[0], 0.0, 1.0, &[1.0], &opts).unwrap();
        (sol.last_state()[0] - E).abs()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((28.0..=36.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn breakpoints_are_hit_and_honored() {
    // y' = [t >= 1], y(0) = 0, so y(2) = 1 and the solution is piecewise linear
    let rhs = |t: f64, _: &[f64], o: &mut [f64]| o[0] = if t < 1.0 { 0.0 } else { 1.0 };
    let with = integrate_ode(rhs, 0.0, 2.0, &[0.0], tol(1e-8, 1e-10), &[1.0]).unwrap();
    assert!(with.mesh().contains(&1.0));
    let err_with = (with.last_state()[0] - 1.0).abs();
    assert!(err_with < 1e-12, "with breakpoint {err_with:e}");

    // without the breakpoint the jump falls inside a step; the controller
    // copes, but at a price in steps and accuracy
    let without = integrate_ode(rhs, 0.0, 2.0, &[0.0], tol(1e-8, 1e-10), &[]).unwrap();
    let err_without = (without.last_state()[0] - 1.0).abs();
    assert!(err_without > err_with);
    assert!(without.stats().rejected_steps > with.stats().rejected_steps);
}

#[test]
fn method_of_steps_negative_feedback() {
    // x = 1 - t on [0, 1], then 1 - t + (t - 1)^2 / 2 on [1, 2]
    let sol = integrate_dde(&linear(-1.0), 2.0, tol(1e-10, 1e-12)).unwrap();
    assert!(sol.eval(1.0).unwrap()[0].abs() < 1e-10);
    assert!((sol.eval(2.0).unwrap()[0] + 0.5).abs() < 1e-10);
    assert!((sol.eval(1.5).unwrap()[0] - (1.0 - 1.5 + 0.125)).abs() < 1e-10);
    assert_eq!(sol.eval(-0.3).unwrap(), vec![1.0]);
    assert!(sol.eval(-1.5).is_err());
}

#[test]
fn method_of_steps_positive_feedback() {
    let sol = integrate_dde(&linear(1.0), 1.0, tol(1e-10, 1e-12)).unwrap();
    assert!((sol.eval(1.0).unwrap()[0] - 2.0).abs() < 1e-10);
}

#[test]
fn delay_multiples_are_mesh_points() {
    let sol = integrate_dde(&linear(-1.0), 3.5, tol(1e-8, 1e-10)).unwrap();
    for b in [1.0, 2.0, 3.0] {
        assert!(sol.dense.mesh().contains(&b));
    }
    assert_eq!(breaking_points(&linear(-1.0), 3.5), vec![1.0, 2.0, 3.0]);
}

#[test]
fn toggle_equilibrium_is_held() {
    let mut p = ToggleParams::table1(16.0 * PI);
    p.a_slow = 0.0;
    p.b_fast = 0.0;
    let v = toggle_oscillatory(&p).unwrap();
    let sol = integrate_dde(&v, 2.0, tol(1e-8, 1e-10)).unwrap();
    for i in 0..=sol.dense.steps() {
        let s = sol.dense.state_at_mesh(i);
        assert!((s[0] - 0.5).abs() <= 1e-8 && (s[1] - 2.0).abs() <= 1e-8);
    }
}

#[test]
fn toggle_solution_is_tolerance_consistent() {
    let v = toggle_oscillatory(&ToggleParams::table1(16.0 * PI)).unwrap();
    let t = tol(1e-8, 1e-10);
    let a = integrate_dde(&v, 2.0, t).unwrap().eval(2.0).unwrap();
    let b = integrate_dde(&v, 2.0, t.tightened(2.0)).unwrap().eval(2.0).unwrap();
    let change = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(change < 10.0 * t.rel, "change {change:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tolerances_respect_floors(rel in 1e-16f64..1e-2, abs in 1e-18f64..1e-2) {
        let r = Tolerances::new(rel, abs);
        prop_assert_eq!(r.is_ok(), rel >= 1e-14 && abs >= 1e-16);
    }

    #[test]
    fn linear_delay_matches_first_interval(c in -2.0f64..2.0, x0 in -3.0f64..3.0, t in 0.0f64..1.0) {
        // on [0, tau] the solution is x0 (1 + c t)
        let sys = LinearDelay { c, history: ConstantHistory::new(vec![x0]), tau: 1.0 };
        let sol = integrate_dde(&sys, 1.0, tol(1e-10, 1e-12)).unwrap();
        let x = sol.eval(t).unwrap()[0];
        prop_assert!((x - x0 * (1.0 + c * t)).abs() < 1e-9 * (1.0 + x0.abs()));
    }

    #[test]
    fn breakpoints_always_on_mesh(bps in proptest::collection::vec(0.01f64..0.99, 0..6)) {
        let sol = integrate_ode(|_, y, o| o[0] = -y[0], 0.0, 1.0, &[1.0], tol(1e-8, 1e-10), &bps).unwrap();
        for b in &bps {
            let hit = sol.mesh().iter().any(|m| (m - b).abs() <= 1e-12);
            prop_assert!(hit);
        }
        let mut last = f64::NEG_INFINITY;
        for &m in sol.mesh() {
            prop_assert!(m > last);
            last = m;
        }
        prop_assert_eq!(sol.t_end(), 1.0);
    }
}

#[test]
fn history_is_used_before_zero() {
    let h = ConstantHistory::new(vec![4.0]);
    let mut out = [0.0];
    h.value(-0.2, &mut out);
    assert_eq!(out[0], 4.0);
}
