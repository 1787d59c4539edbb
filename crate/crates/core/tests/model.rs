mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use strobo_core::error::ModelError;
use strobo_core::model::*;
use strobo_core::toggle::*;

fn toggle() -> ValidatedDDE<ToggleModes, AffineHistory> {
    toggle_oscillatory(&ToggleParams::table1(16.0 * PI)).unwrap()
}

#[test]
fn toggle_fast_modes_cancel_and_rebuild_sine() {
    let m = ToggleParams::table1(16.0 * PI).modes();
    let x = [c(1.0), c(1.0), c(0.0)];
    let f1 = m.eval_vec(1, &x, &x);
    let fm1 = m.eval_vec(-1, &x, &x);
    for i in 0..3 {
        assert_eq!(f1[i] + fm1[i], c(0.0));
    }
    for th in [0.0, 0.4, 1.9, 4.4] {
        let e = strobo_core::scalar::C64::from_polar(1.0, th);
        let s = e * f1[0] + e.conj() * fm1[0];
        assert!((s.re - 2.0 * f64::sin(th)).abs() < 1e-15 && s.im.abs() < 1e-15);
    }
}

#[test]
fn unforced_toggle_mean_mode_vanishes_at_equilibrium() {
    let mut prm = ToggleParams::table1(16.0 * PI);
    prm.a_slow = 0.0;
    prm.b_fast = 0.0;
    let m = prm.modes();
    let x = [c(0.5), c(2.0), c(0.7)];
    let f0 = m.eval_vec(0, &x, &x);
    assert!(f0[0].norm() < 1e-15 && f0[1].norm() < 1e-15);
}

#[test]
fn toggle_mean_jacobian_by_hand() {
    let m = ToggleParams::table1(16.0 * PI).modes();
    let x = [c(2.0), c(0.5), c(0.0)];
    let j = m.jac_x(0, &x, &x);
    // d/du 2.5 / (1 + u^2) at 2 and d/dv at 0.5
    assert!((j[(1, 0)].re + 0.4).abs() < 1e-14);
    assert!((j[(0, 1)].re + 1.6).abs() < 1e-14);
    assert!((j[(0, 2)].re - 0.01).abs() < 1e-14);
    let (fx, _) = finite_difference_jacobians(&m, 0, &[2.0, 0.5, 0.0], &[2.0, 0.5, 0.0]);
    for r in 0..3 {
        for col in 0..3 {
            assert!((fx[(r, col)] - j[(r, col)]).norm() < 1e-6);
        }
    }
}

#[test]
fn toggle_modes_rebuild_rhs() {
    let p = toggle();
    let prm = ToggleParams::table1(16.0 * PI);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = [rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..4.0)];
        let y = [rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..4.0)];
        let t: f64 = rng.gen_range(0.0..2.0);
        let f = p.forcing(&x.map(c), &y.map(c), prm.omega * t);
        let du = prm.alpha / (1.0 + x[1] * x[1]) - y[0]
            + prm.a_slow * (prm.omega_slow * x[2]).sin()
            + prm.b_fast * (prm.omega * t).sin();
        let dv = prm.alpha / (1.0 + x[0] * x[0]) - y[1];
        assert!((f[0].re - du).abs() < 1e-14 && (f[1].re - dv).abs() < 1e-14);
        let mut real = [0.0; 3];
        prm.modes().real_forcing(&x, &y, prm.omega * t, &mut real);
        assert!((real[0] - du).abs() < 1e-14 && (real[1] - dv).abs() < 1e-14 && real[2] == 1.0);
    }
}

#[test]
fn grid_examples() {
    let g = grid_for_period(2.0 * PI / (16.0 * PI), 2.0).unwrap();
    assert_eq!(g.times.len(), 17);
    assert_eq!(*g.times.last().unwrap(), 2.0);
    assert_eq!(grid_for_period(0.5, 0.5).unwrap().times, vec![0.0, 0.5]);
    assert_eq!(grid_for_period(0.5, 0.49).unwrap().times, vec![0.0]);
    assert!(matches!(
        grid_for_period(0.5, 0.0),
        Err(ModelError::InvalidParameter { name: "t_end", .. })
    ));
}

#[test]
fn fig2_setting_has_one_period_per_delay() {
    let p = toggle_oscillatory(&ToggleParams::fig2()).unwrap();
    assert_eq!(p.periods_per_delay(), 1);
    let mut prm = ToggleParams::fig2();
    prm.omega = 5.0;
    assert!(matches!(
        toggle_oscillatory(&prm),
        Err(ModelError::NonStroboscopic { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validated_delay_is_whole_number_of_periods(tau in 0.01f64..10.0, m in 1u32..2000) {
        let omega = 2.0 * PI * f64::from(m) / tau;
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(m));
        let p = random_problem(&mut rng, 1, tau, m, 0.5);
        prop_assert_eq!(p.periods_per_delay(), m);
        prop_assert!((p.tau() - f64::from(m) * p.period()).abs() <= 1e-12 * tau);
        prop_assert!((p.period() - 2.0 * PI / omega).abs() <= 1e-12 * p.period());
    }

    #[test]
    fn non_integer_ratio_is_rejected(tau in 0.1f64..5.0, frac in 0.01f64..0.99, m in 0u32..50) {
        let omega = 2.0 * PI * (f64::from(m) + frac) / tau;
        prop_assert!(
            matches!(stroboscopic_multiple(tau, omega), Err(ModelError::NonStroboscopic { .. })),
            "ratio accepted"
        );
    }

    #[test]
    fn grid_spacing_is_the_period(k in 1u32..256, t_end in 0.1f64..5.0) {
        let period = 2.0 / f64::from(k);
        let g = grid_for_period(period, t_end).unwrap();
        prop_assert_eq!(g.times[0], 0.0);
        for w in g.times.windows(2) {
            prop_assert!(((w[1] - w[0]) - period).abs() <= 1e-12 * period);
        }
        prop_assert!(*g.times.last().unwrap() <= t_end * (1.0 + 1e-12));
        prop_assert!(*g.times.last().unwrap() + period > t_end);
    }

    #[test]
    fn reconstructed_forcing_is_real(seed in any::<u64>(), th in 0.0f64..6.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 3, 0.5, 1, 1.0);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = p.forcing(&x.iter().map(|&v| c(v)).collect::<Vec<_>>(), &y.iter().map(|&v| c(v)).collect::<Vec<_>>(), th);
        let im: f64 = f.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        prop_assert!(im <= 1e-12 * cnorm(&f).max(1e-300));
        prop_assert!(conjugate_symmetry_defect(p.modes(), &x, &y) <= 1e-15);
    }

    #[test]
    fn analytic_jacobians_match_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 3, 0.5, 1, 1.0);
        let t = toggle();
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            prop_assert!(jacobian_defect(p.modes(), &x, &y) <= 1e-5);
            let xt = [rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..5.0)];
            let yt = [rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..5.0)];
            prop_assert!(jacobian_defect(t.modes(), &xt, &yt) <= 1e-5);
        }
    }

    #[test]
    fn history_derivatives_match_differences(seed in any::<u64>(), s in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_sine_history(&mut rng, 3);
        let tau = 0.8;
        prop_assert!(history_derivative_defect(&h, -s * tau, tau) <= 1e-6);
        let a = ToggleParams::table1(16.0 * PI).history();
        prop_assert!(history_derivative_defect(&a, -s * 0.5, 0.5) <= 1e-6);
    }
}
