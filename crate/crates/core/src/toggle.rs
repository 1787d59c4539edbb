//! Periodically forced genetic toggle switch with delay.
//!
//! State `(u, v, t_hat)`, where `t_hat' = 1` carries the slow forcing
//! `A sin(omega_s t)` so that the system fits the `sum_k e^{ik omega t} f_k`
//! form with modes `k in {-1, 0, 1}`:
//!
//! ```text
//! u' = alpha / (1 + v^beta) - u(t - tau) + A sin(omega_s t) + B sin(omega t)
//! v' = alpha / (1 + u^beta) - v(t - tau)
//! ```

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;


use crate::averaging::{AveragedDDE, AveragedField};
use crate::linalg::CMatrix;
use crate::model::{validate_problem, AffineHistory, ModeSet, OscillatoryDDE, ValidatedDDE};
use crate::error::ModelError;
use crate::scalar::{Scalar, C64};

/// Model constants, history and frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToggleParams {
    pub alpha: f64,
    pub beta: f64,
    /// Slow forcing amplitude `A`.
    pub a_slow: f64,
    /// Slow forcing frequency `omega_s`.
    pub omega_slow: f64,
    /// Fast forcing amplitude `B`.
    pub b_fast: f64,
    /// Fast forcing frequency `omega`.
    pub omega: f64,
    pub tau: f64,
    /// Constant history `(u, v)` on `[-tau, 0]`.
    pub u0: f64,
    pub v0: f64,
    /// Admit `1 <= beta < 2`, where `u^(beta - 2)` is singular at `u = 0`.
    pub allow_small_beta: bool,
}

impl ToggleParams {
    /// Setting of the convergence study, at fast frequency `omega`.
    pub fn table1(omega: f64) -> Self {
        Self {
            alpha: 2.5,
            beta: 2.0,
            a_slow: 0.1,
            omega_slow: 0.1,
            b_fast: 2.0,
            omega,
            tau: 0.5,
            u0: 0.5,
            v0: 2.0,
            allow_small_beta: false,
        }
    }

    /// Setting of the long-time trajectory comparison.
    pub fn fig2() -> Self {
        Self {
            a_slow: 0.2,
            omega_slow: 0.2,
            u0: 2.0,
            v0: 0.5,
            ..Self::table1(4.0 * PI)
        }
    }

    /// `"table1"` (at `omega = 16 pi`) or `"fig2"`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "table1" => Some(Self::table1(16.0 * PI)),
            "fig2" => Some(Self::fig2()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("A", self.a_slow),
            ("omega_s", self.omega_slow),
            ("B", self.b_fast),
            ("omega", self.omega),
            ("tau", self.tau),
            ("u0", self.u0),
            ("v0", self.v0),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.alpha <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must be positive",
            });
        }
        if self.beta < 1.0 {
            return Err(ModelError::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "must be at least 1",
            });
        }
        if self.beta < 2.0 && !self.allow_small_beta {
            return Err(ModelError::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "beta < 2 makes the averaged field singular at u = 0; set allow_small_beta",
            });
        }
        if self.u0 < 0.0 || self.v0 < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "history",
                value: self.u0.min(self.v0),
                reason: "concentrations must be non-negative",
            });
        }
        Ok(())
    }

    pub fn modes(&self) -> ToggleModes {
        ToggleModes {
            alpha: self.alpha,
            beta: self.beta,
            a_slow: self.a_slow,
            omega_slow: self.omega_slow,
            b_fast: self.b_fast,
        }
    }

    /// `(u0, v0, t)` on `[-tau, 0]`.
    pub fn history(&self) -> AffineHistory {
        AffineHistory::new(vec![self.u0, self.v0, 0.0], vec![0.0, 0.0, 1.0])
    }
}

/// Fourier modes of the toggle right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToggleModes {
    pub alpha: f64,
    pub beta: f64,
    pub a_slow: f64,
    pub omega_slow: f64,
    pub b_fast: f64,
}

impl ToggleModes {
    /// `alpha beta s^(beta-1) / (1 + s^beta)^2`, the magnitude of the
    /// derivative of `alpha / (1 + s^beta)`.
    fn hill_slope(&self, s: C64) -> C64 {
        let p = Scalar::powf(s, self.beta);
        let q = C64::new(1.0, 0.0) + p;
        Scalar::powf(s, self.beta - 1.0) * (self.alpha * self.beta) / (q * q)
    }
}

impl ModeSet for ToggleModes {
    fn dim(&self) -> usize {
        3
    }

    fn indices(&self) -> &[i32] {
        &[-1, 0, 1]
    }

    fn eval<S: Scalar>(&self, k: i32, x: &[S], y: &[S], out: &mut [S]) {
        match k {
            0 => {
                let one = S::one();
                let hv = (one + x[1].powf(self.beta)).recip().scale(C64::new(self.alpha, 0.0));
                let hu = (one + x[0].powf(self.beta)).recip().scale(C64::new(self.alpha, 0.0));
                out[0] = hv - y[0] + x[2].scale(C64::new(self.omega_slow, 0.0)).sin().scale(C64::new(self.a_slow, 0.0));
                out[1] = hu - y[1];
                out[2] = one;
            }
            1 | -1 => {
                // B sin(omega t) = (-iB/2) e^{i omega t} + (iB/2) e^{-i omega t}
                out[0] = S::from_c64(C64::new(0.0, -0.5 * f64::from(k) * self.b_fast));
                out[1] = S::zero();
                out[2] = S::zero();
            }
            _ => out.iter_mut().for_each(|o| *o = S::zero()),
        }
    }

    fn real_forcing(&self, x: &[f64], y: &[f64], theta: f64, out: &mut [f64]) {
        out[0] = self.alpha / (1.0 + x[1].powf(self.beta)) - y[0]
            + self.a_slow * (self.omega_slow * x[2]).sin()
            + self.b_fast * theta.sin();
        out[1] = self.alpha / (1.0 + x[0].powf(self.beta)) - y[1];
        out[2] = 1.0;
    }

    fn jac_x(&self, k: i32, x: &[C64], _y: &[C64]) -> CMatrix {
        let mut j = CMatrix::zeros(3, 3);
        if k == 0 {
            j[(0, 1)] = -self.hill_slope(x[1]);
            j[(0, 2)] = (x[2] * self.omega_slow).cos() * (self.a_slow * self.omega_slow);
            j[(1, 0)] = -self.hill_slope(x[0]);
        }
        j
    }

    fn jac_y(&self, k: i32, _x: &[C64], _y: &[C64]) -> CMatrix {
        let mut j = CMatrix::zeros(3, 3);
        if k == 0 {
            j[(0, 0)] = C64::new(-1.0, 0.0);
            j[(1, 1)] = C64::new(-1.0, 0.0);
        }
        j
    }
}

/// The forced toggle as a validated oscillatory delay problem.
pub fn toggle_oscillatory(
    p: &ToggleParams,
) -> Result<ValidatedDDE<ToggleModes, AffineHistory>, ModelError> {
    p.validate()?;
    validate_problem(OscillatoryDDE {
        modes: p.modes(),
        history: p.history(),
        tau: p.tau,
        omega: p.omega,
        slow_time_index: Some(2),
    })
}

/// Closed-form averaged toggle right-hand side of order 2 or 3.
///
/// With `U, V` the averaged concentrations, `h(s) = alpha / (1 + s^beta)`:
///
/// ```text
/// U' = h(V) - U(t - tau) + A sin(omega_s t_hat) - [t >= tau] B / omega
/// V' = h(U) - V(t - tau) + (B / omega) h'(U)
///      + (B^2 / omega^2) 3 alpha beta U^(beta-2) (U^beta - beta + beta U^beta + 1)
///                        / (4 (1 + U^beta)^3)          (order 3 only)
/// ```
///
/// The third-order field has three regimes; the last two coincide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToggleClosedForm {
    params: ToggleParams,
    order: usize,
}

impl ToggleClosedForm {
    pub fn new(params: ToggleParams, order: usize) -> Self {
        assert!(order == 2 || order == 3, "closed form exists for orders 2 and 3");
        Self { params, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl AveragedField for ToggleClosedForm {
    fn dim(&self) -> usize {
        3
    }

    fn regimes(&self) -> usize {
        self.order
    }

    fn max_lag(&self) -> usize {
        1
    }

    fn eval_regime(&self, regime: usize, _t: f64, x: &[C64], lags: &[&[C64]], out: &mut [C64]) {
        let p = &self.params;
        let (u, v, th) = (x[0], x[1], x[2]);
        let y = lags[0];
        let one = C64::new(1.0, 0.0);
        let r = p.b_fast / p.omega;
        let pu = Scalar::powf(u, p.beta);
        let pv = Scalar::powf(v, p.beta);
        let modes = p.modes();

        out[0] = one / (one + pv) * p.alpha - y[0] + (th * p.omega_slow).sin() * p.a_slow;
        if regime >= 1 {
            out[0] -= r;
        }
        out[1] = one / (one + pu) * p.alpha - y[1] - modes.hill_slope(u) * r;
        if self.order == 3 {
            let q = one + pu;
            out[1] += Scalar::powf(u, p.beta - 2.0)
                * (pu - p.beta + pu * p.beta + one)
                * (3.0 * p.alpha * p.beta * r * r)
                / (q * q * q * 4.0);
        }
        out[2] = one;
    }

    fn eval_regime_real(&self, regime: usize, _t: f64, x: &[f64], lags: &[&[f64]], out: &mut [f64]) {
        let p = &self.params;
        let (u, v, th) = (x[0], x[1], x[2]);
        let y = lags[0];
        let r = p.b_fast / p.omega;
        let pu = u.powf(p.beta);
        let pv = v.powf(p.beta);
        let q = 1.0 + pu;

        out[0] = p.alpha / (1.0 + pv) - y[0] + p.a_slow * (p.omega_slow * th).sin();
        if regime >= 1 {
            out[0] -= r;
        }
        out[1] = p.alpha / q - y[1] - r * p.alpha * p.beta * u.powf(p.beta - 1.0) / (q * q);
        if self.order == 3 {
            out[1] += r * r * 3.0 * p.alpha * p.beta * u.powf(p.beta - 2.0)
                * (pu - p.beta + p.beta * pu + 1.0)
                / (4.0 * q * q * q);
        }
        out[2] = 1.0;
    }
}

pub fn toggle_averaged(p: &ToggleParams, order: usize) -> Result<AveragedDDE<ToggleClosedForm, AffineHistory>, ModelError> {
    if order != 2 && order != 3 {
        return Err(ModelError::InvalidParameter {
            name: "order",
            value: order as f64,
            reason: "closed form exists for orders 2 and 3",
        });
    }
    let v = toggle_oscillatory(p)?;
    Ok(AveragedDDE::new(
        ToggleClosedForm::new(*p, order),
        p.history(),
        v.tau(),
        v.omega(),
    ))
}

pub fn toggle_averaged2(p: &ToggleParams) -> Result<AveragedDDE<ToggleClosedForm, AffineHistory>, ModelError> {
    toggle_averaged(p, 2)
}

pub fn toggle_averaged3(p: &ToggleParams) -> Result<AveragedDDE<ToggleClosedForm, AffineHistory>, ModelError> {
    toggle_averaged(p, 3)
}

/// Steady states `(u*, v*)` of the unforced (`A = B = 0`) toggle, found by
/// bisection on `u = h(h(u))` over `[0, alpha]`.
pub fn unforced_equilibria(alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    let h = |s: f64| alpha / (1.0 + s.powf(beta));
    let g = |u: f64| h(h(u)) - u;
    let n = 4000;
    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut ga = g(a);
    for i in 1..=n {
        let b = alpha * i as f64 / n as f64;
        let gb = g(b);
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-16 * hi.max(1.0) {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        ga = gb;
    }
    roots.into_iter().map(|u| (u, h(u))).collect()
}
