//! Problem descriptions: Fourier mode sets, histories, and the forced delay
//! system together with its stroboscopic-compatibility check.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::error::ModelError;
use crate::integrators::DelaySystem;
use crate::linalg::{self, CMatrix};
use crate::scalar::{Scalar, C64};

/// Relative tolerance used when testing that `tau * omega / (2 pi)` is an integer.
pub const INTEGER_RTOL: f64 = 1e-12;

/// Finitely many complex Fourier modes `f_k(x, y)` of a forcing
/// `f(x, y, theta) = sum_k exp(i k theta) f_k(x, y)`, where `y` is the delayed state.
pub trait ModeSet: Send + Sync {
    fn dim(&self) -> usize;

    /// Represented mode indices. Must contain 0.
    fn indices(&self) -> &[i32];

    /// Evaluates `f_k(x, y)` into `out`. Unrepresented `k` must yield zeros.
    fn eval<S: Scalar>(&self, k: i32, x: &[S], y: &[S], out: &mut [S]);

    /// Jacobian of `f_k` with respect to the current state `x`.
    fn jac_x(&self, k: i32, x: &[C64], y: &[C64]) -> CMatrix;

    /// Jacobian of `f_k` with respect to the delayed state `y`.
    fn jac_y(&self, k: i32, x: &[C64], y: &[C64]) -> CMatrix;

    /// Whether `f_{-k} = conj(f_k)` on real arguments, i.e. the forcing is real.
    fn conjugate_symmetric(&self) -> bool {
        true
    }

    fn contains(&self, k: i32) -> bool {
        self.indices().contains(&k)
    }

    /// Nonzero represented indices.
    fn oscillatory_indices(&self) -> Vec<i32> {
        self.indices().iter().copied().filter(|&k| k != 0).collect()
    }

    fn eval_vec(&self, k: i32, x: &[C64], y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.eval(k, x, y, &mut out);
        out
    }

    /// Real part of `sum_k exp(i k theta) f_k(x, y)` at real arguments.
    /// Override with real arithmetic when the forcing is known in closed form.
    fn real_forcing(&self, x: &[f64], y: &[f64], theta: f64, out: &mut [f64]) {
        let f = reconstruct_forcing(self, &linalg::to_complex(x), &linalg::to_complex(y), theta);
        for (o, z) in out.iter_mut().zip(f) {
            *o = z.re;
        }
    }
}

impl<M: ModeSet> ModeSet for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn indices(&self) -> &[i32] {
        (**self).indices()
    }
    fn eval<S: Scalar>(&self, k: i32, x: &[S], y: &[S], out: &mut [S]) {
        (**self).eval(k, x, y, out)
    }
    fn jac_x(&self, k: i32, x: &[C64], y: &[C64]) -> CMatrix {
        (**self).jac_x(k, x, y)
    }
    fn jac_y(&self, k: i32, x: &[C64], y: &[C64]) -> CMatrix {
        (**self).jac_y(k, x, y)
    }
    fn conjugate_symmetric(&self) -> bool {
        (**self).conjugate_symmetric()
    }
    fn real_forcing(&self, x: &[f64], y: &[f64], theta: f64, out: &mut [f64]) {
        (**self).real_forcing(x, y, theta, out)
    }
}

/// Fourier modes `g_k(xi)` of a non-delay oscillatory system
/// `xi' = sum_k exp(i k omega t) g_k(xi)`.
pub trait OdeModes: Send + Sync {
    fn dim(&self) -> usize;

    fn indices(&self) -> &[i32];

    fn eval<S: Scalar>(&self, k: i32, xi: &[S], out: &mut [S]);

    /// `g_k'(xi) v` from analytic Jacobians, when the mode set can supply it.
    fn jvp(&self, _k: i32, _xi: &[C64], _v: &[C64]) -> Option<Vec<C64>> {
        None
    }

    fn contains(&self, k: i32) -> bool {
        self.indices().contains(&k)
    }

    fn eval_vec(&self, k: i32, xi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.eval(k, xi, &mut out);
        out
    }
}

/// Initial history `phi` on `[-tau, 0]` together with its derivative.
pub trait History: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: f64, out: &mut [f64]);

    /// `phi'(t)`. Generic so that segmented systems can differentiate through it.
    fn derivative<S: Scalar>(&self, t: S, out: &mut [S]);

    /// Points in `(-tau, 0)` where `phi'` is discontinuous.
    fn kinks(&self) -> &[f64] {
        &[]
    }
}

impl<H: History> History for &H {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, t: f64, out: &mut [f64]) {
        (**self).value(t, out)
    }
    fn derivative<S: Scalar>(&self, t: S, out: &mut [S]) {
        (**self).derivative(t, out)
    }
    fn kinks(&self) -> &[f64] {
        (**self).kinks()
    }
}

/// `phi(t) = c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantHistory {
    pub value: Vec<f64>,
}

impl ConstantHistory {
    pub fn new(value: Vec<f64>) -> Self {
        Self { value }
    }
}

impl History for ConstantHistory {
    fn dim(&self) -> usize {
        self.value.len()
    }
    fn value(&self, _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.value);
    }
    fn derivative<S: Scalar>(&self, _t: S, out: &mut [S]) {
        out.iter_mut().for_each(|o| *o = S::zero());
    }
}

/// `phi(t) = offset + slope * t`; covers constant histories with an
/// augmented slow-time variable `t_hat = t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHistory {
    pub offset: Vec<f64>,
    pub slope: Vec<f64>,
}

impl AffineHistory {
    pub fn new(offset: Vec<f64>, slope: Vec<f64>) -> Self {
        assert_eq!(offset.len(), slope.len());
        Self { offset, slope }
    }
}

impl History for AffineHistory {
    fn dim(&self) -> usize {
        self.offset.len()
    }
    fn value(&self, t: f64, out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(&self.offset).zip(&self.slope) {
            *o = a + b * t;
        }
    }
    fn derivative<S: Scalar>(&self, _t: S, out: &mut [S]) {
        for (o, b) in out.iter_mut().zip(&self.slope) {
            *o = S::from_f64(*b);
        }
    }
}

/// `dx/dt = f(x(t), x(t - tau), omega t)`, `x = phi` on `[-tau, 0]`.
#[derive(Clone, Debug)]
pub struct OscillatoryDDE<M, H> {
    pub modes: M,
    pub history: H,
    pub tau: f64,
    pub omega: f64,
    /// Index of an augmented variable with `d t_hat / dt = 1`, if any.
    pub slow_time_index: Option<usize>,
}

/// An [`OscillatoryDDE`] that passed [`validate_problem`].
#[derive(Clone, Debug)]
pub struct ValidatedDDE<M, H> {
    problem: OscillatoryDDE<M, H>,
    periods_per_delay: u32,
}

impl<M: ModeSet, H: History> ValidatedDDE<M, H> {
    pub fn modes(&self) -> &M {
        &self.problem.modes
    }

    pub fn history(&self) -> &H {
        &self.problem.history
    }

    pub fn tau(&self) -> f64 {
        self.problem.tau
    }

    pub fn omega(&self) -> f64 {
        self.problem.omega
    }

    pub fn dim(&self) -> usize {
        self.problem.modes.dim()
    }

    pub fn slow_time_index(&self) -> Option<usize> {
        self.problem.slow_time_index
    }

    /// `m` with `tau = m T`.
    pub fn periods_per_delay(&self) -> u32 {
        self.periods_per_delay
    }

    /// Forcing period `T = tau / m`, which equals `2 pi / omega` up to rounding.
    pub fn period(&self) -> f64 {
        self.problem.tau / f64::from(self.periods_per_delay)
    }

    pub fn problem(&self) -> &OscillatoryDDE<M, H> {
        &self.problem
    }

    pub fn into_inner(self) -> OscillatoryDDE<M, H> {
        self.problem
    }

    /// Full right-hand side `sum_k exp(i k theta) f_k(x, y)` in complex form.
    pub fn forcing(&self, x: &[C64], y: &[C64], theta: f64) -> Vec<C64> {
        reconstruct_forcing(self.modes(), x, y, theta)
    }
}

impl<M: ModeSet, H: History + Clone> DelaySystem for ValidatedDDE<M, H> {
    type Hist = H;

    fn dim(&self) -> usize {
        self.problem.modes.dim()
    }

    fn tau(&self) -> f64 {
        self.problem.tau
    }

    fn history(&self) -> &H {
        &self.problem.history
    }

    fn initial_step(&self) -> f64 {
        self.tau().min(self.period()) / 50.0
    }

    fn eval(&self, t: f64, _interval_start: f64, x: &[f64], lags: &[&[f64]], out: &mut [f64]) {
        self.modes().real_forcing(x, lags[0], self.omega() * t, out);
    }
}

/// Checks the structural invariants and the standing hypothesis
/// `tau * omega / (2 pi) = m`, a positive integer.
pub fn validate_problem<M: ModeSet, H: History>(
    p: OscillatoryDDE<M, H>,
) -> Result<ValidatedDDE<M, H>, ModelError> {
    if !(p.tau.is_finite() && p.tau > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "tau",
            value: p.tau,
            reason: "delay must be positive and finite",
        });
    }
    if !(p.omega.is_finite() && p.omega > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "omega",
            value: p.omega,
            reason: "frequency must be positive and finite",
        });
    }
    if p.modes.indices().is_empty() || !p.modes.contains(0) {
        return Err(ModelError::EmptyModeSet);
    }
    let d = p.modes.dim();
    if d == 0 {
        return Err(ModelError::EmptyModeSet);
    }
    if p.history.dim() != d {
        return Err(ModelError::DimensionMismatch {
            what: "history",
            expected: d,
            found: p.history.dim(),
        });
    }
    if let Some(i) = p.slow_time_index {
        if i >= d {
            return Err(ModelError::DimensionMismatch {
                what: "slow time index",
                expected: d,
                found: i,
            });
        }
    }
    let m = stroboscopic_multiple(p.tau, p.omega)?;
    Ok(ValidatedDDE {
        problem: p,
        periods_per_delay: m,
    })
}

/// Returns `m = tau * omega / (2 pi)` if it is a positive integer within
/// [`INTEGER_RTOL`].
pub fn stroboscopic_multiple(tau: f64, omega: f64) -> Result<u32, ModelError> {
    let ratio = tau * omega / (2.0 * PI);
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > INTEGER_RTOL * ratio || m > f64::from(u32::MAX) {
        return Err(ModelError::NonStroboscopic { ratio });
    }
    Ok(m as u32)
}

/// Stroboscopic times `t_j = j T` in `[0, t_end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StroboscopicGrid {
    pub period: f64,
    pub times: Vec<f64>,
}

pub fn stroboscopic_grid<M: ModeSet, H: History>(
    p: &ValidatedDDE<M, H>,
    t_end: f64,
) -> Result<StroboscopicGrid, ModelError> {
    grid_for_period(p.period(), t_end)
}

pub fn grid_for_period(period: f64, t_end: f64) -> Result<StroboscopicGrid, ModelError> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "end time must be positive",
        });
    }
    let n = (t_end / period * (1.0 + 1e-12)).floor() as usize;
    let times = (0..=n).map(|j| j as f64 * period).collect();
    Ok(StroboscopicGrid { period, times })
}

/// `sum_k exp(i k theta) f_k(x, y)` over the represented modes.
pub fn reconstruct_forcing<M: ModeSet + ?Sized>(modes: &M, x: &[C64], y: &[C64], theta: f64) -> Vec<C64> {
    let d = modes.dim();
    let mut acc = vec![C64::new(0.0, 0.0); d];
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for &k in modes.indices() {
        modes.eval(k, x, y, &mut buf);
        let phase = C64::from_polar(1.0, f64::from(k) * theta);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += phase * b;
        }
    }
    acc
}

/// Worst relative deviation `|f_{-k} - conj(f_k)| / max(|f_k|, 1)` at the given real state.
pub fn conjugate_symmetry_defect<M: ModeSet>(modes: &M, x: &[f64], y: &[f64]) -> f64 {
    let xc = linalg::to_complex(x);
    let yc = linalg::to_complex(y);
    let mut worst = 0.0_f64;
    for &k in modes.indices() {
        let fk = modes.eval_vec(k, &xc, &yc);
        let fmk = modes.eval_vec(-k, &xc, &yc);
        let conj: Vec<C64> = fk.iter().map(|z| z.conj()).collect();
        let defect = linalg::dist(&fmk, &conj) / linalg::norm(&fk).max(1.0);
        worst = worst.max(defect);
    }
    worst
}

/// Central-difference Jacobians of `f_k` with steps `1e-6 (1 + |x_j|)`.
pub fn finite_difference_jacobians<M: ModeSet>(
    modes: &M,
    k: i32,
    x: &[f64],
    y: &[f64],
) -> (CMatrix, CMatrix) {
    let d = modes.dim();
    let column = |wrt_x: bool, j: usize| -> Vec<C64> {
        let base = if wrt_x { x[j] } else { y[j] };
        let h = 1e-6 * (1.0 + base.abs());
        let mut xp = linalg::to_complex(x);
        let mut yp = linalg::to_complex(y);
        let mut xm = xp.clone();
        let mut ym = yp.clone();
        if wrt_x {
            xp[j] += h;
            xm[j] -= h;
        } else {
            yp[j] += h;
            ym[j] -= h;
        }
        let fp = modes.eval_vec(k, &xp, &yp);
        let fm = modes.eval_vec(k, &xm, &ym);
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let mut jx = CMatrix::zeros(d, d);
    let mut jy = CMatrix::zeros(d, d);
    for j in 0..d {
        let cx = column(true, j);
        let cy = column(false, j);
        for i in 0..d {
            jx[(i, j)] = cx[i];
            jy[(i, j)] = cy[i];
        }
    }
    (jx, jy)
}

/// Largest relative mismatch (unit floor on the scale) between the analytic
/// Jacobians of every represented mode and central finite differences.
pub fn jacobian_defect<M: ModeSet>(modes: &M, x: &[f64], y: &[f64]) -> f64 {
    let xc = linalg::to_complex(x);
    let yc = linalg::to_complex(y);
    let mut worst = 0.0_f64;
    for &k in modes.indices() {
        let (fx, fy) = finite_difference_jacobians(modes, k, x, y);
        for (analytic, fd) in [(modes.jac_x(k, &xc, &yc), fx), (modes.jac_y(k, &xc, &yc), fy)] {
            let scale = linalg::norm(fd.as_slice()).max(1.0);
            worst = worst.max(linalg::dist(analytic.as_slice(), fd.as_slice()) / scale);
        }
    }
    worst
}

/// Relative mismatch between `phi'(t)` and a central difference of `phi` at `t`.
pub fn history_derivative_defect<H: History>(history: &H, t: f64, tau: f64) -> f64 {
    let d = history.dim();
    let h = 1e-5 * tau;
    let mut vp = vec![0.0; d];
    let mut vm = vec![0.0; d];
    history.value(t + h, &mut vp);
    history.value(t - h, &mut vm);
    let mut analytic = vec![C64::new(0.0, 0.0); d];
    history.derivative(C64::new(t, 0.0), &mut analytic);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..d {
        let fd = (vp[i] - vm[i]) / (2.0 * h);
        num += (analytic[i].re - fd).powi(2);
        den += fd * fd;
    }
    num.sqrt() / den.sqrt().max(1.0)
}

/// `f_k(x, y) = A_k x + B_k y + c_k + e_k (x ⊙ y)` for a finite set of `k`.
///
/// The elementwise coupling term makes the Jacobians state dependent, which
/// exercises every term of the second-order averaged formulas.
#[derive(Clone, Debug)]
pub struct BilinearModes {
    dim: usize,
    indices: Vec<i32>,
    terms: Vec<BilinearTerm>,
}

#[derive(Clone, Debug)]
pub struct BilinearTerm {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: Vec<C64>,
    pub e: Vec<C64>,
}

impl BilinearTerm {
    pub fn zero(dim: usize) -> Self {
        Self {
            a: CMatrix::zeros(dim, dim),
            b: CMatrix::zeros(dim, dim),
            c: vec![C64::new(0.0, 0.0); dim],
            e: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Entrywise complex conjugate, the partner of `f_k` at index `-k`.
    pub fn conj(&self) -> Self {
        let d = self.c.len();
        Self {
            a: CMatrix::from_fn(d, d, |i, j| self.a[(i, j)].conj()),
            b: CMatrix::from_fn(d, d, |i, j| self.b[(i, j)].conj()),
            c: self.c.iter().map(|z| z.conj()).collect(),
            e: self.e.iter().map(|z| z.conj()).collect(),
        }
    }
}

impl BilinearModes {
    /// Real forcing with modes `{-1, 0, 1}`: `f_0 = mean`, `f_1 = first`,
    /// `f_{-1} = conj(first)`.
    pub fn real_single_harmonic(dim: usize, mean: BilinearTerm, first: BilinearTerm) -> Self {
        let conj = first.conj();
        Self::new(dim, vec![-1, 0, 1], vec![conj, mean, first])
    }

    /// `terms[i]` belongs to `indices[i]`.
    pub fn new(dim: usize, indices: Vec<i32>, terms: Vec<BilinearTerm>) -> Self {
        assert_eq!(indices.len(), terms.len());
        for t in &terms {
            assert!(t.a.rows() == dim && t.a.cols() == dim);
            assert!(t.b.rows() == dim && t.b.cols() == dim);
            assert!(t.c.len() == dim && t.e.len() == dim);
        }
        Self {
            dim,
            indices,
            terms,
        }
    }

    fn term(&self, k: i32) -> Option<&BilinearTerm> {
        self.indices
            .iter()
            .position(|&j| j == k)
            .map(|i| &self.terms[i])
    }
}

impl ModeSet for BilinearModes {
    fn dim(&self) -> usize {
        self.dim
    }

    fn indices(&self) -> &[i32] {
        &self.indices
    }

    fn eval<S: Scalar>(&self, k: i32, x: &[S], y: &[S], out: &mut [S]) {
        let Some(t) = self.term(k) else {
            out.iter_mut().for_each(|o| *o = S::zero());
            return;
        };
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = S::from_c64(t.c[i]) + (x[i] * y[i]).scale(t.e[i]);
            for j in 0..self.dim {
                acc += x[j].scale(t.a[(i, j)]) + y[j].scale(t.b[(i, j)]);
            }
            *o = acc;
        }
    }

    fn jac_x(&self, k: i32, _x: &[C64], y: &[C64]) -> CMatrix {
        match self.term(k) {
            Some(t) => {
                let mut m = t.a.clone();
                for i in 0..self.dim {
                    m[(i, i)] += t.e[i] * y[i];
                }
                m
            }
            None => CMatrix::zeros(self.dim, self.dim),
        }
    }

    fn jac_y(&self, k: i32, x: &[C64], _y: &[C64]) -> CMatrix {
        match self.term(k) {
            Some(t) => {
                let mut m = t.b.clone();
                for i in 0..self.dim {
                    m[(i, i)] += t.e[i] * x[i];
                }
                m
            }
            None => CMatrix::zeros(self.dim, self.dim),
        }
    }
}
