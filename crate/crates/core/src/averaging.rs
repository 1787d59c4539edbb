//! Averaged right-hand sides.
//!
//! * word basis functions `g_w` of a non-delay mode set, evaluated with nested
//!   dual numbers (or analytic Jacobians for two-letter words);
//! * the first-order averaged delay system `X' = f_0(X, X(t - tau))`;
//! * the second-order averaged delay system with its two regimes
//!   `F_{2,1}` on `[0, tau)` and `F_{2,2}` on `[tau, inf)`;
//! * the second-order word series
//!   `g_0 + sum_{k != 0} i/(k omega) (g_{k0} - g_{0k} + g_{-k,k})`
//!   on a segmented system, used as an independent algebraic route.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{AveragingError, IntegrationError};
use crate::integrators::{integrate_dde, integrate_dde_with, DdeOptions, DdeSolution, DelaySystem, Tolerances};
use crate::linalg::{self, CMatrix};
use crate::model::{History, ModeSet, OdeModes, ValidatedDDE};
use crate::scalar::{Dual, Scalar, C64};
use crate::segmentation::SegmentedODE;

/// Default bound on word length for [`WordBasisEvaluator`].
pub const DEFAULT_MAX_DEPTH: usize = 3;
/// Longest word the nested dual types can differentiate.
pub const MAX_SUPPORTED_DEPTH: usize = 4;

/// A finite string of mode indices; the empty word is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn new(letters: impl Into<Vec<i32>>) -> Self {
        Self(letters.into())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All words over `alphabet` with at most `max_len` letters, shortest first.
    pub fn all_up_to(alphabet: &[i32], max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * alphabet.len());
            for w in &layer {
                for &a in alphabet {
                    let mut l = w.0.clone();
                    l.push(a);
                    next.push(Word(l));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

/// How Jacobian-vector products inside word basis functions are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DiffMode {
    /// Nested forward-mode duals, any depth up to [`MAX_SUPPORTED_DEPTH`].
    #[default]
    Dual,
    /// The mode set's analytic `jvp`; words of at most two letters.
    Analytic,
}

/// Evaluates `g_{k1...kn}(xi) = g'_{k2...kn}(xi) g_{k1}(xi)`.
#[derive(Clone, Copy, Debug)]
pub struct WordBasisEvaluator<'a, G> {
    modes: &'a G,
    max_depth: usize,
    mode: DiffMode,
}

impl<'a, G: OdeModes> WordBasisEvaluator<'a, G> {
    pub fn new(modes: &'a G) -> Self {
        Self {
            modes,
            max_depth: DEFAULT_MAX_DEPTH,
            mode: DiffMode::Dual,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth.min(MAX_SUPPORTED_DEPTH);
        self
    }

    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn modes(&self) -> &'a G {
        self.modes
    }

    pub fn word_basis(&self, w: &Word, xi: &[C64]) -> Result<Vec<C64>, AveragingError> {
        if let Some(&bad) = w.letters().iter().find(|&&k| !self.modes.contains(k)) {
            return Err(AveragingError::UnrepresentedLetter(bad));
        }
        let max = match self.mode {
            DiffMode::Dual => self.max_depth,
            DiffMode::Analytic => self.max_depth.min(2),
        };
        if w.len() > max {
            return Err(AveragingError::DepthExceeded { len: w.len(), max });
        }
        match (self.mode, w.letters()) {
            (DiffMode::Analytic, &[k1, k2]) => {
                let inner = self.modes.eval_vec(k1, xi);
                match self.modes.jvp(k2, xi, &inner) {
                    Some(v) => Ok(v),
                    None => C64::word(self.modes, w.letters(), xi),
                }
            }
            _ => C64::word(self.modes, w.letters(), xi),
        }
    }
}

/// Word evaluation at one nesting level of dual numbers.
trait Nest: Scalar {
    fn word<G: OdeModes>(g: &G, letters: &[i32], xi: &[Self]) -> Result<Vec<Self>, AveragingError>;
}

fn eval_mode<G: OdeModes, S: Scalar>(g: &G, k: i32, xi: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); g.dim()];
    g.eval(k, xi, &mut out);
    out
}

macro_rules! nest_level {
    ($t:ty => $next:ty) => {
        impl Nest for $t {
            fn word<G: OdeModes>(
                g: &G,
                letters: &[i32],
                xi: &[Self],
            ) -> Result<Vec<Self>, AveragingError> {
                match letters {
                    [] => Ok(xi.to_vec()),
                    [k] => Ok(eval_mode(g, *k, xi)),
                    [k1, rest @ ..] => {
                        let dir = eval_mode(g, *k1, xi);
                        let lifted: Vec<$next> =
                            xi.iter().zip(&dir).map(|(&x, &v)| Dual::new(x, v)).collect();
                        let r = <$next as Nest>::word(g, rest, &lifted)?;
                        Ok(r.into_iter().map(|d| d.eps).collect())
                    }
                }
            }
        }
    };
}

type L1 = Dual<C64>;
type L2 = Dual<L1>;
type L3 = Dual<L2>;

nest_level!(C64 => L1);
nest_level!(L1 => L2);
nest_level!(L2 => L3);

impl Nest for L3 {
    fn word<G: OdeModes>(g: &G, letters: &[i32], xi: &[Self]) -> Result<Vec<Self>, AveragingError> {
        match letters {
            [] => Ok(xi.to_vec()),
            [k] => Ok(eval_mode(g, *k, xi)),
            _ => Err(AveragingError::DepthExceeded {
                len: letters.len() + 3,
                max: MAX_SUPPORTED_DEPTH,
            }),
        }
    }
}

/// Right-hand sides of an averaged delay system, one per time regime.
pub trait AveragedField: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of regimes, which equals the averaging order.
    fn regimes(&self) -> usize;

    /// Lagged states `X(t - tau), ..., X(t - max_lag tau)` consumed.
    fn max_lag(&self) -> usize;

    fn eval_regime(&self, regime: usize, t: f64, x: &[C64], lags: &[&[C64]], out: &mut [C64]);

    /// Real part of [`Self::eval_regime`] at real arguments; override with a
    /// real-arithmetic version when one is available.
    fn eval_regime_real(&self, regime: usize, t: f64, x: &[f64], lags: &[&[f64]], out: &mut [f64]) {
        let xc = linalg::to_complex(x);
        let lc: Vec<Vec<C64>> = lags.iter().map(|l| linalg::to_complex(l)).collect();
        let lr: Vec<&[C64]> = lc.iter().map(|v| v.as_slice()).collect();
        let mut res = vec![C64::new(0.0, 0.0); x.len()];
        self.eval_regime(regime, t, &xc, &lr, &mut res);
        for (o, z) in out.iter_mut().zip(res) {
            *o = z.re;
        }
    }
}

/// Time interval on which one regime expression applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regime {
    pub start: f64,
    /// `None` for the final, unbounded regime.
    pub end: Option<f64>,
}

/// Averaged delay problem: regime right-hand sides plus the original history.
#[derive(Clone, Debug)]
pub struct AveragedDDE<F, H> {
    field: F,
    history: H,
    tau: f64,
    omega: f64,
}

impl<F: AveragedField, H: History> AveragedDDE<F, H> {
    pub fn new(field: F, history: H, tau: f64, omega: f64) -> Self {
        Self {
            field,
            history,
            tau,
            omega,
        }
    }

    pub fn order(&self) -> usize {
        self.field.regimes()
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `[0, tau), ..., [(n-2) tau, (n-1) tau), [(n-1) tau, inf)`.
    pub fn regimes(&self) -> Vec<Regime> {
        let n = self.order();
        (0..n)
            .map(|r| Regime {
                start: r as f64 * self.tau,
                end: (r + 1 < n).then(|| (r + 1) as f64 * self.tau),
            })
            .collect()
    }

    /// Regime containing `t`; a switch time belongs to the later regime.
    pub fn regime_at(&self, t: f64) -> usize {
        let r = (t / self.tau + 1e-9).floor();
        if r <= 0.0 {
            0
        } else {
            (r as usize).min(self.order() - 1)
        }
    }

    /// Complex evaluation of the regime active at `t`.
    pub fn rhs_complex(&self, t: f64, x: &[C64], lags: &[&[C64]]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.field.dim()];
        self.field.eval_regime(self.regime_at(t), t, x, lags, &mut out);
        out
    }
}

impl<F: AveragedField, H: History + Clone> DelaySystem for AveragedDDE<F, H> {
    type Hist = H;

    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn tau(&self) -> f64 {
        self.tau
    }

    fn history(&self) -> &H {
        &self.history
    }

    fn max_lag(&self) -> usize {
        self.field.max_lag()
    }

    fn regime_switches(&self, t_end: f64) -> Vec<f64> {
        self.regimes()
            .iter()
            .skip(1)
            .map(|r| r.start)
            .filter(|&s| s < t_end)
            .collect()
    }

    fn eval(&self, t: f64, interval_start: f64, x: &[f64], lags: &[&[f64]], out: &mut [f64]) {
        self.field
            .eval_regime_real(self.regime_at(interval_start), t, x, lags, out);
    }
}

/// `f_0(X(t), X(t - tau))`.
#[derive(Debug)]
pub struct FirstOrderField<'a, M> {
    modes: &'a M,
}

impl<M: ModeSet> AveragedField for FirstOrderField<'_, M> {
    fn dim(&self) -> usize {
        self.modes.dim()
    }

    fn regimes(&self) -> usize {
        1
    }

    fn max_lag(&self) -> usize {
        1
    }

    fn eval_regime(&self, _regime: usize, _t: f64, x: &[C64], lags: &[&[C64]], out: &mut [C64]) {
        self.modes.eval(0, x, lags[0], out);
    }
}

pub fn averaged_order1<M: ModeSet, H: History + Clone>(
    p: &ValidatedDDE<M, H>,
) -> AveragedDDE<FirstOrderField<'_, M>, H> {
    AveragedDDE::new(
        FirstOrderField { modes: p.modes() },
        p.history().clone(),
        p.tau(),
        p.omega(),
    )
}

/// `F_{2,1}` on `[0, tau)` and `F_{2,2}` on `[tau, inf)` built from the
/// analytic mode Jacobians.
#[derive(Debug)]
pub struct SecondOrderField<'a, M, H> {
    modes: &'a M,
    history: &'a H,
    tau: f64,
    omega: f64,
}

impl<M: ModeSet, H: History> SecondOrderField<'_, M, H> {
    fn weight(&self, k: i32) -> C64 {
        C64::new(0.0, 1.0 / (f64::from(k) * self.omega))
    }

    /// The four sum groups shared by both regimes.
    fn common(&self, x: &[C64], y: &[C64], out: &mut [C64]) {
        let m = self.modes;
        let f0 = m.eval_vec(0, x, y);
        let jx0 = m.jac_x(0, x, y);
        out.copy_from_slice(&f0);
        for k in m.oscillatory_indices() {
            let w = self.weight(k);
            let fk = m.eval_vec(k, x, y);
            let fmk = m.eval_vec(-k, x, y);
            let jxk = m.jac_x(k, x, y);
            let a = jx0.mul_vec(&fk);
            let b = jxk.mul_vec(&f0);
            let c = jxk.mul_vec(&fmk);
            for i in 0..out.len() {
                out[i] += w * (a[i] - b[i] + c[i]);
            }
        }
    }

    /// `F_{2,1}(x, y)` with `phi'(t - tau)` supplied.
    pub fn f21(&self, x: &[C64], y: &[C64], phi_dot: &[C64], out: &mut [C64]) {
        self.common(x, y, out);
        for k in self.modes.oscillatory_indices() {
            let w = self.weight(k);
            let d = self.modes.jac_y(k, x, y).mul_vec(phi_dot);
            for i in 0..out.len() {
                out[i] -= w * d[i];
            }
        }
    }

    /// `F_{2,2}(x, y, z)` with `y = X(t - tau)`, `z = X(t - 2 tau)`.
    pub fn f22(&self, x: &[C64], y: &[C64], z: &[C64], out: &mut [C64]) {
        self.common(x, y, out);
        let m = self.modes;
        let jy0 = m.jac_y(0, x, y);
        let f0_lag = m.eval_vec(0, y, z);
        for k in m.oscillatory_indices() {
            let w = self.weight(k);
            let jyk = m.jac_y(k, x, y);
            let fk_lag = m.eval_vec(k, y, z);
            let fmk_lag = m.eval_vec(-k, y, z);
            let a = jy0.mul_vec(&fk_lag);
            let b = jyk.mul_vec(&f0_lag);
            let c = jyk.mul_vec(&fmk_lag);
            for i in 0..out.len() {
                out[i] += w * (a[i] - b[i] + c[i]);
            }
        }
    }
}

impl<M: ModeSet, H: History> AveragedField for SecondOrderField<'_, M, H> {
    fn dim(&self) -> usize {
        self.modes.dim()
    }

    fn regimes(&self) -> usize {
        2
    }

    fn max_lag(&self) -> usize {
        2
    }

    fn eval_regime(&self, regime: usize, t: f64, x: &[C64], lags: &[&[C64]], out: &mut [C64]) {
        if regime == 0 {
            let mut phi_dot = vec![C64::new(0.0, 0.0); x.len()];
            self.history
                .derivative(C64::new(t - self.tau, 0.0), &mut phi_dot);
            self.f21(x, lags[0], &phi_dot, out);
        } else {
            self.f22(x, lags[0], lags[1], out);
        }
    }
}

pub fn second_order_field<'a, M: ModeSet, H: History>(
    p: &'a ValidatedDDE<M, H>,
) -> SecondOrderField<'a, M, H> {
    SecondOrderField {
        modes: p.modes(),
        history: p.history(),
        tau: p.tau(),
        omega: p.omega(),
    }
}

pub fn averaged_order2<'a, M: ModeSet, H: History + Clone>(
    p: &'a ValidatedDDE<M, H>,
) -> AveragedDDE<SecondOrderField<'a, M, H>, H> {
    AveragedDDE::new(
        second_order_field(p),
        p.history().clone(),
        p.tau(),
        p.omega(),
    )
}

/// Second-order stroboscopically averaged right-hand side of a segmented
/// system, assembled as a word series over its big modes.
#[derive(Clone, Copy, Debug)]
pub struct SegmentedSecondOrder<'s, 'a, M, H> {
    system: &'s SegmentedODE<'a, M, H>,
    mode: DiffMode,
}

pub fn averaged_order2_segmented<'s, 'a, M: ModeSet, H: History>(
    s: &'s SegmentedODE<'a, M, H>,
) -> SegmentedSecondOrder<'s, 'a, M, H> {
    SegmentedSecondOrder {
        system: s,
        mode: DiffMode::Dual,
    }
}

impl<M: ModeSet, H: History> SegmentedSecondOrder<'_, '_, M, H> {
    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn eval_complex(&self, xi: &[C64]) -> Result<Vec<C64>, AveragingError> {
        let ev = WordBasisEvaluator::new(self.system).with_mode(self.mode);
        let omega = self.system.problem().omega();
        let mut out = self.system.eval_vec(0, xi);
        for &k in self.system.indices().iter().filter(|&&k| k != 0) {
            let w = C64::new(0.0, 1.0 / (f64::from(k) * omega));
            let g_k0 = ev.word_basis(&Word::new([k, 0]), xi)?;
            let g_0k = ev.word_basis(&Word::new([0, k]), xi)?;
            let g_mkk = if self.system.contains(-k) {
                ev.word_basis(&Word::new([-k, k]), xi)?
            } else {
                vec![C64::new(0.0, 0.0); xi.len()]
            };
            for i in 0..out.len() {
                out[i] += w * (g_k0[i] - g_0k[i] + g_mkk[i]);
            }
        }
        Ok(out)
    }

    /// Real part of [`Self::eval_complex`] at a real state.
    pub fn rhs(&self, xi: &[f64], out: &mut [f64]) -> Result<(), AveragingError> {
        let v = self.eval_complex(&linalg::to_complex(xi))?;
        for (o, z) in out.iter_mut().zip(v) {
            *o = z.re;
        }
        Ok(())
    }
}

/// Method-of-steps integration of an averaged system; breakpoints cover every
/// multiple of `tau`, which includes all regime switches.
pub fn integrate_averaged<F: AveragedField, H: History + Clone>(
    a: &AveragedDDE<F, H>,
    t_end: f64,
    tol: Tolerances,
) -> Result<DdeSolution<H>, IntegrationError> {
    integrate_dde(a, t_end, tol)
}

pub fn integrate_averaged_with<F: AveragedField, H: History + Clone>(
    a: &AveragedDDE<F, H>,
    t_end: f64,
    opts: &DdeOptions,
) -> Result<DdeSolution<H>, IntegrationError> {
    integrate_dde_with(a, t_end, opts)
}

/// `|Im F| / max(|Re F|, tiny)` of the regime `regime` at a real state.
pub fn realness_defect<F: AveragedField>(
    field: &F,
    regime: usize,
    t: f64,
    x: &[f64],
    lags: &[&[f64]],
) -> f64 {
    let xc = linalg::to_complex(x);
    let lc: Vec<Vec<C64>> = lags.iter().map(|l| linalg::to_complex(l)).collect();
    let lr: Vec<&[C64]> = lc.iter().map(|v| v.as_slice()).collect();
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    field.eval_regime(regime, t, &xc, &lr, &mut out);
    let re: f64 = out.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
    linalg::imag_norm(&out) / re.max(f64::MIN_POSITIVE)
}

/// Applies analytic block Jacobians to compare against dual evaluation.
pub fn jacobian_vector_product(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    m.mul_vec(v)
}
