//! Method of steps for constant-delay systems.
//!
//! The mesh is forced through every multiple of `tau` (and every propagated
//! history kink), and steps are capped at `tau`, so every delayed argument
//! `x(t - j tau)` of a stage lies in the history or in already accepted steps.

use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseSolution;
use super::dopri::{integrate_with_context, StepOptions, Tolerances};
use crate::error::IntegrationError;
use crate::model::History;

/// A real delay system `x' = F(t, x(t), x(t - tau), ..., x(t - L tau))`
/// with `x = phi` on `[-tau, 0]`. Only the first `max_lag` lags are provided.
pub trait DelaySystem {
    type Hist: History;

    fn dim(&self) -> usize;
    fn tau(&self) -> f64;
    fn history(&self) -> &Self::Hist;

    /// Number of lagged states `x(t - tau), ..., x(t - max_lag tau)` needed.
    fn max_lag(&self) -> usize {
        1
    }

    /// Suggested first step.
    fn initial_step(&self) -> f64 {
        self.tau() / 50.0
    }

    /// Extra times where the right-hand side changes form (beyond multiples of tau).
    fn regime_switches(&self, _t_end: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `interval_start` identifies the breakpoint interval of the current step,
    /// so that a step ending on a regime switch still uses the left regime.
    fn eval(&self, t: f64, interval_start: f64, x: &[f64], lags: &[&[f64]], out: &mut [f64]);
}

/// Trajectory on `[-tau, t_end]`: the history on `[-tau, 0]` and a dense
/// solution after.
#[derive(Clone, Debug)]
pub struct DdeSolution<H> {
    pub dense: DenseSolution,
    pub history: H,
    pub tau: f64,
}

impl<H: History> DdeSolution<H> {
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), IntegrationError> {
        if t < 0.0 {
            if t < -self.tau * (1.0 + 1e-12) {
                return Err(IntegrationError::OutOfSpan {
                    t,
                    start: -self.tau,
                    end: self.dense.t_end(),
                });
            }
            self.history.value(t, out);
            return Ok(());
        }
        self.dense.eval_into(t, out)
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>, IntegrationError> {
        let mut out = vec![0.0; self.dense.dim()];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<Vec<f64>>, IntegrationError> {
        times.iter().map(|&t| self.eval(t)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.dense.t_end()
    }
}

/// Options for [`integrate_dde_with`].
#[derive(Clone, Debug)]
pub struct DdeOptions {
    pub tol: Tolerances,
    /// Additional mesh stops, e.g. stroboscopic output times.
    pub extra_stops: Vec<f64>,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl DdeOptions {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            extra_stops: Vec::new(),
            initial_step: None,
            max_steps: 20_000_000,
        }
    }
}

/// All times in `(0, t_end)` where the solution may lose smoothness.
pub fn breaking_points<S: DelaySystem>(sys: &S, t_end: f64) -> Vec<f64> {
    let tau = sys.tau();
    let mut bps = Vec::new();
    let mut sources: Vec<f64> = vec![0.0];
    sources.extend(sys.history().kinks().iter().copied());
    for s in sources {
        let mut j = 1;
        loop {
            let b = s + j as f64 * tau;
            if b >= t_end {
                break;
            }
            bps.push(b);
            j += 1;
        }
    }
    bps.extend(sys.regime_switches(t_end).into_iter().filter(|&b| b > 0.0 && b < t_end));
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    bps
}

pub fn integrate_dde<S: DelaySystem>(
    sys: &S,
    t_end: f64,
    tol: Tolerances,
) -> Result<DdeSolution<S::Hist>, IntegrationError>
where
    S::Hist: Clone,
{
    integrate_dde_with(sys, t_end, &DdeOptions::new(tol))
}

pub fn integrate_dde_with<S: DelaySystem>(
    sys: &S,
    t_end: f64,
    opts: &DdeOptions,
) -> Result<DdeSolution<S::Hist>, IntegrationError>
where
    S::Hist: Clone,
{
    if !(t_end > 0.0) {
        return Err(IntegrationError::InvalidRequest("t_end must be positive"));
    }
    let d = sys.dim();
    let tau = sys.tau();
    let lags_n = sys.max_lag();
    let mut x0 = vec![0.0; d];
    sys.history().value(0.0, &mut x0);

    let mut step_opts = StepOptions::new(opts.tol);
    step_opts.breakpoints = breaking_points(sys, t_end);
    step_opts.breakpoints.extend(opts.extra_stops.iter().copied());
    step_opts.initial_step = Some(opts.initial_step.unwrap_or_else(|| sys.initial_step()));
    step_opts.max_step = Some(tau);
    step_opts.max_steps = opts.max_steps;

    let mut lag_buf = vec![0.0; lags_n * d];
    let dense = integrate_with_context(
        |ctx, t, x, out| {
            for j in 0..lags_n {
                let s = t - (j + 1) as f64 * tau;
                let slot = &mut lag_buf[j * d..(j + 1) * d];
                if s <= 0.0 {
                    if s < -tau * (1.0 + 1e-12) {
                        // only reachable for lags beyond the first, before j tau
                        sys.history().value(-tau, slot);
                    } else {
                        sys.history().value(s.max(-tau), slot);
                    }
                } else if s <= ctx.past.t_end() {
                    ctx.past.eval_into(s, slot)?;
                } else {
                    return Err(IntegrationError::HistoryEvaluationOutOfRange { t: s });
                }
            }
            if lags_n <= 4 {
                let mut refs: [&[f64]; 4] = [&[]; 4];
                for (r, c) in refs.iter_mut().zip(lag_buf.chunks(d)) {
                    *r = c;
                }
                sys.eval(t, ctx.interval_start, x, &refs[..lags_n], out);
            } else {
                let lags: Vec<&[f64]> = lag_buf.chunks(d).collect();
                sys.eval(t, ctx.interval_start, x, &lags, out);
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(IntegrationError::NonFinite { t });
            }
            Ok(())
        },
        0.0,
        t_end,
        &x0,
        &step_opts,
    )?;
    Ok(DdeSolution {
        dense,
        history: sys.history().clone(),
        tau,
    })
}
