//! Dormand-Prince 5(4) with Hairer's fourth-order continuous extension.

use alloc::vec;
use alloc::vec::Vec;


use super::dense::DenseSolution;
use crate::error::IntegrationError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Relative and absolute local error tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self, IntegrationError> {
        if !(rel >= 1e-14 && abs >= 1e-16 && rel.is_finite() && abs.is_finite()) {
            return Err(IntegrationError::InvalidRequest(
                "tolerances must satisfy rel >= 1e-14 and abs >= 1e-16",
            ));
        }
        Ok(Self { rel, abs })
    }

    /// Both tolerances divided by `factor`, floored at the admissible minimum.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rel: (self.rel / factor).max(1e-14),
            abs: (self.abs / factor).max(1e-16),
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-8,
            abs: 1e-10,
        }
    }
}

/// Knobs of the adaptive driver beyond the tolerances.
#[derive(Clone, Debug)]
pub struct StepOptions {
    pub tol: Tolerances,
    /// Times the mesh must hit exactly; the rhs is re-evaluated after each.
    pub breakpoints: Vec<f64>,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// Disables error control and takes uniform steps of (at most) this size.
    pub fixed_step: Option<f64>,
}

impl StepOptions {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            breakpoints: Vec::new(),
            initial_step: None,
            max_step: None,
            max_steps: 20_000_000,
            fixed_step: None,
        }
    }
}

/// Everything a right-hand side may consult besides `(t, y)`.
pub struct StepContext<'a> {
    /// Solution computed so far (all steps strictly before the current one).
    pub past: &'a DenseSolution,
    /// Left end of the breakpoint interval containing the current step.
    pub interval_start: f64,
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`, with `rhs` also seeing the
/// solution computed so far.
pub fn integrate_with_context<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &StepOptions,
) -> Result<DenseSolution, IntegrationError>
where
    F: FnMut(&StepContext<'_>, f64, &[f64], &mut [f64]) -> Result<(), IntegrationError>,
{
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrationError::InvalidRequest("t1 must exceed t0"));
    }
    let span = t1 - t0;
    let n = y0.len();
    // stops closer than this are the same stop up to rounding
    let merge = 1e-12 * span.max(t0.abs()).max(t1.abs());
    let mut stops: Vec<f64> = opts
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0 + merge && b < t1 - merge)
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|b, a| *b - *a <= merge);
    stops.push(t1);

    let mut sol = DenseSolution::start(t0, y0, stops.clone());
    let tol = opts.tol;
    let h_min = 1e-14 * span;
    let h_max = opts.max_step.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut coeffs = vec![0.0; 4 * n];

    let mut h = match opts.fixed_step {
        Some(hf) => hf,
        None => opts.initial_step.unwrap_or(span / 100.0),
    }
    .min(h_max);
    let mut stop_idx = 0;
    let mut interval_start = t0;
    let mut k1_fresh = false;
    let mut last_rejected = false;

    macro_rules! call {
        ($tt:expr, $yy:expr, $out:expr) => {{
            let ctx = StepContext {
                past: &sol,
                interval_start,
            };
            rhs(&ctx, $tt, $yy, $out)?;
            sol.stats.rhs_evals += 1;
        }};
    }

    while stop_idx < stops.len() {
        let stop = stops[stop_idx];
        if !k1_fresh {
            call!(t, &y, &mut k1);
            k1_fresh = true;
        }
        if sol.stats.accepted_steps + sol.stats.rejected_steps >= opts.max_steps {
            return Err(IntegrationError::MaxStepsExceeded {
                max: opts.max_steps,
                t_end: t1,
            });
        }
        // land exactly on the next stop when close
        let h_pre = h;
        let mut hits_stop = false;
        if t + h * (1.0 + 1e-10) >= stop || stop - (t + h) < 1e-3 * h {
            h = stop - t;
            hits_stop = true;
        }
        if h < h_min {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        call!(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        call!(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        call!(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        call!(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if hits_stop { stop } else { t + h };
        // stages ending on a stop see the left limit of a discontinuous rhs
        let t_last = if hits_stop { stop.next_down() } else { t_new };
        call!(t_last, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        call!(t_last, &ynew, &mut k7);

        let err = if opts.fixed_step.is_some() {
            0.0
        } else {
            let mut acc = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sk = tol.abs + tol.rel * y[i].abs().max(ynew[i].abs());
                acc += (e / sk) * (e / sk);
            }
            (acc / n.max(1) as f64).sqrt()
        };
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            if opts.fixed_step.is_some() {
                return Err(IntegrationError::NonFinite { t });
            }
            sol.stats.rejected_steps += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                coeffs[i] = ydiff;
                coeffs[n + i] = bspl;
                coeffs[2 * n + i] = ydiff - h * k7[i] - bspl;
                coeffs[3 * n + i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            sol.push_step(t_new, &ynew, &coeffs);
            sol.stats.accepted_steps += 1;
            t = t_new;
            core::mem::swap(&mut y, &mut ynew);
            if hits_stop {
                stop_idx += 1;
                interval_start = t;
                k1_fresh = false;
            } else {
                core::mem::swap(&mut k1, &mut k7);
            }
            let grow = if last_rejected { 1.0 } else { 10.0 };
            last_rejected = false;
            let fac = if err == 0.0 {
                grow
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, grow)
            };
            let h_next = if let Some(hf) = opts.fixed_step {
                hf
            } else {
                h * fac
            };
            // a step shortened to land on a stop says nothing about the next one
            h = if hits_stop { h_next.max(h_pre) } else { h_next }.min(h_max);
        } else {
            sol.stats.rejected_steps += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(sol)
}

/// Adaptive integration of `y' = rhs(t, y)` on `[t0, t1]`; steps never
/// straddle a breakpoint.
pub fn integrate_ode<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: Tolerances,
    breakpoints: &[f64],
) -> Result<DenseSolution, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut opts = StepOptions::new(tol);
    opts.breakpoints = breakpoints.to_vec();
    integrate_ode_with(move |t, y, out| rhs(t, y, out), t0, t1, y0, &opts)
}

pub fn integrate_ode_with<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &StepOptions,
) -> Result<DenseSolution, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_with_context(
        |_, t, y, out| {
            rhs(t, y, out);
            Ok(())
        },
        t0,
        t1,
        y0,
        opts,
    )
}
