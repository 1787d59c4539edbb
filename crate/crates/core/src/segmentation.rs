//! Reformulation of a delay problem on `[0, L tau]` as a non-delay oscillatory
//! system for `xi = (t_hat, x^(0), ..., x^(L))`, each block living on `[0, tau]`,
//! and the inverse patching into a single trajectory on `[-tau, L tau]`.
//!
//! Block `l >= 1` obeys `x^(l)' = f(x^(l), x^(l-1), omega t)`; block 0 reproduces
//! the history through `x^(0)' = phi'(t_hat - tau)`, and `t_hat' = 1`. The
//! shift `omega (t + (l-1) tau) -> omega t` is exact because `tau` is a whole
//! number of forcing periods.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{IntegrationError, SegmentationError};
use crate::integrators::{integrate_ode_with, DenseSolution, StepOptions, Tolerances};
use crate::linalg;
use crate::model::{History, ModeSet, OdeModes, ValidatedDDE};
use crate::scalar::{Scalar, C64};

/// Junction mismatch above which patching is refused.
pub const CONTINUITY_LIMIT: f64 = 1e-6;

/// Index map of the big state `(t_hat, x^(0), ..., x^(L))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub dim: usize,
    pub intervals: usize,
}

impl Layout {
    pub fn big_dimension(&self) -> usize {
        1 + self.dim * (self.intervals + 1)
    }

    pub const T_HAT: usize = 0;

    pub fn block(&self, l: usize) -> core::ops::Range<usize> {
        let start = 1 + l * self.dim;
        start..start + self.dim
    }

    pub fn pack(&self, t_hat: f64, blocks: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(blocks.len(), self.intervals + 1);
        let mut xi = Vec::with_capacity(self.big_dimension());
        xi.push(t_hat);
        for b in blocks {
            assert_eq!(b.len(), self.dim);
            xi.extend_from_slice(b);
        }
        xi
    }

    pub fn unpack(&self, xi: &[f64]) -> (f64, Vec<Vec<f64>>) {
        assert_eq!(xi.len(), self.big_dimension());
        let blocks = (0..=self.intervals)
            .map(|l| xi[self.block(l)].to_vec())
            .collect();
        (xi[Self::T_HAT], blocks)
    }
}

/// The `1 + D (L + 1)`-dimensional non-delay system equivalent to a forced
/// delay problem on `[0, L tau]`.
#[derive(Debug)]
pub struct SegmentedODE<'a, M, H> {
    problem: &'a ValidatedDDE<M, H>,
    layout: Layout,
}

impl<M, H> Clone for SegmentedODE<'_, M, H> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M, H> Copy for SegmentedODE<'_, M, H> {}

pub fn segment<M: ModeSet, H: History>(
    p: &ValidatedDDE<M, H>,
    intervals: usize,
) -> Result<SegmentedODE<'_, M, H>, SegmentationError> {
    if intervals < 1 {
        return Err(SegmentationError::InvalidIntervalCount(intervals));
    }
    Ok(SegmentedODE {
        problem: p,
        layout: Layout {
            dim: p.dim(),
            intervals,
        },
    })
}

impl<'a, M: ModeSet, H: History> SegmentedODE<'a, M, H> {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn intervals(&self) -> usize {
        self.layout.intervals
    }

    pub fn big_dimension(&self) -> usize {
        self.layout.big_dimension()
    }

    pub fn problem(&self) -> &'a ValidatedDDE<M, H> {
        self.problem
    }

    /// The same reformulation covering fewer delay intervals.
    pub fn truncated(&self, intervals: usize) -> Self {
        assert!(intervals >= 1 && intervals <= self.layout.intervals);
        Self {
            problem: self.problem,
            layout: Layout {
                dim: self.layout.dim,
                intervals,
            },
        }
    }

    /// `xi(0) = (0, phi(-tau), phi(0), x^(1)(tau), ...)` given the chained
    /// end values of the earlier blocks.
    pub fn initial_state(&self, chained: &[Vec<f64>]) -> Vec<f64> {
        let d = self.layout.dim;
        let h = self.problem.history();
        let mut blocks = vec![vec![0.0; d]; self.layout.intervals + 1];
        h.value(-self.problem.tau(), &mut blocks[0]);
        h.value(0.0, &mut blocks[1]);
        for (l, start) in chained.iter().enumerate() {
            blocks[l + 2].clone_from(start);
        }
        self.layout.pack(0.0, &blocks)
    }

    /// Real right-hand side `sum_k exp(i k theta) g_k(xi)`.
    pub fn rhs(&self, xi: &[f64], theta: f64, out: &mut [f64]) {
        let xc = linalg::to_complex(xi);
        let mut acc = vec![C64::new(0.0, 0.0); xi.len()];
        let mut buf = vec![C64::new(0.0, 0.0); xi.len()];
        for &k in self.problem.modes().indices() {
            OdeModes::eval(self, k, &xc, &mut buf);
            let phase = C64::from_polar(1.0, f64::from(k) * theta);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += phase * b;
            }
        }
        for (o, z) in out.iter_mut().zip(acc) {
            *o = z.re;
        }
    }
}

impl<M: ModeSet, H: History> OdeModes for SegmentedODE<'_, M, H> {
    fn dim(&self) -> usize {
        self.layout.big_dimension()
    }

    fn indices(&self) -> &[i32] {
        self.problem.modes().indices()
    }

    fn eval<S: Scalar>(&self, k: i32, xi: &[S], out: &mut [S]) {
        let lay = self.layout;
        let zero = S::zero();
        out.iter_mut().for_each(|o| *o = zero);
        if !self.problem.modes().contains(k) {
            return;
        }
        if k == 0 {
            out[Layout::T_HAT] = S::one();
            let shifted = xi[Layout::T_HAT] - S::from_f64(self.problem.tau());
            self.problem
                .history()
                .derivative(shifted, &mut out[lay.block(0)]);
        }
        for l in 1..=lay.intervals {
            let (x, y) = (&xi[lay.block(l)], &xi[lay.block(l - 1)]);
            let mut buf = vec![zero; lay.dim];
            self.problem.modes().eval(k, x, y, &mut buf);
            out[lay.block(l)].copy_from_slice(&buf);
        }
    }

    /// Block-structured `g_k'(xi) v` from the analytic mode Jacobians.
    fn jvp(&self, k: i32, xi: &[C64], v: &[C64]) -> Option<Vec<C64>> {
        let lay = self.layout;
        let modes = self.problem.modes();
        let mut out = vec![C64::new(0.0, 0.0); lay.big_dimension()];
        if !modes.contains(k) {
            return Some(out);
        }
        if k == 0 {
            // d/dt_hat of phi'(t_hat - tau), through one dual level
            let t = crate::scalar::Dual::new(
                xi[Layout::T_HAT] - self.problem.tau(),
                v[Layout::T_HAT],
            );
            let mut d = vec![crate::scalar::Dual::<C64>::zero(); lay.dim];
            self.problem.history().derivative(t, &mut d);
            for (o, di) in out[lay.block(0)].iter_mut().zip(d) {
                *o = di.eps;
            }
        }
        for l in 1..=lay.intervals {
            let (x, y) = (&xi[lay.block(l)], &xi[lay.block(l - 1)]);
            let jx = modes.jac_x(k, x, y).mul_vec(&v[lay.block(l)]);
            let jy = modes.jac_y(k, x, y).mul_vec(&v[lay.block(l - 1)]);
            for ((o, a), b) in out[lay.block(l)].iter_mut().zip(jx).zip(jy) {
                *o = a + b;
            }
        }
        Some(out)
    }
}

/// Dense trajectories of every block on `[0, tau]`.
///
/// Block `l` is taken from the pass that integrated the system truncated to
/// `l` intervals; the next pass starts block `l + 1` from its end value, so
/// the chaining `x^(l+1)(0) = x^(l)(tau)` holds bitwise.
#[derive(Clone, Debug)]
pub struct SegmentedSolution {
    layout: Layout,
    tau: f64,
    passes: Vec<DenseSolution>,
}

impl SegmentedSolution {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn intervals(&self) -> usize {
        self.layout.intervals
    }

    /// Big-system solution of pass `l` (1-based), covering blocks `0..=l`.
    pub fn pass(&self, l: usize) -> &DenseSolution {
        &self.passes[l - 1]
    }

    /// Evaluates block `l` at `s` in `[0, tau]`.
    pub fn segment_into(&self, l: usize, s: f64, out: &mut [f64]) -> Result<(), IntegrationError> {
        let pass = &self.passes[l.max(1) - 1];
        let full = pass.eval(s)?;
        out.copy_from_slice(&full[self.layout.block(l)]);
        Ok(())
    }

    pub fn segment(&self, l: usize, s: f64) -> Result<Vec<f64>, IntegrationError> {
        let mut out = vec![0.0; self.layout.dim];
        self.segment_into(l, s, &mut out)?;
        Ok(out)
    }

    /// `t_hat` along pass `l`, which must equal `t`.
    pub fn t_hat(&self, l: usize, s: f64) -> Result<f64, IntegrationError> {
        Ok(self.passes[l - 1].eval(s)?[Layout::T_HAT])
    }
}

/// Integrates the segmented oscillatory system pass by pass.
pub fn integrate_segmented<M: ModeSet, H: History>(
    s: &SegmentedODE<'_, M, H>,
    tol: Tolerances,
) -> Result<SegmentedSolution, SegmentationError> {
    let omega = s.problem().omega();
    let period = s.problem().period();
    integrate_segmented_with(s, tol, period / 50.0, |sub| {
        move |t: f64, xi: &[f64], out: &mut [f64]| sub.rhs(xi, omega * t, out)
    })
}

/// Pass-by-pass integration of a big system whose right-hand side for the
/// truncation to `l` intervals is produced by `make_rhs`.
pub fn integrate_segmented_with<'a, M, H, F, R>(
    s: &SegmentedODE<'a, M, H>,
    tol: Tolerances,
    initial_step: f64,
    make_rhs: F,
) -> Result<SegmentedSolution, SegmentationError>
where
    M: ModeSet,
    H: History,
    F: Fn(SegmentedODE<'a, M, H>) -> R,
    R: FnMut(f64, &[f64], &mut [f64]),
{
    let tau = s.problem().tau();
    let mut opts = StepOptions::new(tol);
    opts.initial_step = Some(initial_step);
    // kinks of phi' enter block 0 at s + tau
    opts.breakpoints = s
        .problem()
        .history()
        .kinks()
        .iter()
        .map(|k| k + tau)
        .filter(|&b| b > 0.0 && b < tau)
        .collect();

    let mut passes = Vec::with_capacity(s.intervals());
    let mut chained: Vec<Vec<f64>> = Vec::new();
    for l in 1..=s.intervals() {
        let sub = s.truncated(l);
        let xi0 = sub.initial_state(&chained);
        let sol = integrate_ode_with(make_rhs(sub), 0.0, tau, &xi0, &opts)?;
        chained.push(sol.last_state()[sub.layout().block(l)].to_vec());
        passes.push(sol);
    }
    Ok(SegmentedSolution {
        layout: s.layout(),
        tau,
        passes,
    })
}

/// Single continuous trajectory `X(t) = X^(l)(t - (l - 1) tau)` on `[-tau, L tau]`.
#[derive(Clone, Debug)]
pub struct PatchedTrajectory {
    segments: SegmentedSolution,
}

/// Checks the junction conditions and assembles the patched trajectory.
pub fn patch(segments: SegmentedSolution) -> Result<PatchedTrajectory, SegmentationError> {
    let tau = segments.tau();
    for l in 1..=segments.intervals() {
        let left = segments.segment(l - 1, tau)?;
        let right = segments.segment(l, 0.0)?;
        let mismatch = left
            .iter()
            .zip(&right)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if mismatch > CONTINUITY_LIMIT || !mismatch.is_finite() {
            return Err(SegmentationError::ContinuityViolation {
                index: l,
                mismatch,
                limit: CONTINUITY_LIMIT,
            });
        }
    }
    Ok(PatchedTrajectory { segments })
}

impl PatchedTrajectory {
    pub fn t_start(&self) -> f64 {
        -self.segments.tau()
    }

    pub fn t_end(&self) -> f64 {
        self.segments.tau() * self.segments.intervals() as f64
    }

    pub fn segments(&self) -> &SegmentedSolution {
        &self.segments
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), IntegrationError> {
        let tau = self.segments.tau();
        let (start, end) = (self.t_start(), self.t_end());
        let slack = 1e-12 * tau;
        if !(t >= start - slack && t <= end + slack) {
            return Err(IntegrationError::OutOfSpan { t, start, end });
        }
        let l = if t <= 0.0 {
            0
        } else {
            ((t / tau).ceil() as usize).clamp(1, self.segments.intervals())
        };
        let local = (t - (l as f64 - 1.0) * tau).clamp(0.0, tau);
        self.segments.segment_into(l, local, out)
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>, IntegrationError> {
        let mut out = vec![0.0; self.segments.layout().dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }
}
