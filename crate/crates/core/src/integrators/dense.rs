use alloc::vec::Vec;

use crate::error::IntegrationError;

/// Counters gathered during an integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
}

/// Piecewise quartic trajectory produced by the Dormand-Prince continuous
/// extension. Each step stores four coefficient vectors; the state at the
/// step start is kept separately so mesh values are returned bitwise.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    coeffs: Vec<f64>,
    breakpoints: Vec<f64>,
    pub(crate) stats: IntegrationStats,
}

impl DenseSolution {
    pub(crate) fn start(t0: f64, y0: &[f64], breakpoints: Vec<f64>) -> Self {
        Self {
            dim: y0.len(),
            times: alloc::vec![t0],
            states: y0.to_vec(),
            coeffs: Vec::new(),
            breakpoints,
            stats: IntegrationStats::default(),
        }
    }

    /// `coeffs` holds `[y1 - y0, h f0 - (y1 - y0), (y1 - y0) - h f1 - bspl, h sum d_i k_i]`.
    pub(crate) fn push_step(&mut self, t1: f64, y1: &[f64], coeffs: &[f64]) {
        debug_assert_eq!(coeffs.len(), 4 * self.dim);
        self.times.push(t1);
        self.states.extend_from_slice(y1);
        self.coeffs.extend_from_slice(coeffs);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Step endpoints, including the initial time.
    pub fn mesh(&self) -> &[f64] {
        &self.times
    }

    pub fn state_at_mesh(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state_at_mesh(self.times.len() - 1)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Evaluates the interpolant at `t`, returning stored values exactly at
    /// mesh points.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), IntegrationError> {
        let (start, end) = (self.t_start(), self.t_end());
        if !(t >= start && t <= end) {
            return Err(IntegrationError::OutOfSpan { t, start, end });
        }
        // index of the last mesh point <= t
        let i = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[i] == t {
            out.copy_from_slice(self.state_at_mesh(i));
            return Ok(());
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let theta = (t - t0) / (t1 - t0);
        let theta1 = 1.0 - theta;
        let d = self.dim;
        let y0 = self.state_at_mesh(i);
        let c = &self.coeffs[4 * d * i..4 * d * (i + 1)];
        for j in 0..d {
            let (r2, r3, r4, r5) = (c[j], c[d + j], c[2 * d + j], c[3 * d + j]);
            out[j] = y0[j] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>, IntegrationError> {
        let mut out = alloc::vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }
}

/// Interpolated states at each of `times`.
pub fn sample(sol: &DenseSolution, times: &[f64]) -> Result<Vec<Vec<f64>>, IntegrationError> {
    times.iter().map(|&t| sol.eval(t)).collect()
}
