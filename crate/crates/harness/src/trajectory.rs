//! Long-time comparison of the oscillatory toggle with its order-2 and
//! order-3 averaged systems, with wall times.

use std::fmt::Write as _;
use std::path::Path;

use strobo_core::integrators::{integrate_dde, integrate_dde_with, DdeOptions};
use strobo_core::model::stroboscopic_grid;
use strobo_core::toggle::{toggle_averaged, toggle_oscillatory};

use crate::{csv_text, timed, write_file, HarnessError, RunConfig};

pub const CSV_HEADER: &str = "t,u,v";

/// `(t, u, v)` samples.
pub type Samples = Vec<[f64; 3]>;

#[derive(Clone, Debug)]
pub struct TrajectoryReport {
    pub omega: f64,
    /// Oscillatory reference at the stroboscopic times.
    pub truth: Samples,
    pub avg2: Samples,
    pub avg3: Samples,
    /// Max `|u - U|` over the stroboscopic times.
    pub discrepancy_order2: f64,
    pub discrepancy_order3: f64,
    /// Wall seconds of the oscillatory run at reference tolerance.
    pub wall_true: f64,
    /// Wall seconds of the oscillatory run at the averaged runs' tolerance.
    pub wall_true_same_tol: f64,
    pub wall_avg2: f64,
    pub wall_avg3: f64,
    /// Mean detrended peak-to-peak of `u` and `v` within one fast period, over
    /// the last delay interval.
    pub fast_amplitude_u: f64,
    pub fast_amplitude_v: f64,
}

impl TrajectoryReport {
    pub fn timing_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "omega = {}", self.omega);
        let _ = writeln!(s, "wall_true_s = {:.6}", self.wall_true);
        let _ = writeln!(s, "wall_true_same_tol_s = {:.6}", self.wall_true_same_tol);
        let _ = writeln!(s, "wall_avg2_s = {:.6}", self.wall_avg2);
        let _ = writeln!(s, "wall_avg3_s = {:.6}", self.wall_avg3);
        let _ = writeln!(s, "speedup_avg2 = {:.2}", self.wall_true / self.wall_avg2);
        let _ = writeln!(s, "speedup_avg3 = {:.2}", self.wall_true / self.wall_avg3);
        let _ = writeln!(s, "discrepancy_order2 = {:e}", self.discrepancy_order2);
        let _ = writeln!(s, "discrepancy_order3 = {:e}", self.discrepancy_order3);
        let _ = writeln!(s, "fast_amplitude_u = {:e}", self.fast_amplitude_u);
        let _ = writeln!(s, "fast_amplitude_v = {:e}", self.fast_amplitude_v);
        s
    }
}

fn rows(s: &Samples) -> impl Iterator<Item = Vec<f64>> + '_ {
    s.iter().map(|r| r.to_vec())
}

/// Integrates the three systems at the first frequency of `cfg` over `[0, t_end]`.
pub fn trajectory(cfg: &RunConfig) -> Result<TrajectoryReport, HarnessError> {
    cfg.validate()?;
    let omega = cfg.omegas[0];
    let p = cfg.params_at(omega);
    let osc = toggle_oscillatory(&p)?;
    let a2 = toggle_averaged(&p, 2)?;
    let a3 = toggle_averaged(&p, 3)?;
    let grid = stroboscopic_grid(&osc, cfg.t_end)?;
    let tol = cfg.tolerances()?;
    let mut opts = DdeOptions::new(cfg.reference_tolerances()?);
    opts.extra_stops = grid.times.clone();
    let t_end = cfg.t_end;
    let n = cfg.timing_repeats;

    let (truth, wall_true) = timed(n, || integrate_dde_with(&osc, t_end, &opts));
    let truth = truth?;
    let (same, wall_true_same_tol) = timed(n, || integrate_dde(&osc, t_end, tol));
    same?;
    let (s2, wall_avg2) = timed(n, || integrate_dde(&a2, t_end, tol));
    let s2 = s2?;
    let (s3, wall_avg3) = timed(n, || integrate_dde(&a3, t_end, tol));
    let s3 = s3?;

    let mut true_rows = Vec::with_capacity(grid.times.len());
    let (mut d2, mut d3): (f64, f64) = (0.0, 0.0);
    for &t in &grid.times {
        let x = truth.eval(t)?;
        d2 = d2.max((s2.eval(t)?[0] - x[0]).abs());
        d3 = d3.max((s3.eval(t)?[0] - x[0]).abs());
        true_rows.push([t, x[0], x[1]]);
    }
    let m = cfg.dense_samples;
    let dense = |s: &strobo_core::integrators::DdeSolution<_>| -> Result<Samples, HarnessError> {
        (0..m)
            .map(|i| {
                let t = if i + 1 == m { t_end } else { t_end * i as f64 / (m - 1) as f64 };
                let x = s.eval(t)?;
                Ok([t, x[0], x[1]])
            })
            .collect()
    };

    // fast oscillation size over the last delay interval, with the chord
    // across each period removed so that slow drift does not count
    let period = osc.period();
    let start = (t_end - osc.tau()).max(0.0);
    let periods = ((t_end - start) / period).floor().max(1.0) as usize;
    let (mut amp_u, mut amp_v) = (0.0, 0.0);
    for j in 0..periods {
        let t0 = start + period * j as f64;
        let a = truth.eval(t0)?;
        let b = truth.eval((t0 + period).min(t_end))?;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for i in 0..=64 {
            let s = i as f64 / 64.0;
            let x = truth.eval((t0 + period * s).min(t_end))?;
            for c in 0..2 {
                let d = x[c] - (a[c] + s * (b[c] - a[c]));
                lo[c] = lo[c].min(d);
                hi[c] = hi[c].max(d);
            }
        }
        amp_u += hi[0] - lo[0];
        amp_v += hi[1] - lo[1];
    }

    Ok(TrajectoryReport {
        omega,
        avg2: dense(&s2)?,
        avg3: dense(&s3)?,
        truth: true_rows,
        discrepancy_order2: d2,
        discrepancy_order3: d3,
        wall_true,
        wall_true_same_tol,
        wall_avg2,
        wall_avg3,
        fast_amplitude_u: amp_u / periods as f64,
        fast_amplitude_v: amp_v / periods as f64,
    })
}

/// Runs the comparison and writes the three trajectory files and `timing.txt`.
pub fn cmd_trajectory(cfg: &RunConfig, out: &Path) -> Result<TrajectoryReport, HarnessError> {
    let r = trajectory(cfg)?;
    write_file(out, "trajectory_true.csv", &csv_text(CSV_HEADER, rows(&r.truth)))?;
    write_file(out, "trajectory_avg2.csv", &csv_text(CSV_HEADER, rows(&r.avg2)))?;
    write_file(out, "trajectory_avg3.csv", &csv_text(CSV_HEADER, rows(&r.avg3)))?;
    write_file(out, "timing.txt", &r.timing_text())?;
    Ok(r)
}
