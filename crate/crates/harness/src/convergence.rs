//! Maximum stroboscopic `u`-errors of the averaged toggle against a tight
//! reference solution, over a list of fast frequencies.

use std::path::Path;

use rayon::prelude::*;

use strobo_core::averaging::{averaged_order1, integrate_averaged};
use strobo_core::integrators::{integrate_dde_with, DdeOptions, DdeSolution, Tolerances};
use strobo_core::model::{stroboscopic_grid, History};
use strobo_core::toggle::{toggle_averaged, toggle_oscillatory};

use crate::{csv_text, loglog_slope, thread_pool, write_file, HarnessError, RunConfig};

pub const CSV_HEADER: &str = "omega,err_order2,err_order3";

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub omega: f64,
    pub err_order1: f64,
    pub err_order2: f64,
    pub err_order3: f64,
    /// `|u(t_end)|` change of the reference when rerun 10x tighter, if requested.
    pub reference_shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by `omega`.
    pub rows: Vec<ConvergenceRow>,
    pub slope_order1: Option<f64>,
    pub slope_order2: Option<f64>,
    pub slope_order3: Option<f64>,
    pub tol: Tolerances,
    pub reference_tol: Tolerances,
}

impl ConvergenceReport {
    pub fn csv(&self) -> String {
        csv_text(
            CSV_HEADER,
            self.rows.iter().map(|r| vec![r.omega, r.err_order2, r.err_order3]),
        )
    }

    pub fn summary(&self) -> String {
        let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let mut s = format!(
            "tolerances rel {:e} abs {:e}; reference rel {:e} abs {:e}\n",
            self.tol.rel, self.tol.abs, self.reference_tol.rel, self.reference_tol.abs
        );
        s.push_str("omega/pi   err_order1   err_order2   err_order3\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:8.1}   {:.3e}   {:.3e}   {:.3e}",
                r.omega / std::f64::consts::PI,
                r.err_order1,
                r.err_order2,
                r.err_order3
            ));
            if let Some(d) = r.reference_shift {
                s.push_str(&format!("   reference shift {d:.1e}"));
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "slopes: order1 {} order2 {} order3 {}\n",
            slope(self.slope_order1),
            slope(self.slope_order2),
            slope(self.slope_order3)
        ));
        s
    }
}

fn max_u_error<H: History>(
    a: &DdeSolution<H>,
    b: &DdeSolution<H>,
    times: &[f64],
) -> Result<f64, HarnessError> {
    let mut worst: f64 = 0.0;
    for &t in times {
        worst = worst.max((a.eval(t)?[0] - b.eval(t)?[0]).abs());
    }
    Ok(worst)
}

/// One row of the study at fast frequency `omega`.
pub fn run_omega(cfg: &RunConfig, omega: f64) -> Result<ConvergenceRow, HarnessError> {
    let p = cfg.params_at(omega);
    let osc = toggle_oscillatory(&p)?;
    let grid = stroboscopic_grid(&osc, cfg.t_end)?;
    let tol = cfg.tolerances()?;
    let mut opts = DdeOptions::new(cfg.reference_tolerances()?);
    opts.extra_stops = grid.times.clone();
    let truth = integrate_dde_with(&osc, cfg.t_end, &opts)?;

    let reference_shift = if cfg.reference_guard {
        let mut tight = opts.clone();
        tight.tol = opts.tol.tightened(10.0);
        let finer = integrate_dde_with(&osc, cfg.t_end, &tight)?;
        Some((finer.eval(cfg.t_end)?[0] - truth.eval(cfg.t_end)?[0]).abs())
    } else {
        None
    };

    let a1 = integrate_averaged(&averaged_order1(&osc), cfg.t_end, tol)?;
    let a2 = integrate_averaged(&toggle_averaged(&p, 2)?, cfg.t_end, tol)?;
    let a3 = integrate_averaged(&toggle_averaged(&p, 3)?, cfg.t_end, tol)?;
    Ok(ConvergenceRow {
        omega,
        err_order1: max_u_error(&a1, &truth, &grid.times)?,
        err_order2: max_u_error(&a2, &truth, &grid.times)?,
        err_order3: max_u_error(&a3, &truth, &grid.times)?,
        reference_shift,
    })
}

/// Runs every frequency of `cfg`, concurrently up to `AVG_THREADS`.
pub fn convergence(cfg: &RunConfig) -> Result<ConvergenceReport, HarnessError> {
    cfg.validate()?;
    let rows: Vec<ConvergenceRow> = thread_pool().install(|| {
        cfg.omegas
            .par_iter()
            .map(|&w| run_omega(cfg, w))
            .collect::<Result<_, _>>()
    })?;
    let omegas: Vec<f64> = rows.iter().map(|r| r.omega).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(ConvergenceReport {
        slope_order1: loglog_slope(&omegas, &col(|r| r.err_order1)),
        slope_order2: loglog_slope(&omegas, &col(|r| r.err_order2)),
        slope_order3: loglog_slope(&omegas, &col(|r| r.err_order3)),
        tol: cfg.tolerances()?,
        reference_tol: cfg.reference_tolerances()?,
        rows,
    })
}

/// Runs the study and writes `convergence.csv` into `out`.
pub fn cmd_convergence(cfg: &RunConfig, out: &Path) -> Result<ConvergenceReport, HarnessError> {
    let report = convergence(cfg)?;
    write_file(out, "convergence.csv", &report.csv())?;
    Ok(report)
}

