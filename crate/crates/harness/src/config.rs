//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Frequencies are given as multiples of pi:
//!
//! ```text
//! preset = table1
//! omega_over_pi = 16, 32, 64
//! rel_tol = 1e-10
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use strobo_core::integrators::Tolerances;
use strobo_core::model::stroboscopic_multiple;
use strobo_core::toggle::ToggleParams;

use crate::HarnessError;

/// Which study a configuration feeds; selects the defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Convergence,
    Trajectory,
    Verify,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    /// Toggle parameters; `omega` is overwritten per run from `omegas`.
    pub params: ToggleParams,
    pub omegas: Vec<f64>,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// The reference ("true") solution runs at tolerances divided by this.
    pub reference_factor: f64,
    /// Also rerun each reference 10x tighter and record the change in `u(t_end)`.
    pub reference_guard: bool,
    pub out: PathBuf,
    pub seed: u64,
    /// Timings report the minimum over this many repetitions.
    pub timing_repeats: usize,
    /// Uniform sample count of the averaged trajectories.
    pub dense_samples: usize,
}

pub const DEFAULT_OMEGAS_OVER_PI: [f64; 6] = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0];

impl RunConfig {
    pub fn defaults(study: Study) -> Self {
        let (preset, omegas, t_end) = match study {
            Study::Convergence | Study::Verify => (
                "table1",
                DEFAULT_OMEGAS_OVER_PI.iter().map(|k| k * PI).collect(),
                2.0,
            ),
            Study::Trajectory => ("fig2", vec![4.0 * PI], 100.0),
        };
        let params = ToggleParams::preset(preset).expect("built-in preset");
        Self {
            preset: preset.to_string(),
            params,
            omegas,
            t_end,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            reference_factor: 100.0,
            reference_guard: false,
            out: PathBuf::from("."),
            seed: 20240611,
            timing_repeats: 1,
            dense_samples: 2001,
        }
    }

    pub fn tolerances(&self) -> Result<Tolerances, HarnessError> {
        Tolerances::new(self.rel_tol, self.abs_tol).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn reference_tolerances(&self) -> Result<Tolerances, HarnessError> {
        Ok(self.tolerances()?.tightened(self.reference_factor))
    }

    /// Parameters at fast frequency `omega`.
    pub fn params_at(&self, omega: f64) -> ToggleParams {
        ToggleParams { omega, ..self.params }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.omegas.is_empty() {
            return Err(HarnessError::Config("omega_over_pi is empty".into()));
        }
        for &w in &self.omegas {
            stroboscopic_multiple(self.params.tau, w)?;
            self.params_at(w).validate()?;
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(HarnessError::Config(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.reference_factor >= 1.0 && self.reference_factor.is_finite()) {
            return Err(HarnessError::Config(format!(
                "reference_factor = {} must be at least 1",
                self.reference_factor
            )));
        }
        if self.timing_repeats == 0 {
            return Err(HarnessError::Config("timing_repeats must be at least 1".into()));
        }
        if self.dense_samples < 2 {
            return Err(HarnessError::Config("dense_samples must be at least 2".into()));
        }
        self.tolerances()?;
        Ok(())
    }

    pub fn from_file(path: &Path, study: Study) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, study)
    }

    /// Parses configuration text over the defaults of `study`. A `preset` line
    /// resets the model parameters, so it is applied before any override
    /// regardless of where it appears.
    pub fn parse(text: &str, study: Study) -> Result<Self, HarnessError> {
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            pairs.push((n + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = Self::defaults(study);
        if let Some((n, _, v)) = pairs.iter().rev().find(|(_, k, _)| k == "preset") {
            cfg.params = ToggleParams::preset(v)
                .ok_or_else(|| HarnessError::Config(format!("line {n}: unknown preset {v:?}")))?;
            cfg.preset = v.clone();
            if study != Study::Trajectory {
                cfg.omegas = DEFAULT_OMEGAS_OVER_PI.iter().map(|k| k * PI).collect();
            } else {
                cfg.omegas = vec![cfg.params.omega];
            }
        }
        for (n, key, value) in &pairs {
            let num = || parse_f64(*n, key, value);
            match key.as_str() {
                "preset" => {}
                "omega_over_pi" => {
                    cfg.omegas = value
                        .split(',')
                        .map(|s| parse_f64(*n, key, s.trim()).map(|k| k * PI))
                        .collect::<Result<_, _>>()?;
                }
                "t_end" => cfg.t_end = num()?,
                "rel_tol" => cfg.rel_tol = num()?,
                "abs_tol" => cfg.abs_tol = num()?,
                "reference_factor" => cfg.reference_factor = num()?,
                "reference_guard" => cfg.reference_guard = parse_bool(*n, key, value)?,
                "out" => cfg.out = PathBuf::from(value),
                "seed" => cfg.seed = parse_int(*n, key, value)?,
                "timing_repeats" => cfg.timing_repeats = parse_int(*n, key, value)? as usize,
                "dense_samples" => cfg.dense_samples = parse_int(*n, key, value)? as usize,
                "alpha" => cfg.params.alpha = num()?,
                "beta" => cfg.params.beta = num()?,
                "a_slow" => cfg.params.a_slow = num()?,
                "omega_slow" => cfg.params.omega_slow = num()?,
                "b_fast" => cfg.params.b_fast = num()?,
                "tau" => cfg.params.tau = num()?,
                "u0" => cfg.params.u0 = num()?,
                "v0" => cfg.params.v0 = num()?,
                "allow_small_beta" => cfg.params.allow_small_beta = parse_bool(*n, key, value)?,
                _ => return Err(HarnessError::Config(format!("line {n}: unknown key {key:?}"))),
            }
        }
        cfg.omegas.sort_by(f64::total_cmp);
        cfg.omegas.dedup();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("line {line}: {key} = {value:?} is not a number")))
}

fn parse_int(line: usize, key: &str, value: &str) -> Result<u64, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("line {line}: {key} = {value:?} is not an integer")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, HarnessError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(HarnessError::Config(format!("line {line}: {key} = {value:?} is not a boolean"))),
    }
}
