#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;

use strobo_core::linalg::CMatrix;
use strobo_core::model::{
    validate_problem, BilinearModes, BilinearTerm, ConstantHistory, History, OscillatoryDDE,
    ValidatedDDE,
};
use strobo_core::scalar::{Scalar, C64};

pub type Bilinear = ValidatedDDE<BilinearModes, ConstantHistory>;

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn random_term<R: Rng>(rng: &mut R, dim: usize, scale: f64, complex: bool) -> BilinearTerm {
    let z = |rng: &mut R| {
        let im = if complex { rng.gen_range(-scale..scale) } else { 0.0 };
        C64::new(rng.gen_range(-scale..scale), im)
    };
    BilinearTerm {
        a: CMatrix::from_fn(dim, dim, |_, _| z(rng)),
        b: CMatrix::from_fn(dim, dim, |_, _| z(rng)),
        c: (0..dim).map(|_| z(rng)).collect(),
        e: (0..dim).map(|_| z(rng)).collect(),
    }
}

/// `phi_i(t) = a_i + b_i sin(w_i t)`.
#[derive(Clone, Debug)]
pub struct SineHistory {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

impl History for SineHistory {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, t: f64, out: &mut [f64]) {
        for i in 0..self.a.len() {
            out[i] = self.a[i] + self.b[i] * (self.w[i] * t).sin();
        }
    }
    fn derivative<S: Scalar>(&self, t: S, out: &mut [S]) {
        for i in 0..self.a.len() {
            out[i] = t.scale(c(self.w[i])).cos().scale(c(self.b[i] * self.w[i]));
        }
    }
}

pub fn random_sine_history<R: Rng>(rng: &mut R, dim: usize) -> SineHistory {
    SineHistory {
        a: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        b: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        w: (0..dim).map(|_| rng.gen_range(0.5..3.0)).collect(),
    }
}

/// Random real single-harmonic bilinear problem with the given history.
pub fn random_problem_with<R: Rng, H: History>(
    rng: &mut R,
    history: H,
    tau: f64,
    m: u32,
    scale: f64,
    coupling: bool,
) -> ValidatedDDE<BilinearModes, H> {
    let dim = history.dim();
    let mut mean = random_term(rng, dim, scale, false);
    let mut first = random_term(rng, dim, scale, true);
    if !coupling {
        mean.e = vec![c(0.0); dim];
        first.e = vec![c(0.0); dim];
    }
    validate_problem(OscillatoryDDE {
        modes: BilinearModes::real_single_harmonic(dim, mean, first),
        history,
        tau,
        omega: 2.0 * PI * f64::from(m) / tau,
        slow_time_index: None,
    })
    .unwrap()
}

/// Random real single-harmonic bilinear delay problem.
pub fn random_problem<R: Rng>(rng: &mut R, dim: usize, tau: f64, m: u32, scale: f64) -> Bilinear {
    let mean = random_term(rng, dim, scale, false);
    let first = random_term(rng, dim, scale, true);
    let history = ConstantHistory::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
    validate_problem(OscillatoryDDE {
        modes: BilinearModes::real_single_harmonic(dim, mean, first),
        history,
        tau,
        omega: 2.0 * PI * f64::from(m) / tau,
        slow_time_index: None,
    })
    .unwrap()
}

/// `x' = -x(t - 1)`, `x = 1` on `[-1, 0]`, dressed as a forced problem with
/// vanishing oscillatory modes.
pub fn negative_feedback() -> Bilinear {
    let mut mean = BilinearTerm::zero(1);
    mean.b = CMatrix::from_fn(1, 1, |_, _| c(-1.0));
    validate_problem(OscillatoryDDE {
        modes: BilinearModes::real_single_harmonic(1, mean, BilinearTerm::zero(1)),
        history: ConstantHistory::new(vec![1.0]),
        tau: 1.0,
        omega: 2.0 * PI,
        slow_time_index: None,
    })
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn cdist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `|a - b| / max(|b|, 1)`.
pub fn rel_defect(a: &[C64], b: &[C64]) -> f64 {
    cdist(a, b) / cnorm(b).max(1.0)
}
