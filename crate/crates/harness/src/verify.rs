//! Cross-checks between independent routes to the same quantities.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strobo_core::averaging::{
    averaged_order1, averaged_order2, averaged_order2_segmented, realness_defect, Word,
    WordBasisEvaluator,
};
use strobo_core::integrators::{integrate_dde_with, DdeOptions, Tolerances};
use strobo_core::model::{stroboscopic_grid, History, ModeSet, OdeModes, ValidatedDDE};
use strobo_core::scalar::C64;
use strobo_core::segmentation::{integrate_segmented, patch, segment, Layout};
use strobo_core::toggle::{toggle_averaged, toggle_oscillatory, ToggleParams};

use crate::{HarnessError, RunConfig};

/// Tolerances of the segmentation round trip.
pub const ROUND_TRIP_TOL: (f64, f64) = (1e-8, 1e-10);
pub const ROUND_TRIP_LIMIT: f64 = 1e-6;
pub const IDENTITY_LIMIT: f64 = 1e-12;
pub const WORD_LIMIT: f64 = 1e-4;
pub const REALNESS_LIMIT: f64 = 1e-12;
pub const IDENTITY_STATES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    /// Where the worst defect occurred.
    pub location: String,
    pub magnitude: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.magnitude.is_finite() && self.magnitude <= self.limit
    }

    fn worst(name: impl Into<String>, limit: f64, samples: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut c = Check {
            name: name.into(),
            location: String::from("-"),
            magnitude: 0.0,
            limit,
        };
        for (loc, m) in samples {
            // NaN always wins
            if !(m <= c.magnitude) {
                c.magnitude = m;
                c.location = loc;
            }
        }
        c
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: worst {:.3e} (limit {:.0e}) at {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.magnitude,
                c.limit,
                c.location
            );
        }
        s
    }
}

fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|a - b| / max(|b|, 1)`.
fn rel(a: &[C64], b: &[C64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    d / cnorm(b).max(1.0)
}

fn to_c(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Random segmented toggle state: `t_hat` in `[0, tau)`, then per block
/// concentrations in `[0.3, 2.5]` and a slow time.
pub fn random_toggle_state<R: Rng>(rng: &mut R, lay: Layout, tau: f64) -> Vec<f64> {
    let mut xi = vec![rng.gen_range(0.0..tau)];
    for _ in 0..=lay.intervals {
        xi.push(rng.gen_range(0.3..2.5));
        xi.push(rng.gen_range(0.3..2.5));
        xi.push(rng.gen_range(-0.5..2.0));
    }
    xi
}

/// Patched segmented solution on `[0, L tau]` against the direct delay solution
/// at the stroboscopic times.
pub fn segmentation_round_trip<M: ModeSet, H: History + Clone>(
    p: &ValidatedDDE<M, H>,
    intervals: usize,
) -> Result<Check, HarnessError> {
    let tol = Tolerances::new(ROUND_TRIP_TOL.0, ROUND_TRIP_TOL.1)?;
    let s = segment(p, intervals)?;
    let x = patch(integrate_segmented(&s, tol)?)?;
    let t_end = p.tau() * intervals as f64;
    let grid = stroboscopic_grid(p, t_end)?;
    let mut opts = DdeOptions::new(tol.tightened(100.0));
    opts.extra_stops = grid.times.clone();
    let direct = integrate_dde_with(p, t_end, &opts)?;
    let mut samples = Vec::with_capacity(grid.times.len());
    for &t in &grid.times {
        let a = x.eval(t)?;
        let b = direct.eval(t)?;
        let d = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        samples.push((format!("t = {t:.4}"), d));
    }
    Ok(Check::worst(
        format!("segmentation round trip, L = {intervals}"),
        ROUND_TRIP_LIMIT,
        samples,
    ))
}

/// Second-order word-series average of the segmented system against
/// `F_{2,1}` (block 1) and `F_{2,2}` (later blocks) at the states `xs`.
pub fn second_order_identity<M: ModeSet, H: History + Clone>(
    p: &ValidatedDDE<M, H>,
    intervals: usize,
    xs: &[Vec<f64>],
) -> Result<Check, HarnessError> {
    let s = segment(p, intervals)?;
    let seg = averaged_order2_segmented(&s);
    let a2 = averaged_order2(p);
    let lay = s.layout();
    let tau = p.tau();
    let mut samples = Vec::new();
    for (i, xr) in xs.iter().enumerate() {
        let xi = to_c(xr);
        let big = seg.eval_complex(&xi)?;
        let nan = vec![C64::new(f64::NAN, 0.0); lay.dim];
        for l in 1..=intervals {
            let x = &xi[lay.block(l)];
            let y = &xi[lay.block(l - 1)];
            let z = if l >= 2 { &xi[lay.block(l - 2)] } else { &nan[..] };
            let t = xr[Layout::T_HAT] + (l as f64 - 1.0) * tau;
            let f = a2.rhs_complex(t, x, &[y, z]);
            samples.push((format!("state {i}, block {l}"), rel(&big[lay.block(l)], &f)));
        }
    }
    Ok(Check::worst(
        format!("second-order fields vs segmented average, L = {intervals}"),
        IDENTITY_LIMIT,
        samples,
    ))
}

/// Closed-form order-2 toggle field against the generic second-order field in
/// both regimes.
pub fn closed_form_identity(params: &ToggleParams, seed: u64) -> Result<Check, HarnessError> {
    let osc = toggle_oscillatory(params)?;
    let generic = averaged_order2(&osc);
    let closed = toggle_averaged(params, 2)?;
    let tau = osc.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for i in 0..IDENTITY_STATES {
        for regime in 0..2 {
            let t = tau * (regime as f64 + rng.gen_range(0.0..1.0));
            let mut state = |slow: f64| to_c(&[rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5), slow]);
            let x = state(t);
            let y = state(t - tau);
            let z = state(t - 2.0 * tau);
            let a = closed.rhs_complex(t, &x, &[&y, &z]);
            let b = generic.rhs_complex(t, &x, &[&y, &z]);
            samples.push((format!("state {i}, regime {regime}"), rel(&a, &b)));
        }
    }
    Ok(Check::worst("closed-form order 2 vs generic", IDENTITY_LIMIT, samples))
}

/// Word basis function by nested central differences along the first letter's field.
pub fn finite_difference_word<G: OdeModes>(g: &G, letters: &[i32], xi: &[C64]) -> Vec<C64> {
    match letters {
        [] => xi.to_vec(),
        [k] => g.eval_vec(*k, xi),
        [k1, rest @ ..] => {
            let v = g.eval_vec(*k1, xi);
            let vn = cnorm(&v);
            if vn == 0.0 {
                return vec![C64::new(0.0, 0.0); xi.len()];
            }
            let s = if rest.len() == 1 { 1e-6 } else { 1e-4 };
            let h = s * (1.0 + cnorm(xi)) / vn;
            let plus: Vec<C64> = xi.iter().zip(&v).map(|(x, d)| x + d * h).collect();
            let minus: Vec<C64> = xi.iter().zip(&v).map(|(x, d)| x - d * h).collect();
            let a = finite_difference_word(g, rest, &plus);
            let b = finite_difference_word(g, rest, &minus);
            a.iter().zip(&b).map(|(p, m)| (p - m) / (2.0 * h)).collect()
        }
    }
}

/// Word basis of every word of length at most 3 over `{-1, 0, 1}` against
/// finite differences.
pub fn word_basis_check<M: ModeSet, H: History>(
    p: &ValidatedDDE<M, H>,
    xs: &[Vec<f64>],
) -> Result<Check, HarnessError> {
    let s = segment(p, 2)?;
    let ev = WordBasisEvaluator::new(&s);
    let words = Word::all_up_to(&[-1, 0, 1], 3);
    let mut samples = Vec::new();
    for (i, xr) in xs.iter().enumerate() {
        let xi = to_c(xr);
        for w in &words {
            let a = ev.word_basis(w, &xi)?;
            let b = finite_difference_word(&s, w.letters(), &xi);
            samples.push((format!("state {i}, word {:?}", w.letters()), rel(&a, &b)));
        }
    }
    Ok(Check::worst("word basis vs finite differences", WORD_LIMIT, samples))
}

/// Imaginary residue of the averaged fields at real states.
pub fn realness_check(params: &ToggleParams, seed: u64) -> Result<Check, HarnessError> {
    let osc = toggle_oscillatory(params)?;
    let a1 = averaged_order1(&osc);
    let a2 = averaged_order2(&osc);
    let a3 = toggle_averaged(params, 3)?;
    let tau = osc.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for i in 0..IDENTITY_STATES {
        let t = rng.gen_range(0.0..3.0 * tau);
        let mut state = || [rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5), rng.gen_range(0.0..2.0)];
        let (x, y, z) = (state(), state(), state());
        let lags: [&[f64]; 2] = [&y, &z];
        let at = format!("state {i}");
        samples.push((format!("{at}, order 1"), realness_defect(a1.field(), 0, t, &x, &lags)));
        for r in 0..2 {
            samples.push((format!("{at}, order 2 regime {r}"), realness_defect(a2.field(), r, t, &x, &lags)));
        }
        for r in 0..3 {
            samples.push((format!("{at}, order 3 regime {r}"), realness_defect(a3.field(), r, t, &x, &lags)));
        }
    }
    Ok(Check::worst("realness of averaged fields", REALNESS_LIMIT, samples))
}

/// The full suite on the toggle of `cfg` at its first frequency.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport, HarnessError> {
    cfg.validate()?;
    let params = cfg.params_at(cfg.omegas[0]);
    let osc = toggle_oscillatory(&params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerifyReport::default();
    for l in [1, 2, 4] {
        report.checks.push(segmentation_round_trip(&osc, l)?);
    }
    let lay = Layout { dim: osc.dim(), intervals: 3 };
    let xs: Vec<Vec<f64>> = (0..IDENTITY_STATES)
        .map(|_| random_toggle_state(&mut rng, lay, osc.tau()))
        .collect();
    report.checks.push(second_order_identity(&osc, 3, &xs)?);
    report.checks.push(closed_form_identity(&params, rng.gen())?);
    let lay2 = Layout { dim: osc.dim(), intervals: 2 };
    let ws: Vec<Vec<f64>> = (0..5).map(|_| random_toggle_state(&mut rng, lay2, osc.tau())).collect();
    report.checks.push(word_basis_check(&osc, &ws)?);
    report.checks.push(realness_check(&params, rng.gen())?);
    Ok(report)
}
