//! Reverse Hölder functional, the `b(Q)` construction and the pointwise
//! checks built on them.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::families::FamilyStream;
use super::{
    check_budget, full_norm, indicator_norm, names, scan, ConditionReport, ConstantChain31,
    RunningBest, Witness,
};
use crate::ceil_count;
use crate::error::{check_param, Error, Result};
use crate::grid::{CellMask, Cube};
use crate::maximal::{rearrangement_value, FamilyMember, WeightedFamily};
use crate::modular::ExponentField;

/// Both sides of the reverse Hölder implication for one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhValues {
    /// `Σ_Q ∫_Q t_Q^{p}`.
    pub input: f64,
    /// `Σ_Q |Q| ⟨t_Q^{r p}⟩_Q^{1/r}`.
    pub output: f64,
}

pub fn rh_functional(p: &ExponentField, r: f64, family: &WeightedFamily) -> Result<RhValues> {
    check_param("r", r, r > 1.0, "(1, inf)")?;
    if family.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = p.grid();
    let h = grid.cell_measure();
    let mut input = 0.0;
    let mut output = 0.0;
    for m in family.members() {
        let cells = grid.cells_of(&m.cube);
        let mut plain = 0.0;
        let mut raised = 0.0;
        for &c in &cells {
            let e = p.values()[c];
            plain += m.weight.powf(e);
            raised += m.weight.powf(r * e);
        }
        input += plain * h;
        output += cells.len() as f64 * h * (raised / cells.len() as f64).powf(1.0 / r);
    }
    Ok(RhValues { input, output })
}

/// Seeded lower bound for the reverse Hölder constant at exponent `r`.
/// Each candidate family is rescaled to `‖Σ t_Q χ_Q‖ = 1`, so its input is
/// at most one, and the largest output is reported.
pub fn rh_search(p: &ExponentField, r: f64, budget: u64, seed: u64) -> Result<ConditionReport> {
    check_param("r", r, r > 1.0, "(1, inf)")?;
    check_budget(budget)?;
    let start = Instant::now();
    let grid = p.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = FamilyStream::new(grid);
    let mut best = RunningBest::new();
    let evaluations = scan(
        budget,
        || stream.draw(&mut rng),
        |spec| {
            let weights = spec.resolve(p);
            let mut v = vec![0.0; grid.cell_count()];
            for (q, &t) in spec.cubes.iter().zip(&weights) {
                for c in grid.cells_of(q) {
                    v[c] = t;
                }
            }
            let norm = full_norm(p, &v);
            if norm == 0.0 {
                return None;
            }
            let members = spec
                .cubes
                .iter()
                .zip(weights)
                .map(|(q, t)| FamilyMember::new(q.clone(), t / norm))
                .collect();
            let family = WeightedFamily::new(grid, members).ok()?;
            let values = rh_functional(p, r, &family).ok()?;
            (values.input <= 1.0 + 1e-9).then_some((values.output, family))
        },
        &mut best,
    );
    Ok(ConditionReport {
        condition: names::RH.into(),
        parameters: BTreeMap::from([("r".to_string(), r)]),
        seed,
        budget,
        best_ratio: best.ratio.max(0.0),
        witness: best.witness.map_or(Witness::None, |family| Witness::Family { family }),
        evaluations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Result of the `b(Q)` construction on one cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BFunction {
    /// `2^{1 + p_+/p_-} C` with the global `p_±`.
    pub k: f64,
    /// `1/‖χ_Q‖`, the largest `t` with `∫_Q t^p <= 1`.
    pub t_max: f64,
    /// Supremum of the `t <= t_max` where the reverse inequality is strict;
    /// `None` when there is no such `t`.
    pub t_q: Option<f64>,
    /// `|Q| ⟨t_Q^{rp}⟩_Q^{1/r}`, or 0.
    pub b: f64,
    /// The strict inequality still holds at `t_max`, so `t_Q = t_max` and
    /// the defining equality need not hold.
    pub at_boundary: bool,
}

/// Samples per halving of `t` in the sign scan.
const SCAN_STEPS_PER_OCTAVE: i32 = 16;
/// Number of octaves below `t_max` covered by the sign scan.
const SCAN_OCTAVES: i32 = 64;

/// Log-domain evaluator of `g(t) = |Q|⟨t^{rp}⟩^{1/r} - k ∫_Q t^p` on a cube.
pub(crate) struct GapFunction {
    exps: Vec<f64>,
    r: f64,
    k: f64,
    h: f64,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl GapFunction {
    pub fn new(p: &ExponentField, cube: &Cube, r: f64, k: f64) -> Self {
        let grid = p.grid();
        let exps = grid.cells_of(cube).into_iter().map(|c| p.values()[c]).collect();
        Self { exps, r, k, h: grid.cell_measure() }
    }

    /// `(ln LHS, ln RHS)` at `t`.
    pub fn log_sides(&self, t: f64) -> (f64, f64) {
        let lt = t.ln();
        let n = self.exps.len() as f64;
        let lhs = (n * self.h).ln()
            + (log_sum_exp(self.exps.iter().map(|e| self.r * e * lt)) - n.ln()) / self.r;
        let rhs = self.k.ln() + self.h.ln() + log_sum_exp(self.exps.iter().map(|e| e * lt));
        (lhs, rhs)
    }

    /// `ln LHS - ln RHS`, which has the sign of `g(t)`.
    pub fn log_gap(&self, t: f64) -> f64 {
        let (a, b) = self.log_sides(t);
        a - b
    }

    /// `g(t)` itself.
    #[cfg(test)]
    pub fn gap(&self, t: f64) -> f64 {
        let (a, b) = self.log_sides(t);
        a.exp() - b.exp()
    }
}

/// The `b(Q)` construction with reverse Hölder constants `(r, C)`.
///
/// `t_Q` is located by scanning `t_max · 2^{-j/16}` downwards for the first
/// strict sample, then bisecting the bracketing sign change in `ln t`.
pub fn b_function(p: &ExponentField, cube: &Cube, r: f64, c: f64) -> Result<BFunction> {
    check_param("r", r, r > 1.0, "(1, inf)")?;
    check_param("C", c, c > 0.0, "(0, inf)")?;
    let grid = p.grid();
    grid.check_cube(cube)?;
    let k = (1.0 + p.p_plus() / p.p_minus()).exp2() * c;
    let t_max = 1.0 / indicator_norm(p, &grid.cells_of(cube));
    let g = GapFunction::new(p, cube, r, k);
    let b_at = |t: f64| g.log_sides(t).0.exp();
    if g.log_gap(t_max) > 0.0 {
        return Ok(BFunction { k, t_max, t_q: Some(t_max), b: b_at(t_max), at_boundary: true });
    }
    let sample = |j: i32| t_max * (-(j as f64) / SCAN_STEPS_PER_OCTAVE as f64).exp2();
    let hit = (1..=SCAN_STEPS_PER_OCTAVE * SCAN_OCTAVES).find(|&j| g.log_gap(sample(j)) > 0.0);
    let Some(j) = hit else {
        return Ok(BFunction { k, t_max, t_q: None, b: 0.0, at_boundary: false });
    };
    // g > 0 at lo, g <= 0 at hi.
    let (mut lo, mut hi) = (sample(j).ln(), sample(j - 1).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g.log_gap(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_q = lo.exp();
    Ok(BFunction { k, t_max, t_q: Some(t_q), b: b_at(t_q), at_boundary: false })
}

/// Both sides of the single-cube reverse Hölder estimate at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma34Report {
    /// `⟨t^{γp}⟩_Q^{1/γ}`.
    pub lhs: f64,
    /// `C ⟨t^p⟩_Q`.
    pub rhs: f64,
    pub holds: bool,
    /// `(p χ_Q)^*(λ|Q|)`.
    pub p_lambda: f64,
    /// Admissible range of `t`.
    pub window: (f64, f64),
}

pub fn lemma34_check(
    p: &ExponentField,
    cube: &Cube,
    gamma: f64,
    epsilon: f64,
    c: f64,
    t: f64,
    lambda: f64,
) -> Result<Lemma34Report> {
    check_param("gamma", gamma, gamma > 1.0, "(1, inf)")?;
    check_param("epsilon", epsilon, epsilon > 0.0, "(0, inf)")?;
    check_param("C", c, c > 0.0, "(0, inf)")?;
    check_param("t", t, t > 0.0, "(0, inf)")?;
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    let grid = p.grid();
    grid.check_cube(cube)?;
    let cells = grid.cells_of(cube);
    let edge = indicator_norm(p, &cells).powf(-(1.0 + epsilon));
    let window = (edge.min(1.0), edge.max(1.0));
    let slack = 1e-12 * window.1;
    if t < window.0 - slack || t > window.1 + slack {
        return Err(Error::Precondition(format!("t = {t} outside [{}, {}]", window.0, window.1)));
    }
    let n = cells.len() as f64;
    let mut plain = 0.0;
    let mut raised = 0.0;
    for &x in &cells {
        let e = p.values()[x];
        plain += t.powf(e);
        raised += t.powf(gamma * e);
    }
    let lhs = (raised / n).powf(1.0 / gamma);
    let rhs = c * plain / n;
    let p_lambda =
        rearrangement_value(&p.as_function(), cube, lambda * grid.cube_measure(cube))?.value;
    Ok(Lemma34Report { lhs, rhs, holds: lhs <= rhs, p_lambda, window })
}

/// Both sides of `∫_Q t^p <= 2(∫_E t^p + t^δ b(Q) χ_{(0,1)}(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem31Report {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn theorem31_verify(
    p: &ExponentField,
    cube: &Cube,
    subset: &CellMask,
    t: f64,
    chain: &ConstantChain31,
    b: f64,
) -> Result<Theorem31Report> {
    let grid = p.grid();
    if subset.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check_cube(cube)?;
    check_param("b", b, b >= 0.0, "[0, inf)")?;
    let cube_mask = CellMask::from_cube(grid, cube)?;
    if !subset.is_subset_of(&cube_mask) {
        return Err(Error::Precondition("E is not contained in Q".into()));
    }
    let cells = cube_mask.cells();
    let needed = ceil_count(chain.eta, cells.len());
    if subset.count() < needed {
        return Err(Error::Precondition(format!(
            "|E| = {} cells, need at least {needed}",
            subset.count()
        )));
    }
    let t_max = 1.0 / indicator_norm(p, &cells);
    check_param("t", t, t > 0.0 && t <= t_max * (1.0 + 1e-12), "(0, 1/|chi_Q|]")?;
    let h = grid.cell_measure();
    let integral = |cs: &[usize]| cs.iter().map(|&c| t.powf(p.values()[c])).sum::<f64>() * h;
    let lhs = integral(&cells);
    let tail = if t < 1.0 { t.powf(chain.delta) * b } else { 0.0 };
    let rhs = 2.0 * (integral(&subset.cells()) + tail);
    Ok(Theorem31Report { lhs, rhs, holds: lhs <= rhs })
}
