//! The single-cube testing condition `⟨|f|⟩_Q ‖χ_Q‖ <= C ‖f χ_Q‖`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_budget, names, scan, ConditionReport, RunningBest, Witness};
use crate::error::{Error, Result};
use crate::grid::Cube;
use crate::modular::{norm_of_values, ExponentField, GridFunction};
use crate::DEFAULT_TOL;

/// Thresholds of `p` tried per cube for level-set indicators.
const MAX_LEVELS: usize = 16;
/// Largest power used in the dual profiles `s^{1/(p-1)}`.
const MAX_PROFILE_POWER: f64 = 64.0;

/// `⟨|f|⟩_Q ‖χ_Q‖ / ‖f χ_Q‖`.
pub fn apvar_ratio(p: &ExponentField, cube: &Cube, f: &GridFunction) -> Result<f64> {
    let grid = p.grid();
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check_cube(cube)?;
    let local = Local::new(p, cube);
    let values: Vec<f64> = local.cells.iter().map(|&c| f.values()[c]).collect();
    local.ratio(&values).ok_or(Error::ZeroDenominator)
}

/// Exponent values and `‖χ_Q‖` of one cube, in `cells_of` order.
struct Local {
    cube: Cube,
    cells: Vec<usize>,
    exps: Vec<f64>,
    region: Vec<bool>,
    measure: f64,
    chi_norm: f64,
}

impl Local {
    fn new(p: &ExponentField, cube: &Cube) -> Self {
        let grid = p.grid();
        let cells = grid.cells_of(cube);
        let exps: Vec<f64> = cells.iter().map(|&c| p.values()[c]).collect();
        let region = vec![true; cells.len()];
        let measure = grid.cell_measure();
        let ones = vec![1.0; cells.len()];
        let chi_norm = norm_of_values(&ones, &exps, &region, measure, DEFAULT_TOL);
        Self { cube: cube.clone(), cells, exps, region, measure, chi_norm }
    }

    fn ratio(&self, values: &[f64]) -> Option<f64> {
        let den = norm_of_values(values, &self.exps, &self.region, self.measure, DEFAULT_TOL);
        if den == 0.0 {
            return None;
        }
        let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        Some(mean * self.chi_norm / den)
    }

    /// Indicators of `{p <= v}` and `{p >= v}` for up to [`MAX_LEVELS`]
    /// distinct values `v`, then the dual profiles.
    fn sweep(&self) -> Vec<Vec<f64>> {
        let mut levels = self.exps.clone();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() > MAX_LEVELS {
            let n = levels.len();
            levels = (0..MAX_LEVELS).map(|i| levels[i * (n - 1) / (MAX_LEVELS - 1)]).collect();
        }
        let mut out = vec![vec![1.0; self.exps.len()]];
        for &v in &levels {
            out.push(self.exps.iter().map(|&e| f64::from(u8::from(e <= v))).collect());
            out.push(self.exps.iter().map(|&e| f64::from(u8::from(e >= v))).collect());
        }
        for k in -6..=6 {
            let s = f64::from(k).exp2();
            out.push(
                self.exps
                    .iter()
                    .map(|&e| {
                        let power = if e > 1.0 {
                            (1.0 / (e - 1.0)).min(MAX_PROFILE_POWER)
                        } else {
                            MAX_PROFILE_POWER
                        };
                        s.powf(power)
                    })
                    .collect(),
            );
        }
        out
    }
}

/// Seeded lower bound for the single-cube testing constant.
///
/// Candidates are, in order: level-set indicators and dual profiles on every
/// cube (largest cubes first), then random masks with indicator or
/// log-uniform values on random cubes. The last quarter of the budget goes
/// to coordinate ascent on the best candidate.
pub fn apvar_search(p: &ExponentField, budget: u64, seed: u64) -> Result<ConditionReport> {
    check_budget(budget)?;
    let start = Instant::now();
    let grid = p.grid();
    let mut cubes = grid.all_cubes();
    cubes.sort_by(|a, b| b.side.cmp(&a.side).then_with(|| a.anchor.cmp(&b.anchor)));
    let locals: Vec<Local> = cubes.iter().map(|q| Local::new(p, q)).collect();

    let mut sweep =
        locals.iter().enumerate().flat_map(|(i, l)| l.sweep().into_iter().map(move |v| (i, v)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        sweep.next().unwrap_or_else(|| {
            let i = rng.gen_range(0..locals.len());
            let n = locals[i].cells.len();
            let density: f64 = rng.gen_range(0.05..=1.0);
            let weighted = rng.gen_bool(0.5);
            let mut v: Vec<f64> = (0..n)
                .map(|_| {
                    if !rng.gen_bool(density) {
                        0.0
                    } else if weighted {
                        rng.gen_range(-4.0..=4.0f64).exp2()
                    } else {
                        1.0
                    }
                })
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                v[rng.gen_range(0..n)] = 1.0;
            }
            (i, v)
        })
    };

    let ascent = budget / 4;
    let mut best = RunningBest::new();
    let mut evaluations = scan(
        budget - ascent,
        &mut draw,
        |(i, v): &(usize, Vec<f64>)| locals[*i].ratio(v).map(|r| (r, (*i, v.clone()))),
        &mut best,
    );

    if let Some((i, mut v)) = best.witness.take() {
        let local = &locals[i];
        let mut ratio = best.ratio;
        let mut improved = true;
        'outer: while improved {
            improved = false;
            for c in 0..v.len() {
                for factor in [0.0, 0.5, 2.0] {
                    if evaluations >= budget {
                        break 'outer;
                    }
                    let old = v[c];
                    v[c] = if old == 0.0 && factor != 0.0 { factor } else { old * factor };
                    evaluations += 1;
                    match local.ratio(&v) {
                        Some(r) if r > ratio => {
                            ratio = r;
                            improved = true;
                        }
                        _ => v[c] = old,
                    }
                }
            }
        }
        best.ratio = ratio;
        best.witness = Some((i, v));
    }

    let witness = best.witness.map_or(Witness::None, |(i, values)| Witness::CubeFunction {
        cube: locals[i].cube.clone(),
        values,
    });
    Ok(ConditionReport {
        condition: names::APVAR.into(),
        parameters: BTreeMap::new(),
        seed,
        budget,
        best_ratio: best.ratio.max(0.0),
        witness,
        evaluations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
