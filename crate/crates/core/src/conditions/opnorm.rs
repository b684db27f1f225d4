//! Lower bounds for operator norms on the variable exponent space.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ainfty::adversarial_subsets;
use super::families::{random_cubes, random_spec};
use super::{check_budget, full_norm, names, scan, ConditionReport, RunningBest, Witness};
use crate::error::{check_param, Error, Result};
use crate::grid::Grid;
use crate::maximal::{
    averaging_operator, hl_maximal, median_maximal, shifted_median_maximal, FamilyMember,
    WeightedFamily,
};
use crate::modular::{ExponentField, GridFunction};

/// Largest grid for which all indicators are enumerated.
const EXHAUSTIVE_CELLS: usize = 16;

/// Operator whose norm is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "kebab-case")]
pub enum OperatorTag {
    Maximal,
    Median {
        lambda: f64,
    },
    ShiftedMedian {
        tau: f64,
        r: f64,
    },
    /// `T_𝓕` over a disjoint family searched together with the function.
    AveragingUniform,
}

impl OperatorTag {
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::Maximal => "maximal",
            Self::Median { .. } => "median",
            Self::ShiftedMedian { .. } => "shifted-median",
            Self::AveragingUniform => "averaging",
        }
    }

    /// Condition name used in reports, e.g. `operator-norm/median`.
    pub fn condition_name(&self) -> String {
        format!("{}/{}", names::OPERATOR_NORM, self.short_name())
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        match *self {
            Self::Median { lambda } => BTreeMap::from([("lambda".into(), lambda)]),
            Self::ShiftedMedian { tau, r } => {
                BTreeMap::from([("tau".into(), tau), ("r".into(), r)])
            }
            _ => BTreeMap::new(),
        }
    }

    /// Recovers the tag from a report's condition name and parameters.
    pub fn from_report(report: &ConditionReport) -> Result<Self> {
        let get = |k: &str| {
            report
                .parameter(k)
                .ok_or_else(|| Error::Precondition(format!("report lacks parameter {k}")))
        };
        let short = report
            .condition
            .strip_prefix(names::OPERATOR_NORM)
            .and_then(|s| s.strip_prefix('/'))
            .unwrap_or("");
        match short {
            "maximal" => Ok(Self::Maximal),
            "median" => Ok(Self::Median { lambda: get("lambda")? }),
            "shifted-median" => Ok(Self::ShiftedMedian { tau: get("tau")?, r: get("r")? }),
            "averaging" => Ok(Self::AveragingUniform),
            _ => Err(Error::Precondition(format!("unknown operator in {}", report.condition))),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Median { lambda } => {
                check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")
            }
            Self::ShiftedMedian { tau, r } => {
                check_param("tau", tau, tau > 0.0 && tau < 1.0, "(0, 1)")?;
                check_param("r", r, r > 0.0 && r < 1.0, "(0, 1)")
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, f: &GridFunction, family: Option<&WeightedFamily>) -> Result<GridFunction> {
        match *self {
            Self::Maximal => Ok(hl_maximal(f)),
            Self::Median { lambda } => median_maximal(f, lambda),
            Self::ShiftedMedian { tau, r } => shifted_median_maximal(f, tau, r),
            Self::AveragingUniform => {
                let family =
                    family.ok_or_else(|| Error::Precondition("averaging needs a family".into()))?;
                averaging_operator(f, family)
            }
        }
    }
}

/// Which test functions the estimator draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFamily {
    /// Indicators, step functions, family sums and random values.
    All,
    /// Indicators of cell sets only.
    Indicators,
}

/// `‖Tf‖ / ‖f‖`.
pub(crate) fn ratio(
    tag: &OperatorTag,
    p: &ExponentField,
    f: &GridFunction,
    family: Option<&WeightedFamily>,
) -> Result<f64> {
    if f.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let den = full_norm(p, f.values());
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(full_norm(p, tag.apply(f, family)?.values()) / den)
}

type Candidate = (Vec<f64>, Option<WeightedFamily>);

fn random_indicator(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let density: f64 = rng.gen_range(0.05..=1.0);
    let mut v: Vec<f64> =
        (0..grid.cell_count()).map(|_| f64::from(u8::from(rng.gen_bool(density)))).collect();
    if v.iter().all(|&x| x == 0.0) {
        let c = rng.gen_range(0..v.len());
        v[c] = 1.0;
    }
    v
}

fn random_function(grid: &Grid, p: &ExponentField, lambda: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match rng.gen_range(0..4) {
        0 => random_indicator(grid, rng),
        1 => {
            let mut v = vec![0.0; grid.cell_count()];
            for q in random_cubes(grid, rng) {
                let t = rng.gen_range(-6.0..=6.0f64).exp2();
                for c in grid.cells_of(&q) {
                    v[c] = t;
                }
            }
            v
        }
        2 => {
            let spec = random_spec(grid, rng);
            let members = spec
                .cubes
                .iter()
                .zip(spec.resolve(p))
                .map(|(q, t)| FamilyMember::new(q.clone(), t))
                .collect();
            WeightedFamily::new(grid, members)
                .and_then(|fam| adversarial_subsets(p, lambda, &fam))
                .and_then(|fam| fam.subset_sum())
                .map(GridFunction::into_values)
                .unwrap_or_else(|_| random_indicator(grid, rng))
        }
        _ => (0..grid.cell_count()).map(|_| rng.gen_range(-6.0..=6.0f64).exp2()).collect(),
    }
}

/// Seeded lower bound for the norm of `tag` on the space with exponent `p`.
///
/// The box indicator comes first, then every indicator when the grid has at
/// most 16 cells and the budget covers twice their number, then random test
/// functions. For the averaging operator each candidate carries its own
/// random disjoint family. The last quarter of the budget goes to coordinate
/// ascent on the best candidate.
pub fn operator_norm_estimate(
    tag: OperatorTag,
    p: &ExponentField,
    tests: TestFamily,
    budget: u64,
    seed: u64,
) -> Result<ConditionReport> {
    tag.validate()?;
    check_budget(budget)?;
    let start = Instant::now();
    let grid = p.grid().clone();
    let n = grid.cell_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = match tag {
        OperatorTag::Median { lambda } => lambda,
        OperatorTag::ShiftedMedian { tau, .. } => tau,
        _ => 0.5,
    };
    let exhaustive = n <= EXHAUSTIVE_CELLS && (1u64 << n) <= budget / 2;
    let mut next_mask: u64 = 1;
    let mut first = true;
    let mut draw = || -> Candidate {
        let values = if first {
            first = false;
            vec![1.0; n]
        } else if exhaustive && next_mask < (1u64 << n) {
            let m = next_mask;
            next_mask += 1;
            (0..n).map(|c| f64::from(u8::from(m >> c & 1 == 1))).collect()
        } else {
            match tests {
                TestFamily::Indicators => random_indicator(&grid, &mut rng),
                TestFamily::All => random_function(&grid, p, lambda, &mut rng),
            }
        };
        let family = (tag == OperatorTag::AveragingUniform).then(|| {
            WeightedFamily::from_cubes(&grid, random_cubes(&grid, &mut rng))
                .expect("generated cubes are disjoint")
        });
        (values, family)
    };

    let eval = |(values, family): &Candidate| {
        let f = GridFunction::new(p.grid(), values.clone()).ok()?;
        let r = ratio(&tag, p, &f, family.as_ref()).ok()?;
        Some((r, (values.clone(), family.clone())))
    };
    let ascent = budget / 4;
    let mut best = RunningBest::new();
    let mut evaluations = scan(budget - ascent, &mut draw, eval, &mut best);

    if let Some((mut v, family)) = best.witness.take() {
        let mut score = best.ratio;
        let mut improved = true;
        'outer: while improved {
            improved = false;
            for c in 0..n {
                let moves: &[f64] = match tests {
                    TestFamily::Indicators => &[-1.0],
                    TestFamily::All => &[0.0, 0.5, 2.0],
                };
                for &factor in moves {
                    if evaluations >= budget {
                        break 'outer;
                    }
                    let old = v[c];
                    v[c] = if factor < 0.0 {
                        1.0 - old
                    } else if old == 0.0 && factor != 0.0 {
                        factor
                    } else {
                        old * factor
                    };
                    evaluations += 1;
                    let f = GridFunction::new(&grid, v.clone())?;
                    match ratio(&tag, p, &f, family.as_ref()) {
                        Ok(r) if r > score => {
                            score = r;
                            improved = true;
                        }
                        _ => v[c] = old,
                    }
                }
            }
        }
        best.ratio = score;
        best.witness = Some((v, family));
    }

    let witness =
        best.witness.map_or(Witness::None, |(values, family)| Witness::Function { values, family });
    Ok(ConditionReport {
        condition: tag.condition_name(),
        parameters: tag.parameters(),
        seed,
        budget,
        best_ratio: best.ratio.max(0.0),
        witness,
        evaluations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
