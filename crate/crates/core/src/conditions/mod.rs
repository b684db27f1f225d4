//! Condition checkers, constant chains and seeded lower-bound searches.
//!
//! Every search here is a lower-bound estimator: it evaluates a deterministic
//! (seeded) sequence of candidates, keeps the largest ratio, and returns it
//! with a witness from which the ratio can be recomputed. Nothing in this
//! module claims a condition holds.

mod ainfty;
mod apvar;
mod chains;
mod families;
mod opnorm;
mod rh;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ainfty::{adversarial_subsets, ainfty_ratio, ainfty_search};
pub use apvar::{apvar_ratio, apvar_search};
pub use chains::{chain31, chain45, default_gamma, ConstantChain31, ConstantChain45};
pub use opnorm::{operator_norm_estimate, OperatorTag, TestFamily};
pub use rh::{
    b_function, lemma34_check, rh_functional, rh_search, theorem31_verify, BFunction,
    Lemma34Report, RhValues, Theorem31Report,
};

use crate::error::{Error, Result};
use crate::grid::Cube;
use crate::maximal::WeightedFamily;
use crate::modular::{norm_of_values, ExponentField, GridFunction};
use crate::DEFAULT_TOL;

/// Condition names used in reports.
pub mod names {
    pub const AINFTY: &str = "ainfty";
    pub const APVAR: &str = "apvar";
    pub const RH: &str = "rh";
    pub const OPERATOR_NORM: &str = "operator-norm";
}

/// Evidence attached to a reported ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    None,
    /// A cube and the test function's values on its cells, in
    /// [`crate::Grid::cells_of`] order.
    CubeFunction {
        cube: Cube,
        values: Vec<f64>,
    },
    Family {
        family: WeightedFamily,
    },
    /// A test function on the whole grid, plus the family for averaging
    /// operators.
    Function {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<WeightedFamily>,
    },
}

/// Outcome of one seeded search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub parameters: BTreeMap<String, f64>,
    pub seed: u64,
    pub budget: u64,
    /// Largest ratio found: a lower bound for the best constant.
    pub best_ratio: f64,
    pub witness: Witness,
    pub evaluations: u64,
    pub wall_time_secs: f64,
}

impl ConditionReport {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    /// Recomputes the ratio from the witness alone.
    pub fn reevaluate(&self, p: &ExponentField) -> Result<f64> {
        let missing = |name: &str| Error::Precondition(format!("report lacks parameter {name}"));
        match (self.condition.as_str(), &self.witness) {
            (names::AINFTY, Witness::Family { family }) => {
                let lambda = self.parameter("lambda").ok_or_else(|| missing("lambda"))?;
                ainfty_ratio(p, lambda, family)
            }
            (names::RH, Witness::Family { family }) => {
                let r = self.parameter("r").ok_or_else(|| missing("r"))?;
                Ok(rh_functional(p, r, family)?.output)
            }
            (names::APVAR, Witness::CubeFunction { cube, values }) => {
                let grid = p.grid();
                let mut f = vec![0.0; grid.cell_count()];
                for (c, v) in grid.cells_of(cube).into_iter().zip(values) {
                    f[c] = *v;
                }
                apvar_ratio(p, cube, &GridFunction::new(grid, f)?)
            }
            (c, Witness::Function { values, family }) if c.starts_with(names::OPERATOR_NORM) => {
                let tag = OperatorTag::from_report(self)?;
                let f = GridFunction::new(p.grid(), values.clone())?;
                opnorm::ratio(&tag, p, &f, family.as_ref())
            }
            (_, Witness::None) => Ok(self.best_ratio),
            _ => Err(Error::Precondition(format!(
                "witness kind does not match condition {}",
                self.condition
            ))),
        }
    }
}

/// `‖χ_{cells}‖` on the grid of `p`.
pub(crate) fn indicator_norm(p: &ExponentField, cells: &[usize]) -> f64 {
    let grid = p.grid();
    let mut f = vec![0.0; grid.cell_count()];
    for &c in cells {
        f[c] = 1.0;
    }
    full_norm(p, &f)
}

/// Luxemburg norm over the whole grid of raw values.
pub(crate) fn full_norm(p: &ExponentField, f: &[f64]) -> f64 {
    let region = vec![true; f.len()];
    norm_of_values(f, p.values(), &region, p.grid().cell_measure(), DEFAULT_TOL)
}

/// Evaluates candidates in parallel and returns the best `(index, ratio,
/// payload)`. Ties go to the lowest index, so the result matches a
/// sequential scan.
pub(crate) fn best_candidate<C, W, F>(candidates: &[C], eval: F) -> Option<(usize, f64, W)>
where
    C: Sync,
    W: Send,
    F: Fn(&C) -> Option<(f64, W)> + Sync,
{
    candidates
        .par_iter()
        .enumerate()
        .filter_map(|(i, c)| eval(c).filter(|(r, _)| r.is_finite()).map(|(r, w)| (i, r, w)))
        .reduce_with(|a, b| if prefer(&b, &a) { b } else { a })
}

fn prefer<W>(a: &(usize, f64, W), b: &(usize, f64, W)) -> bool {
    a.1 > b.1 || (a.1 == b.1 && a.0 < b.0)
}

/// Running maximum over candidate chunks; ties keep the earliest.
pub(crate) struct RunningBest<W> {
    pub ratio: f64,
    pub witness: Option<W>,
}

impl<W> RunningBest<W> {
    pub fn new() -> Self {
        Self { ratio: f64::NEG_INFINITY, witness: None }
    }

    pub fn offer(&mut self, ratio: f64, witness: W) -> bool {
        if ratio > self.ratio {
            self.ratio = ratio;
            self.witness = Some(witness);
            true
        } else {
            false
        }
    }
}

/// Candidates evaluated per parallel batch.
const CHUNK: u64 = 256;

/// Draws `count` candidates in order and evaluates them batch by batch,
/// offering each batch's best to `best`. Returns the number of evaluations.
pub(crate) fn scan<C, W>(
    count: u64,
    mut draw: impl FnMut() -> C,
    eval: impl Fn(&C) -> Option<(f64, W)> + Sync,
    best: &mut RunningBest<W>,
) -> u64
where
    C: Sync,
    W: Send,
{
    let mut done = 0;
    while done < count {
        let n = CHUNK.min(count - done);
        let batch: Vec<C> = (0..n).map(|_| draw()).collect();
        if let Some((_, ratio, w)) = best_candidate(&batch, &eval) {
            best.offer(ratio, w);
        }
        done += n;
    }
    done
}

pub(crate) fn check_budget(budget: u64) -> Result<()> {
    if budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    Ok(())
}
