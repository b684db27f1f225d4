//! Rearrangements and the maximal-type operators on grids.
//!
//! `M`, `m_λ` and `m_{τ,r}` share one evaluation scheme. For a fixed side
//! `s`, the cubes whose (core) cells contain a given cell have anchors in a
//! window that slides with the cell, so the supremum over them is a sliding
//! window maximum over the table of per-cube values. Each side is swept
//! independently and the per-side results are merged by maximum, which is
//! exact and order independent.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::grid::{core_offsets, Cube, Grid, SummedArea};
use crate::modular::GridFunction;
use crate::{ceil_count, floor_count};

/// A member of a family of pairwise disjoint cubes: the cube, its weight
/// `t_Q >= 0` and an optional subset `E_Q ⊂ Q` (sorted cell indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub cube: Cube,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
}

impl FamilyMember {
    pub fn new(cube: Cube, weight: f64) -> Self {
        Self { cube, weight, subset: None }
    }

    pub fn with_subset(cube: Cube, weight: f64, subset: Vec<usize>) -> Self {
        Self { cube, weight, subset: Some(subset) }
    }
}

/// Pairwise disjoint weighted cubes with optional subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRecord")]
pub struct WeightedFamily {
    grid: Grid,
    members: Vec<FamilyMember>,
}

#[derive(Deserialize)]
struct FamilyRecord {
    grid: Grid,
    members: Vec<FamilyMember>,
}

impl TryFrom<FamilyRecord> for WeightedFamily {
    type Error = Error;
    fn try_from(r: FamilyRecord) -> Result<Self> {
        WeightedFamily::new(&r.grid, r.members)
    }
}

impl WeightedFamily {
    pub fn new(grid: &Grid, mut members: Vec<FamilyMember>) -> Result<Self> {
        let mut owner = vec![usize::MAX; grid.cell_count()];
        for (i, m) in members.iter_mut().enumerate() {
            grid.check_cube(&m.cube)?;
            check_param("t_Q", m.weight, m.weight >= 0.0, "[0, inf)")?;
            for c in grid.cells_of(&m.cube) {
                if owner[c] != usize::MAX {
                    return Err(Error::Overlap(owner[c], i));
                }
                owner[c] = i;
            }
            if let Some(subset) = m.subset.as_mut() {
                subset.sort_unstable();
                subset.dedup();
                let inside = subset
                    .iter()
                    .all(|&c| c < grid.cell_count() && m.cube.contains_coords(grid.coords(c)));
                if !inside {
                    return Err(Error::SubsetOutsideCube(i));
                }
            }
        }
        Ok(Self { grid: grid.clone(), members })
    }

    /// Unit weights, no subsets.
    pub fn from_cubes(grid: &Grid, cubes: Vec<Cube>) -> Result<Self> {
        Self::new(grid, cubes.into_iter().map(|q| FamilyMember::new(q, 1.0)).collect())
    }

    pub fn empty(grid: &Grid) -> Self {
        Self { grid: grid.clone(), members: Vec::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `Σ t_Q χ_Q`.
    pub fn indicator_sum(&self) -> GridFunction {
        let mut v = vec![0.0; self.grid.cell_count()];
        for m in &self.members {
            for c in self.grid.cells_of(&m.cube) {
                v[c] = m.weight;
            }
        }
        GridFunction::new(&self.grid, v).expect("finite weights")
    }

    /// `Σ t_Q χ_{E_Q}`; every member needs a subset.
    pub fn subset_sum(&self) -> Result<GridFunction> {
        let mut v = vec![0.0; self.grid.cell_count()];
        for (i, m) in self.members.iter().enumerate() {
            let subset = m.subset.as_ref().ok_or(Error::MissingSubset(i))?;
            for &c in subset {
                v[c] = m.weight;
            }
        }
        GridFunction::new(&self.grid, v)
    }

    /// Checks `|E_Q| >= λ|Q|` for every member.
    pub fn check_subset_fraction(&self, lambda: f64) -> Result<()> {
        for (i, m) in self.members.iter().enumerate() {
            let subset = m.subset.as_ref().ok_or(Error::MissingSubset(i))?;
            let n = m.cube.cell_count();
            if subset.len() < ceil_count(lambda, n) {
                return Err(Error::SubsetTooSmall { index: i, subset: subset.len(), cube: n });
            }
        }
        Ok(())
    }
}

/// Value of a rearrangement, flagged when `t >= |Q|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rearranged {
    pub value: f64,
    /// `t` reached `|Q|`; the value is 0 by convention.
    pub beyond_measure: bool,
}

/// `(f χ_Q)^*(t) = inf{α >= 0 : |{x ∈ Q : |f(x)| > α}| <= t}`.
///
/// On the grid this is the `(⌊t / h^dim⌋ + 1)`-th largest of the `|f|` values
/// on `Q`.
pub fn rearrangement_value(f: &GridFunction, cube: &Cube, t: f64) -> Result<Rearranged> {
    let grid = f.grid();
    grid.check_cube(cube)?;
    check_param("t", t, t >= 0.0, "[0, |Q|)")?;
    let n = cube.cell_count();
    let k = floor_count(t / grid.cell_measure(), 1);
    if k >= n {
        return Ok(Rearranged { value: 0.0, beyond_measure: true });
    }
    let mut buf: Vec<f64> = grid.cells_of(cube).iter().map(|&c| f.values()[c].abs()).collect();
    Ok(Rearranged { value: kth_largest(&mut buf, k), beyond_measure: false })
}

/// `k`-th largest entry (0-based); 0 when `k` is past the end.
fn kth_largest(buf: &mut [f64], k: usize) -> f64 {
    if k >= buf.len() {
        return 0.0;
    }
    let (_, v, _) = buf.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    *v
}

/// `(f χ_Q)^*(fraction |Q|)` from cell counts.
pub(crate) fn rank_value(f: &[f64], grid: &Grid, cube: &Cube, fraction: f64) -> f64 {
    let k = floor_count(fraction, cube.cell_count());
    let mut buf: Vec<f64> = grid.cells_of(cube).iter().map(|&c| f[c].abs()).collect();
    kth_largest(&mut buf, k)
}

/// Hardy–Littlewood maximal function `Mf(x) = sup_{Q ∋ x} ⟨|f|⟩_Q` over all
/// grid-aligned cubes in the box.
pub fn hl_maximal(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let sat = SummedArea::new(grid, &abs);
    let out = sweep_sup(grid, |q| sat.mean(q), |s| (0, s - 1));
    GridFunction::new(grid, out).expect("finite")
}

/// λ-median maximal function `m_λ f(x) = sup_{Q ∋ x} (f χ_Q)^*(λ|Q|)`.
pub fn median_maximal(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    let grid = f.grid();
    let v = f.values();
    let out = sweep_sup(grid, |q| rank_value(v, grid, q, lambda), |s| (0, s - 1));
    GridFunction::new(grid, out)
}

/// `m_{τ,r} f(x) = sup_{rQ ∋ x} (f χ_Q)^*(τ|Q|)`, with `rQ` realized by
/// [`Grid::core_cells`].
pub fn shifted_median_maximal(f: &GridFunction, tau: f64, r: f64) -> Result<GridFunction> {
    check_param("tau", tau, tau > 0.0 && tau < 1.0, "(0, 1)")?;
    check_param("r", r, r > 0.0 && r < 1.0, "(0, 1)")?;
    let grid = f.grid();
    let v = f.values();
    let out = sweep_sup(grid, |q| rank_value(v, grid, q, tau), |s| core_offsets(s, r));
    GridFunction::new(grid, out)
}

/// Per cell, the maximum of `cube_value(Q)` over cubes `Q` whose cells at
/// per-axis offsets `offsets(side)` (inclusive range) include the cell.
fn sweep_sup<V, O>(grid: &Grid, cube_value: V, offsets: O) -> Vec<f64>
where
    V: Fn(&Cube) -> f64 + Sync,
    O: Fn(usize) -> (usize, usize) + Sync,
{
    let n = grid.cell_count();
    let sides: Vec<usize> = (1..=grid.max_side()).collect();
    let out = sides.par_iter().map(|&s| side_sup(grid, s, &cube_value, offsets(s))).reduce(
        || vec![f64::NEG_INFINITY; n],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.max(y);
            }
            a
        },
    );
    // Side-1 cubes reach every cell, so nothing stays at -inf.
    debug_assert!(out.iter().all(|v| v.is_finite()));
    out
}

fn side_sup<V>(grid: &Grid, side: usize, cube_value: &V, (lo, hi): (usize, usize)) -> Vec<f64>
where
    V: Fn(&Cube) -> f64,
{
    let n = grid.cell_count();
    if lo > hi {
        return vec![f64::NEG_INFINITY; n];
    }
    let mut values = Vec::new();
    grid.for_each_anchor(side, |a| values.push(cube_value(&Cube::new(a.to_vec(), side))));
    match grid.extent()[..] {
        [n0] => sliding_max(&values, n0, lo, hi),
        [n0, n1] => {
            let (rows, cols) = (n0 - side + 1, n1 - side + 1);
            let mut partial = vec![0.0; rows * n1];
            for a0 in 0..rows {
                let row = sliding_max(&values[a0 * cols..(a0 + 1) * cols], n1, lo, hi);
                partial[a0 * n1..(a0 + 1) * n1].copy_from_slice(&row);
            }
            let mut out = vec![0.0; n];
            let mut column = vec![0.0; rows];
            for c1 in 0..n1 {
                for a0 in 0..rows {
                    column[a0] = partial[a0 * n1 + c1];
                }
                for (c0, v) in sliding_max(&column, n0, lo, hi).into_iter().enumerate() {
                    out[c0 * n1 + c1] = v;
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

/// `out[c] = max{vals[a] : c - hi <= a <= c - lo}` for `c < n_out`, with
/// `-inf` for empty windows. Monotone deque, O(n_out + vals.len()).
fn sliding_max(vals: &[f64], n_out: usize, lo: usize, hi: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_out);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for c in 0..n_out {
        while next < vals.len() && next + lo <= c {
            while dq.back().is_some_and(|&b| vals[b] <= vals[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&b| b + hi < c) {
            dq.pop_front();
        }
        out.push(dq.front().map_or(f64::NEG_INFINITY, |&b| vals[b]));
    }
    out
}

/// `T_𝓕 f = Σ_{Q ∈ 𝓕} ⟨f⟩_Q χ_Q`; zero off the union of the family.
pub fn averaging_operator(f: &GridFunction, family: &WeightedFamily) -> Result<GridFunction> {
    if f.grid() != family.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let mut out = vec![0.0; grid.cell_count()];
    for m in family.members() {
        let cells = grid.cells_of(&m.cube);
        let mean = cells.iter().map(|&c| f.values()[c]).sum::<f64>() / cells.len() as f64;
        for c in cells {
            out[c] = mean;
        }
    }
    GridFunction::new(grid, out)
}

/// Values attached to the cells of one cube, in [`Grid::cells_of`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalField {
    pub cube: Cube,
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

impl LocalField {
    pub fn get(&self, cell: usize) -> Option<f64> {
        self.cells.iter().position(|&c| c == cell).map(|i| self.values[i])
    }
}

pub(crate) fn check_dyadic(cube: &Cube) -> Result<()> {
    if cube.side.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotDyadic(cube.side))
    }
}

/// Dyadic maximal function restricted to `cube`: at each cell of the cube,
/// the maximum of `⟨|f|⟩_P` over dyadic subcubes `P ⊆ Q` containing it.
pub fn dyadic_maximal_on_cube(f: &GridFunction, cube: &Cube) -> Result<LocalField> {
    let grid = f.grid();
    grid.check_cube(cube)?;
    check_dyadic(cube)?;
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let sat = SummedArea::new(grid, &abs);
    let cells = grid.cells_of(cube);
    let mut values = vec![0.0; cells.len()];
    fill_dyadic(grid, &sat, cube, cube, f64::NEG_INFINITY, &mut values);
    Ok(LocalField { cube: cube.clone(), cells, values })
}

fn fill_dyadic(
    grid: &Grid,
    sat: &SummedArea,
    root: &Cube,
    p: &Cube,
    inherited: f64,
    out: &mut [f64],
) {
    let best = inherited.max(sat.mean(p));
    if p.side == 1 {
        let c = [p.anchor[0], p.anchor.get(1).copied().unwrap_or(0)];
        let pos = match grid.dim() {
            1 => c[0] - root.anchor[0],
            _ => (c[0] - root.anchor[0]) * root.side + (c[1] - root.anchor[1]),
        };
        out[pos] = best;
        return;
    }
    for child in p.children() {
        fill_dyadic(grid, sat, root, &child, best, out);
    }
}

/// Outcome of comparing `m_t f` against `m_{t r^dim, r} f` cube by cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftDominationReport {
    pub t: f64,
    pub r: f64,
    /// `(cell, cube)` pairs whose enlarged cube fits in the box.
    pub checked_pairs: usize,
    pub violations: usize,
    /// Largest `(f χ_Q)^*(t|Q|) - m_{t r^dim, r} f(x)` seen (<= 0 when none).
    pub max_excess: f64,
}

/// Checks `(f χ_Q)^*(t|Q|) <= m_{t r^dim, r} f(x)` for every cell `x` and cube
/// `Q ∋ x` whose enlargement fits in the box. The enlargement has side
/// `⌈s / r⌉` and is shifted back by `⌊(⌈s/r⌉ - s)/2⌋` cells per axis, so for
/// `r = 1/2` it contains `Q` with `x` in its `r`-core and the inequality is
/// guaranteed; other `r` are reported only.
pub fn shift_domination_check(f: &GridFunction, t: f64, r: f64) -> Result<ShiftDominationReport> {
    check_param("t", t, t > 0.0 && t < 1.0, "(0, 1)")?;
    let grid = f.grid();
    let tau = t * r.powi(grid.dim() as i32);
    let shifted = shifted_median_maximal(f, tau, r)?;
    let v = f.values();
    let mut checked_pairs = 0;
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for q in grid.all_cubes() {
        let big = (q.side as f64 / r).ceil() as usize;
        let shift = (big - q.side) / 2;
        let fits =
            q.anchor.iter().zip(grid.extent()).all(|(&a, &n)| a >= shift && a - shift + big <= n);
        if !fits {
            continue;
        }
        let value = rank_value(v, grid, &q, t);
        for c in grid.cells_of(&q) {
            checked_pairs += 1;
            let excess = value - shifted.values()[c];
            max_excess = max_excess.max(excess);
            if excess > 0.0 {
                violations += 1;
            }
        }
    }
    Ok(ShiftDominationReport { t, r, checked_pairs, violations, max_excess })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1(v: &[f64]) -> GridFunction {
        GridFunction::new(&Grid::line(v.len()).unwrap(), v.to_vec()).unwrap()
    }

    fn cube1(a: usize, s: usize) -> Cube {
        Cube::new(vec![a], s)
    }

    #[test]
    fn rearrangement_examples() {
        let f = f1(&[3.0, 1.0, 2.0]);
        assert_eq!(rearrangement_value(&f, &cube1(0, 3), 1.5).unwrap().value, 2.0);
        assert_eq!(rearrangement_value(&f, &cube1(0, 3), 0.0).unwrap().value, 3.0);
        let r = rearrangement_value(&f, &cube1(0, 3), 3.0).unwrap();
        assert!(r.beyond_measure && r.value == 0.0);
        assert!(rearrangement_value(&f, &cube1(0, 3), -1.0).is_err());
        let c = f1(&[-2.5; 4]);
        for t in [0.0, 0.7, 2.0, 3.9] {
            assert_eq!(rearrangement_value(&c, &cube1(0, 4), t).unwrap().value, 2.5);
        }
    }

    #[test]
    fn rearrangement_measure_inequalities() {
        let f = f1(&[0.0, 5.0, 5.0, 1.0, 3.0, 3.0, 2.0, 0.5]);
        let q = cube1(0, 8);
        for k in 1..8 {
            let lambda = k as f64 / 8.0 - 0.01;
            let v = rearrangement_value(&f, &q, lambda * 8.0).unwrap().value;
            let gt = f.values().iter().filter(|x| x.abs() > v).count() as f64;
            let ge = f.values().iter().filter(|x| x.abs() >= v).count() as f64;
            assert!(gt <= lambda * 8.0);
            assert!(ge >= lambda * 8.0);
        }
    }

    #[test]
    fn rearrangement_uses_cell_measure() {
        let g = Grid::new(vec![4], 0.5).unwrap();
        let f = GridFunction::new(&g, vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        // t = 0.75 is 1.5 cells: second largest.
        assert_eq!(rearrangement_value(&f, &cube1(0, 4), 0.75).unwrap().value, 3.0);
    }

    #[test]
    fn hl_examples() {
        let m = hl_maximal(&f1(&[0.0, 4.0, 0.0]));
        assert_eq!(m.values(), &[2.0, 4.0, 2.0]);
        let m = hl_maximal(&f1(&[-1.5; 5]));
        assert_eq!(m.values(), &[1.5; 5]);
        let e = f1(&[1.0, 0.0, 0.0, 1.0]);
        let m = hl_maximal(&e);
        assert_eq!(m.values()[0], 1.0);
        assert_eq!(m.values()[3], 1.0);
        assert!(m.values().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn median_examples() {
        let f = f1(&[0.0, 4.0, 0.0]);
        let m = median_maximal(&f, 0.5).unwrap();
        assert_eq!(m.values(), &[0.0, 4.0, 0.0]);
        let m = median_maximal(&f1(&[2.0; 4]), 0.3).unwrap();
        assert_eq!(m.values(), &[2.0; 4]);
        assert!(median_maximal(&f, 1.0).is_err());
        assert!(median_maximal(&f, 0.0).is_err());
    }

    #[test]
    fn median_of_indicator_is_dichotomy() {
        let e = f1(&[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let m = median_maximal(&e, 0.6).unwrap();
        let g = e.grid();
        for c in 0..8 {
            let expected = g.enumerate_cubes_containing(c).unwrap().iter().any(|q| {
                let inside = g.cells_of(q).iter().filter(|&&x| e.values()[x] == 1.0).count();
                inside as f64 > 0.6 * q.cell_count() as f64
            });
            assert_eq!(m.values()[c], if expected { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn shifted_median_examples() {
        let f = f1(&[0.0, 4.0, 0.0]);
        let m = shifted_median_maximal(&f, 0.25, 0.5).unwrap();
        assert_eq!(m.values()[1], 4.0);
        let c = shifted_median_maximal(&f1(&[3.0; 6]), 0.4, 0.3).unwrap();
        assert_eq!(c.values(), &[3.0; 6]);
        // r close to 1: the core is the whole cube on these sides.
        let g = f1(&[1.0, 0.0, 5.0, 2.0, 2.0, 0.0, 3.0]);
        assert_eq!(
            shifted_median_maximal(&g, 0.5, 0.99).unwrap(),
            median_maximal(&g, 0.5).unwrap()
        );
    }

    #[test]
    fn sliding_max_windows() {
        let v = [1.0, 5.0, 2.0, 4.0];
        // Containment windows for side 2 on a line of 5 cells.
        assert_eq!(sliding_max(&v, 5, 0, 1), vec![1.0, 5.0, 5.0, 4.0, 4.0]);
        // Core-only windows (offset 1 of each cube).
        assert_eq!(sliding_max(&v, 5, 1, 1), vec![f64::NEG_INFINITY, 1.0, 5.0, 2.0, 4.0]);
    }

    #[test]
    fn averaging_examples() {
        let f = f1(&[1.0, 3.0, 2.0, 6.0]);
        let g = f.grid().clone();
        let fam = WeightedFamily::from_cubes(&g, vec![cube1(0, 2), cube1(2, 2)]).unwrap();
        assert_eq!(averaging_operator(&f, &fam).unwrap().values(), &[2.0, 2.0, 4.0, 4.0]);
        let fam = WeightedFamily::from_cubes(&g, vec![cube1(0, 4)]).unwrap();
        assert_eq!(averaging_operator(&f, &fam).unwrap().values(), &[3.0; 4]);
        let out = averaging_operator(&f, &WeightedFamily::empty(&g)).unwrap();
        assert_eq!(out.values(), &[0.0; 4]);
    }

    #[test]
    fn family_validation() {
        let g = Grid::line(6).unwrap();
        assert_eq!(
            WeightedFamily::from_cubes(&g, vec![cube1(0, 3), cube1(2, 2)]),
            Err(Error::Overlap(0, 1))
        );
        let bad = FamilyMember::with_subset(cube1(0, 2), 1.0, vec![3]);
        assert_eq!(WeightedFamily::new(&g, vec![bad]), Err(Error::SubsetOutsideCube(0)));
        let neg = FamilyMember::new(cube1(0, 2), -1.0);
        assert!(WeightedFamily::new(&g, vec![neg]).is_err());
        let fam =
            WeightedFamily::new(&g, vec![FamilyMember::with_subset(cube1(0, 4), 2.0, vec![1, 0])])
                .unwrap();
        assert!(fam.check_subset_fraction(0.5).is_ok());
        assert!(fam.check_subset_fraction(0.6).is_err());
        assert_eq!(fam.subset_sum().unwrap().values(), &[2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let no_subset = WeightedFamily::from_cubes(&g, vec![cube1(0, 2)]).unwrap();
        assert_eq!(no_subset.subset_sum(), Err(Error::MissingSubset(0)));
    }

    #[test]
    fn dyadic_examples() {
        let f = f1(&[0.0, 0.0, 8.0, 0.0]);
        let d = dyadic_maximal_on_cube(&f, &cube1(0, 4)).unwrap();
        assert_eq!(d.values, vec![2.0, 2.0, 8.0, 4.0]);
        let c = f1(&[1.0; 8]);
        assert_eq!(dyadic_maximal_on_cube(&c, &cube1(4, 4)).unwrap().values, vec![1.0; 4]);
        let off = f1(&[5.0, 5.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(dyadic_maximal_on_cube(&off, &cube1(2, 4)).unwrap().values, vec![0.0; 4]);
        assert_eq!(dyadic_maximal_on_cube(&off, &cube1(0, 3)), Err(Error::NotDyadic(3)));
    }

    #[test]
    fn dyadic_2d_positions() {
        let g = Grid::rect(4, 4).unwrap();
        let mut v = vec![0.0; 16];
        v[g.index([3, 0])] = 16.0;
        let f = GridFunction::new(&g, v).unwrap();
        let d = dyadic_maximal_on_cube(&f, &Cube::new(vec![0, 0], 4)).unwrap();
        assert_eq!(d.get(g.index([3, 0])), Some(16.0));
        assert_eq!(d.get(g.index([2, 1])), Some(4.0));
        assert_eq!(d.get(g.index([0, 0])), Some(1.0));
    }

    #[test]
    fn shift_domination_half() {
        let f = f1(&[0.0, 3.0, 1.0, 0.0, 7.0, 2.0, 2.0, 0.0, 1.0, 5.0, 0.0, 0.0]);
        for t in [0.2, 0.5, 0.8] {
            let rep = shift_domination_check(&f, t, 0.5).unwrap();
            assert!(rep.checked_pairs > 0);
            assert_eq!(rep.violations, 0, "{rep:?}");
        }
    }
}
