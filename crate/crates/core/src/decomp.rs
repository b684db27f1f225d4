//! Calderón–Zygmund stopping cubes, the level families built from them, and
//! greedy extraction of a covering split into disjoint subfamilies.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::grid::{CellMask, Cube, Grid, SummedArea};
use crate::maximal::check_dyadic;
use crate::modular::GridFunction;

fn check_nonnegative(v: &GridFunction, cube: &Cube) -> Result<()> {
    for c in v.grid().cells_of(cube) {
        let value = v.values()[c];
        if value < 0.0 {
            return Err(Error::NegativeValue { cell: c, value });
        }
    }
    Ok(())
}

/// Maximal dyadic subcubes `P ⊆ Q` with `⟨v⟩_P > threshold`, by top-down
/// stopping. Their union is `{M_Q^d v > threshold}`.
pub fn cz_decompose(v: &GridFunction, cube: &Cube, threshold: f64) -> Result<Vec<Cube>> {
    let grid = v.grid();
    grid.check_cube(cube)?;
    check_dyadic(cube)?;
    check_param("threshold", threshold, threshold > 0.0, "(0, inf)")?;
    check_nonnegative(v, cube)?;
    let sat = SummedArea::new(grid, v.values());
    let mut out = Vec::new();
    stop(&sat, cube, threshold, &mut out);
    Ok(out)
}

fn stop(sat: &SummedArea, p: &Cube, threshold: f64, out: &mut Vec<Cube>) {
    if sat.mean(p) > threshold {
        out.push(p.clone());
    } else if p.side > 1 {
        for child in p.children() {
            stop(sat, &child, threshold, out);
        }
    }
}

/// One stopping cube `P_j^k` with its remainder `E_j^k = P_j^k \ Ω_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzCube {
    pub cube: Cube,
    pub mean: f64,
    /// Cells of `E_j^k`, increasing.
    pub remainder: Vec<usize>,
    /// `|E_j^k| / |P_j^k|`.
    pub remainder_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzLevel {
    pub k: u32,
    /// `β^k α_Q`.
    pub threshold: f64,
    pub cubes: Vec<CzCube>,
}

/// Level sets `Ω_k(Q) = {M_Q^d v > β^k α_Q}` with `β = 2^dim / (1 - λ)`, each
/// split into its stopping cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzLevels {
    pub base: Cube,
    pub lambda: f64,
    /// `α_Q = ⟨v⟩_Q`.
    pub alpha: f64,
    /// `β = 2^dim / (1 - λ)`.
    pub beta: f64,
    pub levels: Vec<CzLevel>,
    /// Smallest `|E_j^k| / |P_j^k|` over all levels (1 when no cube was selected).
    pub min_remainder_fraction: f64,
    /// `|E_j^k| >= λ |P_j^k|` for every `j, k`, by direct count.
    pub fraction_holds: bool,
    /// `Ω_{k+1} ⊆ Ω_k` for consecutive levels.
    pub nested: bool,
}

impl CzLevels {
    pub fn level(&self, k: u32) -> Option<&CzLevel> {
        self.levels.iter().find(|l| l.k == k)
    }
}

/// Builds the level families for `k` in `k_range`.
pub fn build_cz_levels(
    v: &GridFunction,
    cube: &Cube,
    lambda: f64,
    k_range: RangeInclusive<u32>,
) -> Result<CzLevels> {
    let grid = v.grid();
    grid.check_cube(cube)?;
    check_dyadic(cube)?;
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    check_nonnegative(v, cube)?;
    let sat = SummedArea::new(grid, v.values());
    let alpha = sat.mean(cube);
    let beta = (1u32 << grid.dim()) as f64 / (1.0 - lambda);

    let omega = |k: u32| -> Vec<Cube> {
        if alpha <= 0.0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        stop(&sat, cube, beta.powi(k as i32) * alpha, &mut out);
        out
    };
    let mask_of = |cubes: &[Cube]| -> CellMask {
        let mut m = CellMask::empty(grid);
        for q in cubes {
            for c in grid.cells_of(q) {
                m.insert(c);
            }
        }
        m
    };

    let (k0, k1) = (*k_range.start(), *k_range.end());
    let mut levels = Vec::new();
    let mut min_fraction: f64 = 1.0;
    let mut fraction_holds = true;
    let mut nested = true;
    let mut current = omega(k0);
    for k in k0..=k1 {
        let next = omega(k + 1);
        let next_mask = mask_of(&next);
        if !next_mask.is_subset_of(&mask_of(&current)) {
            nested = false;
        }
        let cubes = current
            .iter()
            .map(|p| {
                let remainder: Vec<usize> =
                    grid.cells_of(p).into_iter().filter(|&c| !next_mask.contains(c)).collect();
                let n = p.cell_count();
                let remainder_fraction = remainder.len() as f64 / n as f64;
                min_fraction = min_fraction.min(remainder_fraction);
                if (remainder.len() as f64) < lambda * n as f64 {
                    fraction_holds = false;
                }
                CzCube { cube: p.clone(), mean: sat.mean(p), remainder, remainder_fraction }
            })
            .collect();
        levels.push(CzLevel { k, threshold: beta.powi(k as i32) * alpha, cubes });
        current = next;
    }
    Ok(CzLevels {
        base: cube.clone(),
        lambda,
        alpha,
        beta,
        levels,
        min_remainder_fraction: min_fraction,
        fraction_holds,
        nested,
    })
}

/// A cube marked by a cell of its `r`-core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedCube {
    pub cell: usize,
    pub cube: Cube,
}

/// Result of [`besicovitch_extract`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverExtraction {
    pub r: f64,
    pub points: Vec<MarkedCube>,
    /// Indices into `points` of the selected cubes, in selection order.
    pub selected: Vec<usize>,
    /// Partition of `selected` (positions in that list) into pairwise
    /// disjoint subfamilies.
    pub subfamilies: Vec<Vec<usize>>,
}

impl CoverExtraction {
    pub fn subfamily_count(&self) -> usize {
        self.subfamilies.len()
    }

    pub fn subcover(&self) -> Vec<&Cube> {
        self.selected.iter().map(|&i| &self.points[i].cube).collect()
    }
}

/// Greedy covering extraction: visit cubes by decreasing side (ties by
/// anchor, then input order) and keep a cube whenever its marked cell is not
/// yet covered. The kept cubes are then split into disjoint subfamilies by
/// first-fit coloring of their intersection graph in selection order.
pub fn besicovitch_extract(grid: &Grid, points: &[MarkedCube], r: f64) -> Result<CoverExtraction> {
    check_param("r", r, r > 0.0 && r < 1.0, "(0, 1)")?;
    for (index, p) in points.iter().enumerate() {
        if !grid.core_cells(&p.cube, r)?.contains(p.cell) {
            return Err(Error::PointOutsideCore { index, cell: p.cell });
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (qa, qb) = (&points[a].cube, &points[b].cube);
        qb.side.cmp(&qa.side).then_with(|| qa.anchor.cmp(&qb.anchor)).then(a.cmp(&b))
    });

    let mut selected: Vec<usize> = Vec::new();
    for i in order {
        let xy = grid.coords(points[i].cell);
        if !selected.iter().any(|&j| points[j].cube.contains_coords(xy)) {
            selected.push(i);
        }
    }

    let mut subfamilies: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in selected.iter().enumerate() {
        let cube = &points[i].cube;
        let slot = subfamilies.iter().position(|fam| {
            fam.iter().all(|&other| !points[selected[other]].cube.intersects(cube))
        });
        match slot {
            Some(s) => subfamilies[s].push(pos),
            None => subfamilies.push(vec![pos]),
        }
    }
    Ok(CoverExtraction { r, points: points.to_vec(), selected, subfamilies })
}
