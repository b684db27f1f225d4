//! Brute-force evaluations by explicit cube enumeration.
//!
//! These share no code with the sweeps in [`crate::maximal`] beyond cube
//! enumeration, and exist to cross-check them at small sizes.

use crate::grid::Grid;
use crate::modular::GridFunction;

fn sorted_desc(f: &GridFunction, cells: &[usize]) -> Vec<f64> {
    let mut v: Vec<f64> = cells.iter().map(|&c| f.values()[c].abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `Mf` by enumerating every cube containing every cell and summing directly.
pub fn hl_maximal(f: &GridFunction) -> Vec<f64> {
    let grid = f.grid();
    (0..grid.cell_count())
        .map(|c| {
            grid.enumerate_cubes_containing(c)
                .unwrap()
                .iter()
                .map(|q| {
                    let cells = grid.cells_of(q);
                    cells.iter().map(|&x| f.values()[x].abs()).sum::<f64>() / cells.len() as f64
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Number of cells strictly above the rearrangement threshold, by scanning.
fn rank_index(fraction: f64, n: usize) -> usize {
    // Smallest k >= 0 with k + 1 > fraction * n, i.e. the first index whose
    // count of larger entries exceeds the allowed measure.
    let allowed = fraction * n as f64;
    (0..=n).find(|&k| (k + 1) as f64 > allowed + 1e-9 * allowed.max(1.0)).unwrap_or(n)
}

/// `m_λ f` by enumeration and full sorting.
pub fn median_maximal(f: &GridFunction, lambda: f64) -> Vec<f64> {
    let grid = f.grid();
    (0..grid.cell_count())
        .map(|c| {
            grid.enumerate_cubes_containing(c)
                .unwrap()
                .iter()
                .map(|q| {
                    let v = sorted_desc(f, &grid.cells_of(q));
                    v.get(rank_index(lambda, v.len())).copied().unwrap_or(0.0)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `m_{τ,r} f` by enumerating all cubes and testing core membership.
pub fn shifted_median_maximal(f: &GridFunction, tau: f64, r: f64) -> Vec<f64> {
    let grid = f.grid();
    let mut out = vec![0.0f64; grid.cell_count()];
    for q in grid.all_cubes() {
        let v = sorted_desc(f, &grid.cells_of(&q));
        let value = v.get(rank_index(tau, v.len())).copied().unwrap_or(0.0);
        for c in grid.core_cells(&q, r).unwrap().cells() {
            out[c] = out[c].max(value);
        }
    }
    out
}

/// Dyadic maximal function on the box-aligned dyadic cube `root`, by
/// checking every dyadic subcube against every cell.
pub fn dyadic_maximal(grid: &Grid, f: &GridFunction, root: &crate::Cube) -> Vec<f64> {
    let mut dyadic = Vec::new();
    let mut side = root.side;
    loop {
        let steps = root.side / side;
        match grid.dim() {
            1 => {
                for i in 0..steps {
                    dyadic.push(crate::Cube::new(vec![root.anchor[0] + i * side], side));
                }
            }
            _ => {
                for i in 0..steps {
                    for j in 0..steps {
                        dyadic.push(crate::Cube::new(
                            vec![root.anchor[0] + i * side, root.anchor[1] + j * side],
                            side,
                        ));
                    }
                }
            }
        }
        if side == 1 {
            break;
        }
        side /= 2;
    }
    grid.cells_of(root)
        .iter()
        .map(|&c| {
            let xy = grid.coords(c);
            dyadic
                .iter()
                .filter(|p| p.contains_coords(xy))
                .map(|p| {
                    let cells = grid.cells_of(p);
                    cells.iter().map(|&x| f.values()[x].abs()).sum::<f64>() / cells.len() as f64
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
