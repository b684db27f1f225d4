//! Uniform grids on one- and two-dimensional boxes, grid-aligned cubes and
//! cell masks.
//!
//! Cells are addressed by a linear index in row-major order. A cube is given
//! by the cell index of its lower corner along each axis (the anchor) and its
//! side length in cells; cubes always lie inside the box.

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord")]
pub struct Grid {
    extent: Vec<usize>,
    cell_side: f64,
}

#[derive(Deserialize)]
struct GridRecord {
    extent: Vec<usize>,
    cell_side: f64,
}

impl TryFrom<GridRecord> for Grid {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        Grid::new(r.extent, r.cell_side)
    }
}

impl Grid {
    pub fn new(extent: Vec<usize>, cell_side: f64) -> Result<Self> {
        if extent.is_empty() || extent.len() > 2 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{1, 2}}", extent.len())));
        }
        if extent.contains(&0) {
            return Err(Error::InvalidGrid("zero extent along an axis".into()));
        }
        check_param("cell_side", cell_side, cell_side > 0.0, "(0, inf)")?;
        Ok(Self { extent, cell_side })
    }

    /// One-dimensional grid of `n` unit cells.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(vec![n], 1.0)
    }

    /// Two-dimensional grid of `rows x cols` unit cells.
    pub fn rect(rows: usize, cols: usize) -> Result<Self> {
        Self::new(vec![rows, cols], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cell_count(&self) -> usize {
        self.extent.iter().product()
    }

    /// `h^dim`.
    pub fn cell_measure(&self) -> f64 {
        self.cell_side.powi(self.dim() as i32)
    }

    /// Largest cube side that fits along every axis.
    pub fn max_side(&self) -> usize {
        *self.extent.iter().min().unwrap()
    }

    /// Per-axis coordinates of a cell; the second entry is 0 in 1D.
    pub fn coords(&self, cell: usize) -> [usize; 2] {
        match self.extent[..] {
            [_] => [cell, 0],
            [_, cols] => [cell / cols, cell % cols],
            _ => unreachable!(),
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        match self.extent[..] {
            [_] => coords[0],
            [_, cols] => coords[0] * cols + coords[1],
            _ => unreachable!(),
        }
    }

    pub fn cube(&self, anchor: &[usize], side: usize) -> Result<Cube> {
        let cube = Cube { anchor: anchor.to_vec(), side };
        self.check_cube(&cube)?;
        Ok(cube)
    }

    pub fn contains_cube(&self, cube: &Cube) -> bool {
        cube.side >= 1
            && cube.anchor.len() == self.dim()
            && cube.anchor.iter().zip(&self.extent).all(|(&a, &n)| a + cube.side <= n)
    }

    pub fn check_cube(&self, cube: &Cube) -> Result<()> {
        if self.contains_cube(cube) {
            Ok(())
        } else {
            Err(Error::CubeOutsideGrid { anchor: cube.anchor.clone(), side: cube.side })
        }
    }

    fn check_cell(&self, cell: usize) -> Result<()> {
        if cell < self.cell_count() {
            Ok(())
        } else {
            Err(Error::CellOutsideGrid(cell))
        }
    }

    /// The whole box as a cube, when the box is itself a cube.
    pub fn box_cube(&self) -> Option<Cube> {
        let side = self.extent[0];
        self.extent.iter().all(|&n| n == side).then(|| Cube { anchor: vec![0; self.dim()], side })
    }

    /// `|Q| = (s h)^dim`.
    pub fn cube_measure(&self, cube: &Cube) -> f64 {
        (cube.side as f64 * self.cell_side).powi(self.dim() as i32)
    }

    /// Cells of `cube` in row-major order.
    pub fn cells_of(&self, cube: &Cube) -> Vec<usize> {
        debug_assert!(self.contains_cube(cube));
        let s = cube.side;
        match self.dim() {
            1 => (cube.anchor[0]..cube.anchor[0] + s).collect(),
            _ => {
                let mut out = Vec::with_capacity(s * s);
                for i in cube.anchor[0]..cube.anchor[0] + s {
                    for j in cube.anchor[1]..cube.anchor[1] + s {
                        out.push(self.index([i, j]));
                    }
                }
                out
            }
        }
    }

    /// Every cube inside the box, sides ascending, anchors in row-major order.
    pub fn all_cubes(&self) -> Vec<Cube> {
        let mut out = Vec::new();
        for side in 1..=self.max_side() {
            self.for_each_anchor(side, |anchor| out.push(Cube { anchor: anchor.to_vec(), side }));
        }
        out
    }

    /// Calls `f` with every anchor of a side-`side` cube, row-major.
    pub fn for_each_anchor(&self, side: usize, mut f: impl FnMut(&[usize])) {
        if side == 0 || side > self.max_side() {
            return;
        }
        match self.extent[..] {
            [n] => {
                for a in 0..=n - side {
                    f(&[a]);
                }
            }
            [n0, n1] => {
                for a0 in 0..=n0 - side {
                    for a1 in 0..=n1 - side {
                        f(&[a0, a1]);
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Every grid-aligned cube inside the box that contains `cell`, each once.
    pub fn enumerate_cubes_containing(&self, cell: usize) -> Result<Vec<Cube>> {
        self.check_cell(cell)?;
        let c = self.coords(cell);
        let mut out = Vec::new();
        for side in 1..=self.max_side() {
            let range = |axis: usize| {
                let lo = c[axis].saturating_sub(side - 1);
                let hi = c[axis].min(self.extent[axis] - side);
                lo..=hi
            };
            match self.dim() {
                1 => out.extend(range(0).map(|a| Cube { anchor: vec![a], side })),
                _ => {
                    for a0 in range(0) {
                        for a1 in range(1) {
                            out.push(Cube { anchor: vec![a0, a1], side });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cells of `cube` whose centers lie in the closed concentric cube of
    /// side `r s h`.
    pub fn core_cells(&self, cube: &Cube, r: f64) -> Result<CellMask> {
        check_param("r", r, r > 0.0 && r < 1.0, "(0, 1)")?;
        self.check_cube(cube)?;
        let (lo, hi) = core_offsets(cube.side, r);
        let mut mask = CellMask::empty(self);
        for cell in self.cells_of(cube) {
            let c = self.coords(cell);
            let inside = (0..self.dim()).all(|k| {
                let o = c[k] - cube.anchor[k];
                lo <= o && o <= hi
            });
            if inside {
                mask.members[cell] = true;
            }
        }
        Ok(mask)
    }
}

/// Inclusive offset range `[lo, hi]`, along one axis, of the cells of a
/// side-`side` cube that belong to its `r`-core. Offset `o` qualifies when
/// `|2o + 1 - side| <= r side` (centers measured in half cells).
pub fn core_offsets(side: usize, r: f64) -> (usize, usize) {
    let inside = |o: usize| ((2 * o + 1) as f64 - side as f64).abs() <= r * side as f64;
    // Symmetric about the center. Empty (lo > hi) only for even sides with r side < 1.
    let lo = (0..side).find(|&o| inside(o)).unwrap_or(side / 2);
    (lo, side - 1 - lo)
}

/// Axis-parallel grid-aligned cube.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub anchor: Vec<usize>,
    pub side: usize,
}

impl Cube {
    pub fn new(anchor: Vec<usize>, side: usize) -> Self {
        Self { anchor, side }
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Number of cells, `side^dim`.
    pub fn cell_count(&self) -> usize {
        self.side.pow(self.dim() as u32)
    }

    pub fn contains_coords(&self, c: [usize; 2]) -> bool {
        self.anchor.iter().enumerate().all(|(k, &a)| a <= c[k] && c[k] < a + self.side)
    }

    pub fn intersects(&self, other: &Cube) -> bool {
        self.anchor
            .iter()
            .zip(&other.anchor)
            .all(|(&a, &b)| a < b + other.side && b < a + self.side)
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.anchor
            .iter()
            .zip(&other.anchor)
            .all(|(&a, &b)| a <= b && b + other.side <= a + self.side)
    }

    /// The `2^dim` dyadic children, row-major. Requires an even side.
    pub fn children(&self) -> Vec<Cube> {
        let h = self.side / 2;
        match self.anchor[..] {
            [a] => vec![Cube::new(vec![a], h), Cube::new(vec![a + h], h)],
            [a0, a1] => vec![
                Cube::new(vec![a0, a1], h),
                Cube::new(vec![a0, a1 + h], h),
                Cube::new(vec![a0 + h, a1], h),
                Cube::new(vec![a0 + h, a1 + h], h),
            ],
            _ => unreachable!(),
        }
    }
}

/// Membership indicator over the cells of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MaskRecord", try_from = "MaskRecord")]
pub struct CellMask {
    grid: Grid,
    members: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct MaskRecord {
    grid: Grid,
    cells: Vec<usize>,
}

impl From<CellMask> for MaskRecord {
    fn from(m: CellMask) -> Self {
        let cells = m.cells();
        MaskRecord { grid: m.grid, cells }
    }
}

impl TryFrom<MaskRecord> for CellMask {
    type Error = Error;

    fn try_from(r: MaskRecord) -> Result<Self> {
        CellMask::from_cells(&r.grid, &r.cells)
    }
}

impl CellMask {
    pub fn empty(grid: &Grid) -> Self {
        Self { grid: grid.clone(), members: vec![false; grid.cell_count()] }
    }

    pub fn full(grid: &Grid) -> Self {
        Self { grid: grid.clone(), members: vec![true; grid.cell_count()] }
    }

    pub fn from_cells(grid: &Grid, cells: &[usize]) -> Result<Self> {
        let mut mask = Self::empty(grid);
        for &c in cells {
            grid.check_cell(c)?;
            mask.members[c] = true;
        }
        Ok(mask)
    }

    pub fn from_cube(grid: &Grid, cube: &Cube) -> Result<Self> {
        grid.check_cube(cube)?;
        Self::from_cells(grid, &grid.cells_of(cube))
    }

    pub fn from_bools(grid: &Grid, members: Vec<bool>) -> Result<Self> {
        if members.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), got: members.len() });
        }
        Ok(Self { grid: grid.clone(), members })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.members.get(cell).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, cell: usize) {
        self.members[cell] = true;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.members
    }

    /// Member cells in increasing index order.
    pub fn cells(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_measure()
    }

    pub fn is_subset_of(&self, other: &CellMask) -> bool {
        self.members.iter().zip(&other.members).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &CellMask) -> CellMask {
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| a || b).collect();
        CellMask { grid: self.grid.clone(), members }
    }

    pub fn intersection(&self, other: &CellMask) -> CellMask {
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| a && b).collect();
        CellMask { grid: self.grid.clone(), members }
    }

    pub fn difference(&self, other: &CellMask) -> CellMask {
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| a && !b).collect();
        CellMask { grid: self.grid.clone(), members }
    }

    pub fn is_disjoint(&self, other: &CellMask) -> bool {
        self.members.iter().zip(&other.members).all(|(&a, &b)| !(a && b))
    }
}

/// Summed-area table (prefix sums in 1D) for O(1) cube sums.
#[derive(Debug, Clone)]
pub struct SummedArea {
    extent: Vec<usize>,
    table: Vec<f64>,
}

impl SummedArea {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        match grid.extent()[..] {
            [n] => {
                let mut table = vec![0.0; n + 1];
                for i in 0..n {
                    table[i + 1] = table[i] + values[i];
                }
                Self { extent: vec![n], table }
            }
            [n0, n1] => {
                let w = n1 + 1;
                let mut table = vec![0.0; (n0 + 1) * w];
                for i in 0..n0 {
                    let mut row = 0.0;
                    for j in 0..n1 {
                        row += values[i * n1 + j];
                        table[(i + 1) * w + j + 1] = table[i * w + j + 1] + row;
                    }
                }
                Self { extent: vec![n0, n1], table }
            }
            _ => unreachable!(),
        }
    }

    /// Sum of the cell values over `cube`.
    pub fn sum(&self, cube: &Cube) -> f64 {
        let s = cube.side;
        match self.extent[..] {
            [_] => self.table[cube.anchor[0] + s] - self.table[cube.anchor[0]],
            [_, n1] => {
                let w = n1 + 1;
                let (i, j) = (cube.anchor[0], cube.anchor[1]);
                self.table[(i + s) * w + j + s]
                    - self.table[i * w + j + s]
                    - self.table[(i + s) * w + j]
                    + self.table[i * w + j]
            }
            _ => unreachable!(),
        }
    }

    /// Cell-count average over `cube`.
    pub fn mean(&self, cube: &Cube) -> f64 {
        self.sum(cube) / cube.cell_count() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(anchor: &[usize], side: usize) -> Cube {
        Cube::new(anchor.to_vec(), side)
    }

    #[test]
    fn cells_of_examples() {
        let g = Grid::line(8).unwrap();
        assert_eq!(g.cells_of(&cube(&[2], 3)), vec![2, 3, 4]);
        assert_eq!(g.cells_of(&cube(&[5], 1)), vec![5]);
        let g = Grid::rect(4, 4).unwrap();
        let cells: Vec<_> = g.cells_of(&cube(&[0, 0], 2)).iter().map(|&c| g.coords(c)).collect();
        assert_eq!(cells, vec![[0, 0], [0, 1], [1, 0], [1, 1]]);
    }

    #[test]
    fn cubes_containing_1d() {
        let g = Grid::line(3).unwrap();
        let got = g.enumerate_cubes_containing(1).unwrap();
        assert_eq!(got, vec![cube(&[1], 1), cube(&[0], 2), cube(&[1], 2), cube(&[0], 3)]);
        let g = Grid::line(1).unwrap();
        assert_eq!(g.enumerate_cubes_containing(0).unwrap(), vec![cube(&[0], 1)]);
        assert!(g.enumerate_cubes_containing(1).is_err());
    }

    #[test]
    fn cubes_containing_2d_corner() {
        // Brute force over anchors and sides fixes the count.
        let g = Grid::rect(2, 2).unwrap();
        let brute = g.all_cubes().into_iter().filter(|q| q.contains_coords([0, 0])).count();
        assert_eq!(brute, 2);
        assert_eq!(g.enumerate_cubes_containing(0).unwrap().len(), 2);
    }

    #[test]
    fn core_cells_examples() {
        let g = Grid::line(8).unwrap();
        assert_eq!(g.core_cells(&cube(&[0], 4), 0.5).unwrap().cells(), vec![1, 2]);
        assert_eq!(g.core_cells(&cube(&[3], 1), 0.5).unwrap().cells(), vec![3]);
        assert_eq!(g.core_cells(&cube(&[2], 3), 0.5).unwrap().cells(), vec![3]);
        assert!(g.core_cells(&cube(&[0], 4), 1.0).is_err());
        assert!(g.core_cells(&cube(&[0], 4), 0.0).is_err());
        assert!(g.core_cells(&cube(&[6], 4), 0.5).is_err());
    }

    #[test]
    fn core_cells_2d_and_limit() {
        let g = Grid::rect(6, 6).unwrap();
        let q = cube(&[1, 1], 4);
        let core = g.core_cells(&q, 0.5).unwrap();
        let coords: Vec<_> = core.cells().iter().map(|&c| g.coords(c)).collect();
        assert_eq!(coords, vec![[2, 2], [2, 3], [3, 2], [3, 3]]);
        // s * eps < 1 recovers the whole cube.
        let all = g.core_cells(&q, 1.0 - 0.2).unwrap();
        assert_eq!(all.cells(), g.cells_of(&q));
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::new(vec![], 1.0).is_err());
        assert!(Grid::new(vec![2, 2, 2], 1.0).is_err());
        assert!(Grid::new(vec![0], 1.0).is_err());
        assert!(Grid::new(vec![3], 0.0).is_err());
        assert!(Grid::new(vec![3], f64::NAN).is_err());
    }

    #[test]
    fn mask_measure_is_additive() {
        let g = Grid::new(vec![4, 4], 0.5).unwrap();
        let a = CellMask::from_cells(&g, &[0, 1, 5]).unwrap();
        let b = CellMask::from_cells(&g, &[2, 15]).unwrap();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.union(&b).measure(), a.measure() + b.measure());
        assert_eq!(a.measure(), 3.0 * 0.25);
    }

    #[test]
    fn summed_area_matches_direct_sums() {
        let g = Grid::rect(3, 4).unwrap();
        let v: Vec<f64> = (0..12).map(|i| (i * 7 % 5) as f64).collect();
        let sat = SummedArea::new(&g, &v);
        for q in g.all_cubes() {
            let direct: f64 = g.cells_of(&q).iter().map(|&c| v[c]).sum();
            assert_eq!(sat.sum(&q), direct);
        }
    }

    #[test]
    fn grid_serde_validates() {
        let g: std::result::Result<Grid, _> =
            serde_json::from_str(r#"{"extent":[0],"cell_side":1.0}"#);
        assert!(g.is_err());
        let m = CellMask::from_cells(&Grid::line(4).unwrap(), &[1, 3]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains(r#""cells":[1,3]"#));
        let back: CellMask = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
