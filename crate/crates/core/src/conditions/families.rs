//! Seeded generators of disjoint cube families and weights.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::indicator_norm;
use crate::grid::{Cube, Grid};
use crate::modular::ExponentField;

#[derive(Debug, Clone, Copy)]
pub(crate) enum WeightRule {
    /// `factor / ‖χ_Q‖`.
    InverseNorm(f64),
    Absolute(f64),
}

#[derive(Debug, Clone)]
pub(crate) struct FamilySpec {
    pub cubes: Vec<Cube>,
    pub weights: Vec<WeightRule>,
}

impl FamilySpec {
    pub fn resolve(&self, p: &ExponentField) -> Vec<f64> {
        let grid = p.grid();
        self.cubes
            .iter()
            .zip(&self.weights)
            .map(|(q, w)| match *w {
                WeightRule::InverseNorm(f) => f / indicator_norm(p, &grid.cells_of(q)),
                WeightRule::Absolute(t) => t,
            })
            .collect()
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    2f64.powf(rng.gen_range(lo_exp..=hi_exp))
}

/// Random family of disjoint cubes: either a thinned dyadic tiling or a
/// rejection-sampled packing. Never empty.
pub(crate) fn random_cubes(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<Cube> {
    let max_side = grid.max_side();
    let mut cubes = Vec::new();
    if rng.gen_bool(0.5) {
        let max_j = usize::BITS - 1 - max_side.leading_zeros();
        let side = 1usize << rng.gen_range(0..=max_j);
        let keep = rng.gen_range(0.25..=1.0);
        let mut tiles = Vec::new();
        grid.for_each_anchor(side, |a| {
            if a.iter().all(|&x| x % side == 0) {
                tiles.push(Cube::new(a.to_vec(), side));
            }
        });
        for q in &tiles {
            if rng.gen_bool(keep) {
                cubes.push(q.clone());
            }
        }
        if cubes.is_empty() {
            cubes.push(tiles[rng.gen_range(0..tiles.len())].clone());
        }
    } else {
        let attempts = rng.gen_range(1..=24);
        for _ in 0..attempts {
            let u: f64 = rng.gen();
            let side = (1 + (max_side as f64 * u * u) as usize).min(max_side);
            let anchor: Vec<usize> =
                grid.extent().iter().map(|&n| rng.gen_range(0..=n - side)).collect();
            let q = Cube::new(anchor, side);
            if cubes.iter().all(|c: &Cube| !c.intersects(&q)) {
                cubes.push(q);
            }
        }
    }
    cubes
}

/// Random family with one of three weight modes.
pub(crate) fn random_spec(grid: &Grid, rng: &mut ChaCha8Rng) -> FamilySpec {
    let cubes = random_cubes(grid, rng);
    let mode = rng.gen_range(0..3);
    let weights = cubes
        .iter()
        .map(|_| match mode {
            0 => WeightRule::InverseNorm(1.0),
            1 => WeightRule::Absolute(log_uniform(rng, -8.0, 8.0)),
            _ => WeightRule::InverseNorm(log_uniform(rng, -2.0, 2.0)),
        })
        .collect();
    FamilySpec { cubes, weights }
}

/// Candidate sequence: even slots walk through every single cube (largest
/// first, with `t = 1/‖χ_Q‖` then `t = 1`) until exhausted, everything else is
/// random. Candidate `i` does not depend on how many candidates are drawn.
pub(crate) struct FamilyStream {
    singles: Vec<FamilySpec>,
    grid: Grid,
    next: usize,
}

impl FamilyStream {
    pub fn new(grid: &Grid) -> Self {
        let mut cubes = grid.all_cubes();
        cubes.sort_by(|a, b| b.side.cmp(&a.side).then_with(|| a.anchor.cmp(&b.anchor)));
        let singles = cubes
            .into_iter()
            .flat_map(|q| {
                [WeightRule::InverseNorm(1.0), WeightRule::Absolute(1.0)]
                    .map(|w| FamilySpec { cubes: vec![q.clone()], weights: vec![w] })
            })
            .collect();
        Self { singles, grid: grid.clone(), next: 0 }
    }

    pub fn draw(&mut self, rng: &mut ChaCha8Rng) -> FamilySpec {
        let i = self.next;
        self.next += 1;
        if i.is_multiple_of(2) && i / 2 < self.singles.len() {
            self.singles[i / 2].clone()
        } else {
            random_spec(&self.grid, rng)
        }
    }
}
