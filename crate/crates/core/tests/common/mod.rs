#![allow(dead_code)]

use proptest::prelude::*;
use varlp::{Cube, ExponentField, Grid, GridFunction};

/// Line or rectangle with at most `max_cells` cells.
pub fn grid(max_cells: usize) -> impl Strategy<Value = Grid> {
    let line = (1..=max_cells).prop_map(|n| Grid::line(n).unwrap());
    let side = (max_cells as f64).sqrt() as usize;
    let rect = (1..=side.max(1), 1..=side.max(1)).prop_map(|(r, c)| Grid::rect(r, c).unwrap());
    prop_oneof![line, rect]
}

/// Small non-negative integers, so every partial sum is exact.
pub fn int_function(g: &Grid, max: u32) -> impl Strategy<Value = GridFunction> {
    let g = g.clone();
    proptest::collection::vec(0..=max, g.cell_count())
        .prop_map(move |v| GridFunction::new(&g, v.into_iter().map(f64::from).collect()).unwrap())
}

pub fn real_function(g: &Grid) -> impl Strategy<Value = GridFunction> {
    let g = g.clone();
    proptest::collection::vec(prop_oneof![Just(0.0), -50.0..50.0f64, 1e-3..1e-1f64], g.cell_count())
        .prop_map(move |v| GridFunction::new(&g, v).unwrap())
}

pub fn exponent(g: &Grid, p_max: f64) -> impl Strategy<Value = ExponentField> {
    let g = g.clone();
    proptest::collection::vec(1.0..=p_max, g.cell_count())
        .prop_map(move |v| ExponentField::new(&g, v).unwrap())
}

pub fn with_int_function(max_cells: usize, max: u32) -> impl Strategy<Value = GridFunction> {
    grid(max_cells).prop_flat_map(move |g| int_function(&g, max))
}

pub fn with_real_function(max_cells: usize) -> impl Strategy<Value = GridFunction> {
    grid(max_cells).prop_flat_map(|g| real_function(&g))
}

pub fn with_function_and_exponent(
    max_cells: usize,
    p_max: f64,
) -> impl Strategy<Value = (GridFunction, ExponentField)> {
    grid(max_cells).prop_flat_map(move |g| (real_function(&g), exponent(&g, p_max)))
}

/// Some cube of the grid.
pub fn cube_in(g: &Grid) -> impl Strategy<Value = Cube> {
    let cubes = g.all_cubes();
    (0..cubes.len()).prop_map(move |i| cubes[i].clone())
}

/// Largest dyadic cube anchored at the origin.
pub fn origin_dyadic(g: &Grid) -> Cube {
    let s = 1usize << (usize::BITS - 1 - g.max_side().leading_zeros());
    Cube::new(vec![0; g.dim()], s)
}

/// `(Σ |f|^q h^dim)^{1/q}`.
pub fn classical_norm(f: &GridFunction, q: f64) -> f64 {
    let h = f.grid().cell_measure();
    (f.values().iter().map(|v| v.abs().powf(q)).sum::<f64>() * h).powf(1.0 / q)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
