//! Numerical laboratory for variable-exponent Lebesgue spaces `L^{p(·)}` on
//! discretized boxes.
//!
//! Everything here works on uniform grids in one or two dimensions. Cubes are
//! grid-aligned and never leave the box, so averages, rearrangements and
//! maximal functions are evaluated exactly (up to floating point) rather than
//! sampled.
//!
//! * [`grid`]: grids, cubes, cell masks.
//! * [`modular`]: exponent fields, the modular and the Luxemburg norm.
//! * [`maximal`]: rearrangements and the maximal-type operators.
//! * [`decomp`]: Calderón–Zygmund stopping cubes and covering extraction.
//! * [`conditions`]: condition checkers, constant chains and seeded searches.
//! * [`reference`]: slow brute-force versions of the fast operators, used by
//!   the runtime verification suites.

pub mod conditions;
pub mod decomp;
pub mod error;
pub mod grid;
pub mod maximal;
pub mod modular;
pub mod reference;

pub use error::{Error, Result};
pub use grid::{CellMask, Cube, Grid};
pub use maximal::WeightedFamily;
pub use modular::{ExponentField, GridFunction};

/// Default relative tolerance of the Luxemburg norm solver.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `floor(fraction * n)`, snapping products that land within rounding
/// distance of an integer (so `0.3 * 10` counts as 3).
pub(crate) fn floor_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r.max(0.0) as usize
    } else {
        x.floor().max(0.0) as usize
    }
}

/// `ceil(fraction * n)` with the same snapping as [`floor_count`].
pub(crate) fn ceil_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}
