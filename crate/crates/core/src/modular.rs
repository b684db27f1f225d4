//! Exponent fields, grid functions, the modular `ϱ(f) = ∫ |f|^{p(x)} dx` and
//! the Luxemburg norm.

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::grid::{CellMask, Cube, Grid};

/// Cell-wise values of a measurable function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRecord")]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

/// Cell-wise exponent `p(·)` with `1 <= p < inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRecord")]
pub struct ExponentField {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct FieldRecord {
    grid: Grid,
    values: Vec<f64>,
}

impl TryFrom<FieldRecord> for GridFunction {
    type Error = Error;
    fn try_from(r: FieldRecord) -> Result<Self> {
        GridFunction::new(&r.grid, r.values)
    }
}

impl TryFrom<FieldRecord> for ExponentField {
    type Error = Error;
    fn try_from(r: FieldRecord) -> Result<Self> {
        ExponentField::new(&r.grid, r.values)
    }
}

fn check_len(grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.cell_count() {
        return Err(Error::LengthMismatch { expected: grid.cell_count(), got: values.len() });
    }
    Ok(())
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        check_len(grid, &values)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.cell_count()] }
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cell_count()])
    }

    /// Indicator function of a mask.
    pub fn indicator(mask: &CellMask) -> Self {
        let values = mask.as_slice().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        Self { grid: mask.grid().clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn abs(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `f χ_region`.
    pub fn restrict(&self, region: &CellMask) -> Self {
        let values = self
            .values
            .iter()
            .zip(region.as_slice())
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Superlevel set `{|f| > alpha}`.
    pub fn superlevel(&self, alpha: f64) -> CellMask {
        let members = self.values.iter().map(|v| v.abs() > alpha).collect();
        CellMask::from_bools(&self.grid, members).expect("same grid")
    }

    /// `⟨|f|⟩_Q`.
    pub fn abs_mean(&self, grid_cube: &Cube) -> f64 {
        let cells = self.grid.cells_of(grid_cube);
        cells.iter().map(|&c| self.values[c].abs()).sum::<f64>() / cells.len() as f64
    }
}

impl ExponentField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        check_len(grid, &values)?;
        for (cell, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value >= 1.0) {
                return Err(Error::ExponentOutOfRange { cell, value });
            }
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn constant(grid: &Grid, p: f64) -> Result<Self> {
        Self::new(grid, vec![p; grid.cell_count()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values as a grid function (for rearrangements of `p` itself).
    pub fn as_function(&self) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.clone() }
    }

    /// `p_-(region)`; `None` on an empty region.
    pub fn p_minus_on(&self, region: &CellMask) -> Option<f64> {
        self.on(region).reduce(f64::min)
    }

    /// `p_+(region)`; `None` on an empty region.
    pub fn p_plus_on(&self, region: &CellMask) -> Option<f64> {
        self.on(region).reduce(f64::max)
    }

    pub fn p_minus(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_plus(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus() == self.p_plus()
    }

    fn on<'a>(&'a self, region: &'a CellMask) -> impl Iterator<Item = f64> + 'a {
        self.values.iter().zip(region.as_slice()).filter_map(|(&p, &m)| m.then_some(p))
    }
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `Σ_{c ∈ region} |f(c)|^{p(c)} h^dim`.
pub fn modular(f: &GridFunction, p: &ExponentField, region: &CellMask) -> Result<f64> {
    same_grid(f.grid(), p.grid())?;
    same_grid(f.grid(), region.grid())?;
    Ok(scaled_modular(f.values(), p.values(), region.as_slice(), 1.0) * f.grid().cell_measure())
}

/// `Σ (|f|/λ)^p` over the region, without the cell measure.
fn scaled_modular(f: &[f64], p: &[f64], region: &[bool], lambda: f64) -> f64 {
    f.iter()
        .zip(p)
        .zip(region)
        .filter(|&((&v, _), &m)| m && v != 0.0)
        .map(|((&v, &e), _)| (v.abs() / lambda).powf(e))
        .sum()
}

/// Luxemburg norm `inf{λ > 0 : ϱ(f/λ) <= 1}` of `f χ_region`, by bisection.
///
/// The initial bracket is the modular sandwich
/// `ϱ^{1/p_-} <= ‖f‖ <= ϱ^{1/p_+}` when `ϱ <= 1` (reversed when `ϱ > 1`),
/// widened if rounding pushes the root outside it. The result `λ*` satisfies
/// `|λ* - ‖f‖| <= tol · λ*`.
pub fn luxemburg_norm(
    f: &GridFunction,
    p: &ExponentField,
    region: &CellMask,
    tol: f64,
) -> Result<f64> {
    same_grid(f.grid(), p.grid())?;
    same_grid(f.grid(), region.grid())?;
    check_param("tol", tol, tol > 0.0, "(0, inf)")?;
    Ok(norm_of_values(f.values(), p.values(), region.as_slice(), f.grid().cell_measure(), tol))
}

/// Slice-level norm solver shared by the searches.
pub(crate) fn norm_of_values(
    f: &[f64],
    p: &[f64],
    region: &[bool],
    cell_measure: f64,
    tol: f64,
) -> f64 {
    let mut p_lo = f64::INFINITY;
    let mut p_hi = f64::NEG_INFINITY;
    for ((&v, &e), &m) in f.iter().zip(p).zip(region) {
        if m && v != 0.0 {
            p_lo = p_lo.min(e);
            p_hi = p_hi.max(e);
        }
    }
    if !p_lo.is_finite() {
        return 0.0;
    }
    // ϱ(f/λ) in the measure-weighted sense.
    let rho = |lambda: f64| scaled_modular(f, p, region, lambda) * cell_measure;
    let r1 = rho(1.0);
    let (mut lo, mut hi) = if r1 <= 1.0 {
        (r1.powf(1.0 / p_lo), r1.powf(1.0 / p_hi))
    } else {
        (r1.powf(1.0 / p_hi), r1.powf(1.0 / p_lo))
    };
    if lo == hi {
        // Constant exponent on the support: the sandwich is the norm.
        return lo;
    }
    while rho(hi) > 1.0 {
        hi *= 1.0 + 1e-8;
    }
    while lo > 0.0 && rho(lo) <= 1.0 {
        lo *= 1.0 - 1e-8;
    }
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `p'(c) = p(c) / (p(c) - 1)`.
pub fn dual_exponent(p: &ExponentField) -> Result<ExponentField> {
    if p.p_minus() <= 1.0 {
        return Err(Error::DualUndefined);
    }
    let values = p.values().iter().map(|&e| e / (e - 1.0)).collect();
    ExponentField::new(p.grid(), values)
}

/// Both sides of the modular/norm sandwich for one `(f, p, region)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub norm: f64,
    pub modular: f64,
    pub lower: f64,
    pub upper: f64,
    /// `‖f χ_Ω‖ > 1`, selecting the branch of the sandwich.
    pub above_one: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Checks `ϱ^{1/p_+} <= ‖f‖ <= ϱ^{1/p_-}` when `‖f‖ > 1` and the reversed
/// exponents when `‖f‖ <= 1`, with slack `10 tol` relative to the norm.
pub fn check_modular_norm_sandwich(
    f: &GridFunction,
    p: &ExponentField,
    region: &CellMask,
    tol: f64,
) -> Result<SandwichReport> {
    let p_minus = p.p_minus_on(region).ok_or_else(|| Error::Precondition("empty region".into()))?;
    let p_plus = p.p_plus_on(region).expect("nonempty region");
    let norm = luxemburg_norm(f, p, region, tol)?;
    let rho = modular(f, p, region)?;
    let above_one = norm > 1.0;
    let (lower, upper) = if above_one {
        (rho.powf(1.0 / p_plus), rho.powf(1.0 / p_minus))
    } else {
        (rho.powf(1.0 / p_minus), rho.powf(1.0 / p_plus))
    };
    let slack = 10.0 * tol * norm.max(1.0);
    Ok(SandwichReport {
        norm,
        modular: rho,
        lower,
        upper,
        above_one,
        lower_holds: lower <= norm + slack,
        upper_holds: norm <= upper + slack,
    })
}

/// Default constant in the Hölder pairing bound.
pub const HOLDER_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `∫ |f g|` over the region.
    pub pairing: f64,
    pub norm_f: f64,
    /// `‖g‖` in the dual exponent.
    pub norm_g_dual: f64,
    /// `constant · ‖f‖_{p(·)} · ‖g‖_{p'(·)}`.
    pub bound: f64,
    /// `pairing / (‖f‖ ‖g‖')`, or 0 when either norm vanishes.
    pub empirical_constant: f64,
    pub holds: bool,
}

/// Hölder-type pairing check `∫|fg| <= constant ‖f‖_{p(·)} ‖g‖_{p'(·)}`.
pub fn holder_pairing_check(
    f: &GridFunction,
    g: &GridFunction,
    p: &ExponentField,
    region: &CellMask,
    constant: f64,
    tol: f64,
) -> Result<HolderReport> {
    same_grid(f.grid(), g.grid())?;
    let dual = dual_exponent(p)?;
    let norm_f = luxemburg_norm(f, p, region, tol)?;
    let norm_g_dual = luxemburg_norm(g, &dual, region, tol)?;
    let pairing = f
        .values()
        .iter()
        .zip(g.values())
        .zip(region.as_slice())
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| (a * b).abs())
        .sum::<f64>()
        * f.grid().cell_measure();
    let bound = constant * norm_f * norm_g_dual;
    let denom = norm_f * norm_g_dual;
    Ok(HolderReport {
        pairing,
        norm_f,
        norm_g_dual,
        bound,
        empirical_constant: if denom > 0.0 { pairing / denom } else { 0.0 },
        holds: pairing <= bound * (1.0 + 1e-12),
    })
}
