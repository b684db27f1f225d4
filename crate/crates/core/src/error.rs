use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cube with anchor {anchor:?} and side {side} does not fit the grid")]
    CubeOutsideGrid { anchor: Vec<usize>, side: usize },

    #[error("cell {0} is outside the grid")]
    CellOutsideGrid(usize),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at cell {0}")]
    NonFinite(usize),

    #[error("exponent {value} at cell {cell} is outside [1, inf)")]
    ExponentOutOfRange { cell: usize, value: f64 },

    #[error("dual exponent undefined: p_- = 1 makes p' unbounded")]
    DualUndefined,

    #[error("parameter {name} = {value} outside {range}")]
    Parameter { name: &'static str, value: f64, range: &'static str },

    #[error("cube side {0} is not a power of two")]
    NotDyadic(usize),

    #[error("negative value {value} at cell {cell}")]
    NegativeValue { cell: usize, value: f64 },

    #[error("cubes {0} and {1} of the family overlap")]
    Overlap(usize, usize),

    #[error("subset of family member {0} is not contained in its cube")]
    SubsetOutsideCube(usize),

    #[error("family member {0} has no subset E_Q")]
    MissingSubset(usize),

    #[error("family member {index}: |E_Q| = {subset} cells < lambda |Q| with |Q| = {cube} cells")]
    SubsetTooSmall { index: usize, subset: usize, cube: usize },

    #[error("denominator norm vanishes")]
    ZeroDenominator,

    #[error("marked cell {cell} is not in the r-core of its cube (point {index})")]
    PointOutsideCore { index: usize, cell: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { name, value, range })
    }
}
