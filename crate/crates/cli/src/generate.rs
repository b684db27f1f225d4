//! Exponent field generators.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{ensure, Result};
use serde::{Deserialize, Serialize};
use varlp::{ExponentField, Grid};

use crate::io::read_array;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant {
        p: f64,
    },
    /// `low` on cells whose center lies below `fraction` of the extent
    /// along `axis`, `high` elsewhere.
    TwoValuedSplit {
        low: f64,
        high: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default = "half")]
        fraction: f64,
    },
    /// `base + amplitude · sin(2π c / period)` with `c` the cell index in
    /// 1D and `i + j` in 2D.
    SmoothWave {
        base: f64,
        amplitude: f64,
        period: f64,
    },
    /// `inner` on cells whose center is within `radius` (as a fraction of
    /// the half extent, max norm) of the box center, `outer` elsewhere.
    RadialStep {
        inner: f64,
        outer: f64,
        #[serde(default = "half")]
        radius: f64,
    },
    /// Values read from a CSV or JSON array; the dims must match the grid.
    CustomFromFile {
        path: PathBuf,
    },
}

fn half() -> f64 {
    0.5
}

impl ExponentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::TwoValuedSplit { .. } => "two-valued-split",
            Self::SmoothWave { .. } => "smooth-wave",
            Self::RadialStep { .. } => "radial-step",
            Self::CustomFromFile { .. } => "custom-from-file",
        }
    }
}

/// Builds the field on `grid`. Values must be finite and at least 1.
pub fn generate_exponent(spec: &ExponentSpec, grid: &Grid) -> Result<ExponentField> {
    let n = grid.cell_count();
    let values: Vec<f64> = match spec {
        ExponentSpec::Constant { p } => vec![*p; n],
        ExponentSpec::TwoValuedSplit { low, high, axis, fraction } => {
            ensure!(*axis < grid.dim(), "axis {axis} out of range for a {}D grid", grid.dim());
            let cut = fraction * grid.extent()[*axis] as f64;
            (0..n)
                .map(|c| {
                    let x = grid.coords(c)[*axis] as f64 + 0.5;
                    if x < cut {
                        *low
                    } else {
                        *high
                    }
                })
                .collect()
        }
        ExponentSpec::SmoothWave { base, amplitude, period } => {
            ensure!(*period > 0.0, "period must be positive");
            (0..n)
                .map(|c| {
                    let [i, j] = grid.coords(c);
                    base + amplitude * (2.0 * PI * (i + j) as f64 / period).sin()
                })
                .collect()
        }
        ExponentSpec::RadialStep { inner, outer, radius } => (0..n)
            .map(|c| {
                let xy = grid.coords(c);
                let dist = grid
                    .extent()
                    .iter()
                    .enumerate()
                    .map(|(a, &len)| {
                        let half = len as f64 / 2.0;
                        ((xy[a] as f64 + 0.5 - half) / half).abs()
                    })
                    .fold(0.0, f64::max);
                if dist <= *radius {
                    *inner
                } else {
                    *outer
                }
            })
            .collect(),
        ExponentSpec::CustomFromFile { path } => {
            let a = read_array(path)?;
            ensure!(
                a.dims == grid.extent(),
                "{} has dims {:?}, grid needs {:?}",
                path.display(),
                a.dims,
                grid.extent()
            );
            a.values
        }
    };
    Ok(ExponentField::new(grid, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_split() {
        let g = Grid::line(8).unwrap();
        let p = generate_exponent(&ExponentSpec::Constant { p: 2.0 }, &g).unwrap();
        assert!(p.values().iter().all(|&v| v == 2.0));
        let spec = ExponentSpec::TwoValuedSplit { low: 1.5, high: 3.0, axis: 0, fraction: 0.5 };
        let p = generate_exponent(&spec, &g).unwrap();
        assert_eq!(p.values(), &[1.5, 1.5, 1.5, 1.5, 3.0, 3.0, 3.0, 3.0]);
        let g2 = Grid::rect(2, 4).unwrap();
        let spec = ExponentSpec::TwoValuedSplit { low: 1.5, high: 3.0, axis: 1, fraction: 0.25 };
        let p = generate_exponent(&spec, &g2).unwrap();
        assert_eq!(p.values(), &[1.5, 3.0, 3.0, 3.0, 1.5, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn smooth_wave_extrema() {
        let g = Grid::line(64).unwrap();
        let spec = ExponentSpec::SmoothWave { base: 2.0, amplitude: 0.5, period: 16.0 };
        let p = generate_exponent(&spec, &g).unwrap();
        assert!((p.p_minus() - 1.5).abs() < 1e-12 && (p.p_plus() - 2.5).abs() < 1e-12);
        assert!((p.values()[4] - 2.5).abs() < 1e-12 && (p.values()[12] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn radial_step_centre() {
        let g = Grid::rect(4, 4).unwrap();
        let spec = ExponentSpec::RadialStep { inner: 3.0, outer: 1.5, radius: 0.5 };
        let p = generate_exponent(&spec, &g).unwrap();
        let inner: Vec<usize> = (0..16).filter(|&c| p.values()[c] == 3.0).collect();
        assert_eq!(inner, vec![5, 6, 9, 10]);
    }

    #[test]
    fn rejects_bad_ranges() {
        let g = Grid::line(4).unwrap();
        assert!(generate_exponent(&ExponentSpec::Constant { p: 0.5 }, &g).is_err());
        assert!(generate_exponent(&ExponentSpec::Constant { p: f64::INFINITY }, &g).is_err());
        let wave = ExponentSpec::SmoothWave { base: 1.2, amplitude: 0.5, period: 4.0 };
        assert!(generate_exponent(&wave, &g).is_err());
    }

    #[test]
    fn custom_file_must_match() {
        let dir = std::env::temp_dir().join(format!("varlp-gen-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.csv");
        std::fs::write(&path, "dims,3\n1.5,2,4\n").unwrap();
        let spec = ExponentSpec::CustomFromFile { path };
        let p = generate_exponent(&spec, &Grid::line(3).unwrap()).unwrap();
        assert_eq!(p.values(), &[1.5, 2.0, 4.0]);
        assert!(generate_exponent(&spec, &Grid::line(4).unwrap()).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
