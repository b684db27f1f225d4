//! The family testing condition comparing `Σ t_Q χ_Q` with `Σ t_Q χ_{E_Q}`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::families::FamilyStream;
use super::{check_budget, full_norm, names, scan, ConditionReport, RunningBest, Witness};
use crate::ceil_count;
use crate::error::{check_param, Error, Result};
use crate::maximal::{FamilyMember, WeightedFamily};
use crate::modular::ExponentField;

/// Maximum number of subset refinement rounds.
const ROUNDS: usize = 10;

/// `‖Σ t_Q χ_Q‖ / ‖Σ t_Q χ_{E_Q}‖`, requiring `|E_Q| >= λ|Q|` for all members.
pub fn ainfty_ratio(p: &ExponentField, lambda: f64, family: &WeightedFamily) -> Result<f64> {
    check_param("lambda", lambda, lambda > 0.0 && lambda <= 1.0, "(0, 1]")?;
    if family.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    family.check_subset_fraction(lambda)?;
    let den = full_norm(p, family.subset_sum()?.values());
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(full_norm(p, family.indicator_sum().values()) / den)
}

/// Replaces every subset with the `⌈λ #Q⌉` cells minimising `(t_Q/μ)^{p(c)}`,
/// where `μ` is the current denominator norm, repeating until the subsets
/// stop changing (at most ten rounds). Ties go to the lower cell index.
pub fn adversarial_subsets(
    p: &ExponentField,
    lambda: f64,
    family: &WeightedFamily,
) -> Result<WeightedFamily> {
    check_param("lambda", lambda, lambda > 0.0 && lambda <= 1.0, "(0, 1]")?;
    if family.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = p.grid();
    let cells: Vec<Vec<usize>> = family.members().iter().map(|m| grid.cells_of(&m.cube)).collect();
    let mut mu = full_norm(p, family.indicator_sum().values());
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for _ in 0..ROUNDS {
        let next: Vec<Vec<usize>> = family
            .members()
            .iter()
            .zip(&cells)
            .map(|(m, q)| {
                let scale = (m.weight / mu).ln();
                let mut keyed: Vec<(f64, usize)> =
                    q.iter().map(|&c| (scale * p.values()[c], c)).collect();
                keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut kept: Vec<usize> =
                    keyed[..ceil_count(lambda, q.len())].iter().map(|&(_, c)| c).collect();
                kept.sort_unstable();
                kept
            })
            .collect();
        if next == subsets {
            break;
        }
        subsets = next;
        let mut v = vec![0.0; grid.cell_count()];
        for (m, s) in family.members().iter().zip(&subsets) {
            for &c in s {
                v[c] = m.weight;
            }
        }
        mu = full_norm(p, &v);
        if mu == 0.0 {
            break;
        }
    }
    let members = family
        .members()
        .iter()
        .zip(subsets)
        .map(|(m, s)| FamilyMember::with_subset(m.cube.clone(), m.weight, s))
        .collect();
    WeightedFamily::new(grid, members)
}

/// Seeded lower bound for the best constant of the family condition at
/// fraction `λ`.
pub fn ainfty_search(
    p: &ExponentField,
    lambda: f64,
    budget: u64,
    seed: u64,
) -> Result<ConditionReport> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    check_budget(budget)?;
    let start = Instant::now();
    let grid = p.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = FamilyStream::new(grid);
    let mut best = RunningBest::new();
    let evaluations = scan(
        budget,
        || stream.draw(&mut rng),
        |spec| {
            let weights = spec.resolve(p);
            let members = spec
                .cubes
                .iter()
                .zip(weights)
                .map(|(q, t)| FamilyMember::new(q.clone(), t))
                .collect();
            let family = WeightedFamily::new(grid, members).ok()?;
            let family = adversarial_subsets(p, lambda, &family).ok()?;
            let ratio = ainfty_ratio(p, lambda, &family).ok()?;
            Some((ratio, family))
        },
        &mut best,
    );
    Ok(ConditionReport {
        condition: names::AINFTY.into(),
        parameters: BTreeMap::from([("lambda".to_string(), lambda)]),
        seed,
        budget,
        best_ratio: best.ratio.max(0.0),
        witness: best.witness.map_or(Witness::None, |family| Witness::Family { family }),
        evaluations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cube, Grid};

    #[test]
    fn constant_two_half_cube() {
        let g = Grid::line(2).unwrap();
        let p = ExponentField::constant(&g, 2.0).unwrap();
        let fam = WeightedFamily::new(
            &g,
            vec![FamilyMember::with_subset(Cube::new(vec![0], 2), 1.0, vec![1])],
        )
        .unwrap();
        assert!((ainfty_ratio(&p, 0.5, &fam).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn full_subsets_give_one() {
        let g = Grid::line(8).unwrap();
        let p = ExponentField::new(&g, (0..8).map(|i| 1.0 + i as f64 * 0.3).collect()).unwrap();
        let fam = WeightedFamily::new(
            &g,
            vec![
                FamilyMember::with_subset(Cube::new(vec![0], 3), 0.7, vec![0, 1, 2]),
                FamilyMember::with_subset(Cube::new(vec![4], 4), 2.5, vec![4, 5, 6, 7]),
            ],
        )
        .unwrap();
        assert_eq!(ainfty_ratio(&p, 0.6, &fam).unwrap(), 1.0);
    }

    #[test]
    fn ratio_errors() {
        let g = Grid::line(4).unwrap();
        let p = ExponentField::constant(&g, 2.0).unwrap();
        let q = Cube::new(vec![0], 4);
        let missing = WeightedFamily::new(&g, vec![FamilyMember::new(q.clone(), 1.0)]).unwrap();
        assert_eq!(ainfty_ratio(&p, 0.5, &missing), Err(Error::MissingSubset(0)));
        let small =
            WeightedFamily::new(&g, vec![FamilyMember::with_subset(q.clone(), 1.0, vec![0])])
                .unwrap();
        assert!(matches!(ainfty_ratio(&p, 0.5, &small), Err(Error::SubsetTooSmall { .. })));
        let zero =
            WeightedFamily::new(&g, vec![FamilyMember::with_subset(q, 0.0, vec![0, 1])]).unwrap();
        assert_eq!(ainfty_ratio(&p, 0.5, &zero), Err(Error::ZeroDenominator));
    }

    #[test]
    fn adversarial_keeps_high_exponents_for_small_weights() {
        let g = Grid::line(4).unwrap();
        let p = ExponentField::new(&g, vec![1.0, 3.0, 1.0, 3.0]).unwrap();
        let fam =
            WeightedFamily::new(&g, vec![FamilyMember::new(Cube::new(vec![0], 4), 0.1)]).unwrap();
        let adv = adversarial_subsets(&p, 0.5, &fam).unwrap();
        assert_eq!(adv.members()[0].subset.as_deref(), Some(&[1, 3][..]));
    }

    #[test]
    fn search_hits_constant_extremum() {
        let g = Grid::line(16).unwrap();
        let p = ExponentField::constant(&g, 2.0).unwrap();
        for lambda in [0.25, 0.5, 0.75] {
            let rep = ainfty_search(&p, lambda, 300, 7).unwrap();
            let exact = lambda.powf(-0.5);
            assert!((rep.best_ratio - exact).abs() < 1e-6, "{lambda}: {}", rep.best_ratio);
            assert!(rep.best_ratio <= exact + 1e-9);
            assert_eq!(rep.reevaluate(&p).unwrap(), rep.best_ratio);
        }
    }
}
