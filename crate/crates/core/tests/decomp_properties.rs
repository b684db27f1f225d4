mod common;

use common::*;
use proptest::prelude::*;
use varlp::decomp::{besicovitch_extract, build_cz_levels, cz_decompose, MarkedCube};
use varlp::maximal::dyadic_maximal_on_cube;
use varlp::{reference, CellMask, Grid, GridFunction};

fn marked(g: &Grid, picks: &[(usize, usize)], r: f64) -> Vec<MarkedCube> {
    let cubes = g.all_cubes();
    picks
        .iter()
        .filter_map(|&(i, j)| {
            let cube = cubes[i % cubes.len()].clone();
            let core = g.core_cells(&cube, r).unwrap().cells();
            (!core.is_empty()).then(|| MarkedCube { cell: core[j % core.len()], cube })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cz_union_is_dyadic_superlevel_set(v in with_int_function(64, 12), level in 1u32..40) {
        let g = v.grid();
        let root = origin_dyadic(g);
        let threshold = f64::from(level) / 4.0;
        let cubes = cz_decompose(&v, &root, threshold).unwrap();
        let mut union = CellMask::empty(g);
        for (i, q) in cubes.iter().enumerate() {
            prop_assert!(q.side.is_power_of_two() && root.contains_cube(q));
            prop_assert!(v.abs_mean(q) > threshold);
            for other in &cubes[..i] {
                prop_assert!(!other.intersects(q));
            }
            union = union.union(&CellMask::from_cube(g, q).unwrap());
        }
        let local = dyadic_maximal_on_cube(&v, &root).unwrap();
        let brute = reference::dyadic_maximal(g, &v, &root);
        for (c, b) in g.cells_of(&root).into_iter().zip(brute) {
            let m = local.get(c).unwrap();
            prop_assert_eq!(m, b);
            prop_assert_eq!(union.contains(c), m > threshold);
        }
    }

    #[test]
    fn cz_levels_leave_large_remainders(
        v in with_int_function(64, 40),
        lambda in 0.05..0.95f64,
    ) {
        let root = origin_dyadic(v.grid());
        let levels = build_cz_levels(&v, &root, lambda, 0..=4).unwrap();
        prop_assert!(levels.fraction_holds && levels.nested);
        for level in &levels.levels {
            for p in &level.cubes {
                prop_assert!(p.remainder.len() as f64 >= lambda * p.cube.cell_count() as f64);
                prop_assert!(p.remainder_fraction >= lambda);
            }
        }
    }

    #[test]
    fn extraction_covers_and_splits(
        g in grid(64),
        picks in proptest::collection::vec((0..10_000usize, 0..64usize), 1..40),
        r in prop_oneof![Just(0.5), 0.1..0.95f64],
    ) {
        let points = marked(&g, &picks, r);
        let ext = besicovitch_extract(&g, &points, r).unwrap();
        for p in &points {
            let xy = g.coords(p.cell);
            prop_assert!(ext.subcover().iter().any(|q| q.contains_coords(xy)));
        }
        let mut seen = vec![false; ext.selected.len()];
        for fam in &ext.subfamilies {
            for (i, &a) in fam.iter().enumerate() {
                prop_assert!(!seen[a]);
                seen[a] = true;
                for &b in &fam[..i] {
                    let (qa, qb) = (&points[ext.selected[a]].cube, &points[ext.selected[b]].cube);
                    prop_assert!(!qa.intersects(qb));
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert_eq!(&besicovitch_extract(&g, &points, r).unwrap(), &ext);
    }

    #[test]
    fn half_core_extraction_on_a_line_uses_few_subfamilies(
        n in 1usize..64,
        picks in proptest::collection::vec((0..10_000usize, 0..64usize), 1..60),
    ) {
        let g = Grid::line(n).unwrap();
        let ext = besicovitch_extract(&g, &marked(&g, &picks, 0.5), 0.5).unwrap();
        prop_assert!(ext.subfamily_count() <= 4, "{}", ext.subfamily_count());
    }
}

#[test]
fn cz_rejects_bad_input() {
    let g = Grid::line(4).unwrap();
    let v = GridFunction::new(&g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!(cz_decompose(&v, &varlp::Cube::new(vec![0], 3), 1.0).is_err());
    assert!(build_cz_levels(&v, &varlp::Cube::new(vec![0], 4), 1.0, 0..=2).is_err());
}
