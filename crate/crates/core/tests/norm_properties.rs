mod common;

use common::*;
use proptest::prelude::*;
use varlp::modular::{
    check_modular_norm_sandwich, dual_exponent, holder_pairing_check, luxemburg_norm, modular,
    HOLDER_CONSTANT,
};
use varlp::{CellMask, ExponentField, GridFunction, DEFAULT_TOL};

fn full(f: &GridFunction) -> CellMask {
    CellMask::full(f.grid())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn constant_exponent_matches_classical(
        f in with_real_function(64),
        q in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0), 1.0..6.0f64],
    ) {
        let p = ExponentField::constant(f.grid(), q).unwrap();
        let n = luxemburg_norm(&f, &p, &full(&f), DEFAULT_TOL).unwrap();
        prop_assert!(rel_close(n, classical_norm(&f, q), 1e-10));
    }

    #[test]
    fn homogeneous((f, p) in with_function_and_exponent(48, 6.0), c in -20.0..20.0f64) {
        let region = full(&f);
        let n = luxemburg_norm(&f, &p, &region, DEFAULT_TOL).unwrap();
        let nc = luxemburg_norm(&f.scale(c), &p, &region, DEFAULT_TOL).unwrap();
        prop_assert!((nc - c.abs() * n).abs() <= 1e-10 * (c.abs() * n).max(1e-300));
    }

    #[test]
    fn monotone_in_modulus((f, p) in with_function_and_exponent(48, 6.0), shrink in 0.0..1.0f64) {
        let region = full(&f);
        let g = GridFunction::new(
            f.grid(),
            f.values().iter().enumerate().map(|(i, v)| if i % 2 == 0 { v * shrink } else { *v }).collect(),
        ).unwrap();
        let nf = luxemburg_norm(&f, &p, &region, DEFAULT_TOL).unwrap();
        let ng = luxemburg_norm(&g, &p, &region, DEFAULT_TOL).unwrap();
        prop_assert!(ng <= nf * (1.0 + 1e-11));
    }

    #[test]
    fn unit_ball_is_unit_modular((f, p) in with_function_and_exponent(48, 6.0)) {
        let region = full(&f);
        let n = luxemburg_norm(&f, &p, &region, DEFAULT_TOL).unwrap();
        prop_assume!(n > 0.0);
        let rho = modular(&f.scale(1.0 / n), &p, &region).unwrap();
        prop_assert!((1.0 - 8e-9..=1.0 + 1e-9).contains(&rho), "{}", rho);
        if (n - 1.0).abs() > 1e-9 {
            prop_assert_eq!(n < 1.0, modular(&f, &p, &region).unwrap() < 1.0);
        }
    }

    #[test]
    fn sandwich_both_branches((f, p) in with_function_and_exponent(48, 8.0), scale in -6.0..6.0f64) {
        let g = f.scale(scale.exp2());
        let rep = check_modular_norm_sandwich(&g, &p, &full(&g), DEFAULT_TOL).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep);
    }

    #[test]
    fn region_restriction_agrees((f, p) in with_function_and_exponent(32, 5.0), bits in any::<u64>()) {
        let g = f.grid().clone();
        let mask = CellMask::from_bools(&g, (0..g.cell_count()).map(|i| bits >> (i % 64) & 1 == 1).collect()).unwrap();
        let a = luxemburg_norm(&f, &p, &mask, DEFAULT_TOL).unwrap();
        let b = luxemburg_norm(&f.restrict(&mask), &p, &full(&f), DEFAULT_TOL).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dual_is_an_involution(p in grid(32).prop_flat_map(|g| exponent(&g, 8.0))) {
        prop_assume!(p.p_minus() > 1.0 + 1e-6);
        let back = dual_exponent(&dual_exponent(&p).unwrap()).unwrap();
        for (a, b) in p.values().iter().zip(back.values()) {
            prop_assert!(rel_close(*a, *b, 1e-9));
        }
    }

    #[test]
    fn holder_pairing_bounded(
        (f, p) in with_function_and_exponent(32, 5.0),
        seed in any::<u64>(),
    ) {
        prop_assume!(p.p_minus() > 1.0 + 1e-6);
        let g = GridFunction::new(
            f.grid(),
            (0..f.grid().cell_count()).map(|i| ((seed >> (i % 61)) & 7) as f64 - 3.0).collect(),
        ).unwrap();
        let rep = holder_pairing_check(&f, &g, &p, &full(&f), HOLDER_CONSTANT, DEFAULT_TOL).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }
}

#[test]
fn dual_requires_p_minus_above_one() {
    let g = varlp::Grid::line(3).unwrap();
    let p = ExponentField::new(&g, vec![1.0, 2.0, 3.0]).unwrap();
    assert!(dual_exponent(&p).is_err());
}
