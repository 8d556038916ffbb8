mod common;

use galedual::desksolver::{solve_sparse, SolverConfig};
use galedual::exactlat::{
    canonical_basis, elementary_divisors, hnf, kernel_basis, lattice_equal, lll_reduce, saturation_index, IntMatrix,
};
use galedual::latpoly::{convex_hull, kouchnirenko_bound, normalized_volume};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{mat_mul, random_bivariate, random_unimodular};

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = IntMatrix> {
    (rows, cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-9i64..=9, c), r).prop_map(move |v| IntMatrix::from_rows(&v, c))
    })
}

fn product(m: &IntMatrix, k: &IntMatrix) -> IntMatrix {
    mat_mul(m, &k.transpose())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_is_saturated_and_annihilates(m in matrix(1..=4, 1..=6)) {
        let k = kernel_basis(&m);
        prop_assert_eq!(k.rows(), m.cols() - m.rank());
        prop_assert!(product(&m, &k).is_zero());
        if k.rows() > 0 {
            prop_assert!(saturation_index(&k).unwrap().is_one());
        }
    }

    #[test]
    fn hnf_is_idempotent(m in matrix(1..=4, 1..=5)) {
        let (h, u) = hnf(&m);
        prop_assert_eq!(mat_mul(&u, &m), h.clone());
        prop_assert_eq!(u.det().abs(), BigInt::one());
        prop_assert_eq!(hnf(&h).0, h);
    }

    #[test]
    fn lll_keeps_the_lattice(m in matrix(1..=3, 3..=5), seed in any::<u64>()) {
        prop_assume!(m.rank() == m.rows());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let skewed = mat_mul(&random_unimodular(&mut rng, m.rows(), 12), &m);
        let r = lll_reduce(&skewed);
        prop_assert!(lattice_equal(&r, &m));
        prop_assert_eq!(canonical_basis(&r), canonical_basis(&m));
    }

    #[test]
    fn elementary_divisors_multiply_to_det(m in matrix(3..=3, 3..=3)) {
        let d = m.det();
        prop_assume!(!d.is_zero());
        let prod: BigInt = elementary_divisors(&m).iter().product();
        prop_assert_eq!(prod, d.abs());
    }

    #[test]
    fn volume_is_unimodular_invariant(seed in any::<u64>(), pts in prop::collection::vec((-5i64..=5, -5i64..=5), 3..8)) {
        let cols: Vec<Vec<BigInt>> = pts.iter().map(|&(a, b)| vec![a.into(), b.into()]).collect();
        let Ok(hull) = convex_hull(&cols) else { return Ok(()) };
        let vol = normalized_volume(&hull);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unimodular(&mut rng, 2, 8);
        let img = mat_mul(&u, &IntMatrix::from_columns(&cols, 2));
        prop_assert_eq!(normalized_volume(&convex_hull(&img.columns()).unwrap()), vol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_systems_respect_the_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(s) = random_bivariate(&mut rng) else { return Ok(()) };
        let Ok(bound) = kouchnirenko_bound(s.support()) else { return Ok(()) };
        let set = solve_sparse(&s, &SolverConfig::default()).unwrap();
        prop_assert!(BigInt::from(set.count_with_multiplicity()) <= bound);
        prop_assert!(set.is_conjugation_closed(1e-6));
        prop_assert!(set.all_verified(1e-9), "max residual {}", set.max_residual());
    }
}
