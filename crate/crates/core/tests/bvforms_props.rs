use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use superbv::bvforms::{form_monomials, random_form, random_function, FormAlgebra, Truncation};

const DIMS: [(usize, usize); 5] = [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1)];

fn config(seed: u64) -> Config {
    Config { cases: 64, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn algebra(i: usize) -> FormAlgebra {
    let (n, m) = DIMS[i];
    FormAlgebra::new(n, m).unwrap()
}

proptest! {
    #![proptest_config(config(21))]

    #[test]
    fn differentials_square_to_zero_and_anticommute(i in 0..DIMS.len(), seed in any::<u64>()) {
        let alg = algebra(i);
        let w = random_form(&alg, &mut ChaCha8Rng::seed_from_u64(seed), 4);
        prop_assert!(alg.d(&alg.d(&w)).is_zero());
        prop_assert!(alg.s(&alg.s(&w)).is_zero());
        prop_assert!((&alg.d(&alg.s(&w)) + &alg.s(&alg.d(&w))).is_zero());
    }

    #[test]
    fn bv_laplacian_squares_to_zero(i in 0..DIMS.len(), seed in any::<u64>()) {
        let alg = algebra(i);
        let f = random_function(&alg, &mut ChaCha8Rng::seed_from_u64(seed), Truncation::default(), 5);
        prop_assert!(alg.laplacian(&alg.laplacian(&f)).is_zero());
    }

    #[test]
    fn k_is_a_homotopy_to_the_e3_projection(i in 0..DIMS.len(), seed in any::<u64>()) {
        let alg = algebra(i);
        let f = random_function(&alg, &mut ChaCha8Rng::seed_from_u64(seed), Truncation { p_max: 3, x_max: 3 }, 5);
        let lhs = &alg.laplacian(&alg.homotopy_k(&f).unwrap()) + &alg.homotopy_k(&alg.laplacian(&f)).unwrap();
        prop_assert_eq!(lhs, &f - &alg.project_e3(&f));
    }

    #[test]
    fn hs_plus_sh_scales_each_monomial(i in 0..DIMS.len(), pick in any::<prop::sample::Index>()) {
        let alg = algebra(i);
        let monos = form_monomials(&alg, 2);
        let mono = pick.get(&monos).clone();
        let w = alg.monomial(mono.clone());
        let hs = &alg.h(&alg.s(&w)) + &alg.s(&alg.h(&w));
        prop_assert_eq!(hs, w.scale_int(alg.lambda(&mono)));
    }
}
