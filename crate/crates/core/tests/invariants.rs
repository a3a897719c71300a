use lov_core::analysis::{check_axiom, random_lopp, AxiomId};
use lov_core::fock::{eval_circuit, EvalConfig, FockVector, Occupation};
use lov_core::rewrite::{nf_equal, normalize};
use lov_core::unitary::matrix_of;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passive_circuits_preserve_norm(seed in any::<u64>(), occ in prop::collection::vec(0u32..=3, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_lopp(&mut rng, 3, 12);
        let total: u32 = occ.iter().sum();
        let out = eval_circuit(&c, &FockVector::basis(Occupation(occ)), &EvalConfig::default()).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!(out.iter().all(|(o, _)| o.total() == total));
        prop_assert!(matrix_of(&c).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn normalization_is_idempotent_on_passive_circuits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_lopp(&mut rng, 3, 10);
        let nf = normalize(&c).unwrap();
        prop_assert!(nf_equal(&nf, &normalize(&nf.render()).unwrap()));
    }

    #[test]
    fn axioms_hold_on_random_instances(seed in any::<u64>(), k in 0usize..AxiomId::ALL.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(check_axiom(AxiomId::ALL[k], &mut rng, 3).unwrap() < 1e-9);
    }
}
