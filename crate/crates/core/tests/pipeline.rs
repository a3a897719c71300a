use lov_core::analysis::{equiv, random_circuit, EquivConfig, EquivVerdict, RandomCircuitConfig};
use lov_core::dsl::{from_json, parse_dsl, print_dsl, to_json};
use lov_core::fock::{eval_circuit, EvalConfig, FockVector};
use lov_core::gallery;
use lov_core::rewrite::{nf_equal, normalize, semantic_residual, Normalized};
use lov_core::synthesis::{synthesize_triangle, triangle_to_circuit};
use lov_core::unitary::random_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dsl_and_json_round_trip_the_gallery() {
    for c in [
        gallery::cz_heralded(),
        gallery::cz_heralded_embedded(),
        gallery::bell_generator(),
    ] {
        let text = print_dsl(&c);
        let again = parse_dsl(&text).unwrap();
        assert_eq!(print_dsl(&again), text);
        let back = from_json(&to_json(&c)).unwrap();
        assert_eq!(print_dsl(&back), text);
    }
}

#[test]
fn synthesized_triangle_normalizes_to_itself() {
    let u = random_unitary(5, 11);
    let c = triangle_to_circuit(&synthesize_triangle(&u).unwrap()).unwrap();
    let Normalized::Normal(nf) = normalize(&c).unwrap() else {
        panic!("zero form for a unitary")
    };
    assert_eq!((nf.n_aux, nf.m_aux), (0, 0));
    assert!(nf.triangle.matrix().max_diff(&u) < 1e-9);
}

#[test]
fn normal_forms_keep_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let c = random_circuit(&mut rng, &RandomCircuitConfig::default());
        let nf = normalize(&c).unwrap();
        assert!(semantic_residual(&c, &nf.render(), 3).unwrap() < 1e-8);
        assert!(nf_equal(&nf, &normalize(&nf.render()).unwrap()));
    }
}

#[test]
fn equiv_separates_and_identifies() {
    let cfg = EquivConfig::with_cutoff(4);
    let a = parse_dsl("circuit 2 -> 2\nbs 0 0.4\n---\nps 0 0.1\n").unwrap();
    let same = parse_dsl("circuit 2 -> 2\nbs 0 0.4\n---\nps 0 6.383185307179586\n").unwrap();
    let other = parse_dsl("circuit 2 -> 2\nbs 0 0.5\n---\nps 0 0.1\n").unwrap();
    assert_eq!(equiv(&a, &same, &cfg).unwrap(), EquivVerdict::EquivalentNf);
    assert!(!equiv(&a, &other, &cfg).unwrap().is_equivalent());
    assert!(equiv(&gallery::cz_heralded(), &gallery::cz_heralded_embedded(), &cfg)
        .unwrap()
        .is_equivalent());
}

#[test]
fn heralded_cz_flips_one_sign() {
    let c = gallery::cz_heralded();
    let amp = |bits: [bool; 2]| {
        let occ = gallery::dual_rail(&bits);
        eval_circuit(&c, &FockVector::basis(occ.clone()), &EvalConfig::default())
            .unwrap()
            .get(&occ)
    };
    let base = amp([false, false]);
    assert!((amp([true, true]) + base).norm() < 1e-12);
    assert!((amp([true, false]) - base).norm() < 1e-12);
}
