use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::unitary::{matrix_of, random_unitary};

fn embed(a: &UnitaryMatrix, below: usize, above: usize) -> UnitaryMatrix {
    UnitaryMatrix::identity(above)
        .direct_sum(a)
        .direct_sum(&UnitaryMatrix::identity(below))
}

fn random_split(rng: &mut ChaCha8Rng, max: usize) -> Split {
    let size = rng.gen_range(1..=max);
    let n = rng.gen_range(0..=size);
    let m = rng.gen_range(0..=size);
    Split {
        n,
        n_aux: size - n,
        m,
        m_aux: size - m,
    }
}

#[test]
fn counts_match_layout() {
    for n in 0..6 {
        let t = TriangleParams::identity(n);
        assert_eq!(t.bs_slots(), n * n.saturating_sub(1) / 2);
        assert_eq!(t.phase_slots(), n * (n + 1) / 2);
    }
}

#[test]
fn identity_synthesizes_to_empty_circuit() {
    let t = synthesize_triangle(&UnitaryMatrix::identity(4)).unwrap();
    assert_eq!(t, TriangleParams::identity(4));
    let c = triangle_to_circuit(&t).unwrap();
    assert_eq!(c.generator_count(), 0);
}

#[test]
fn random_unitaries_round_trip() {
    for seed in 0..40 {
        let n = 1 + (seed as usize % 7);
        let u = random_unitary(n, seed);
        let t = synthesize_triangle(&u).unwrap();
        assert_eq!(t.invariant_violation(), None);
        let c = triangle_to_circuit(&t).unwrap();
        let back = matrix_of(&c).unwrap();
        assert!(back.max_diff(&u) < 1e-10, "seed {seed}: {}", back.max_diff(&u));
        assert!(t.matrix().max_diff(&u) < 1e-10);
    }
}

#[test]
fn permutations_and_phases_round_trip() {
    // Exact zeros and pi/2 angles exercise the snapping branches.
    let c = Circuit::from_sequence(
        4,
        vec![
            Generator::bs(0, FRAC_PI_2),
            Generator::ps(2, 1.0),
            Generator::bs(2, FRAC_PI_2),
            Generator::bs(1, FRAC_PI_4),
        ],
    )
    .unwrap();
    let u = matrix_of(&c).unwrap();
    let t = synthesize_triangle(&u).unwrap();
    assert_eq!(t.invariant_violation(), None);
    assert!(t.matrix().max_diff(&u) < 1e-12);
}

#[test]
fn synthesis_is_canonical() {
    // Two different circuits with one matrix give one grid.
    let a = Circuit::from_sequence(2, vec![Generator::bs(0, FRAC_PI_4), Generator::ps(0, 0.3)]).unwrap();
    let b = Circuit::from_sequence(
        2,
        vec![
            Generator::ps(0, 0.3),
            Generator::ps(1, 0.3),
            Generator::bs(0, FRAC_PI_4),
            Generator::ps(1, std::f64::consts::TAU - 0.3),
        ],
    )
    .unwrap();
    let ta = synthesize_triangle(&matrix_of(&a).unwrap()).unwrap();
    let tb = synthesize_triangle(&matrix_of(&b).unwrap()).unwrap();
    for (i, j) in ta.phase_indices() {
        assert!(crate::angle::circle_dist(ta.phi(i, j), tb.phi(i, j)) < 1e-10);
    }
    for (i, j) in ta.bs_indices() {
        assert!((ta.theta(i, j) - tb.theta(i, j)).abs() < 1e-10);
    }
}

#[test]
fn rejects_non_unitary() {
    let m = UnitaryMatrix::from_rows(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ])
    .unwrap();
    assert!(matches!(synthesize_triangle(&m), Err(NumericError::NotUnitary { .. })));
}

#[test]
fn path_coefficients_match_matrix() {
    for seed in 0..10 {
        let n = 2 + (seed as usize % 4);
        let t = synthesize_triangle(&random_unitary(n, 100 + seed)).unwrap();
        let m = t.matrix();
        for i in 1..=n {
            for j in 1..=n {
                let p = path_coefficient(&t, i, j).unwrap();
                assert!((p - m.get(i - 1, j - 1)).norm() < 1e-12, "({i},{j})");
            }
        }
    }
    let t = TriangleParams::identity(3);
    assert!(path_coefficient(&t, 0, 1).is_err());
    assert!(path_coefficient(&t, 1, 4).is_err());
}

#[test]
fn tmn_decomposition_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..60 {
        let split = random_split(&mut rng, 6);
        let u = random_unitary(split.size(), 500 + case);
        let dec = synthesize_tmn(&u, split).unwrap();
        let rebuilt = embed(&dec.w_out, 0, split.m)
            .multiply(&dec.triangle.matrix())
            .unwrap()
            .multiply(&embed(&dec.w_in, 0, split.n))
            .unwrap();
        assert!(
            rebuilt.max_diff(&u) < 1e-9,
            "case {case} {split:?}: {}",
            rebuilt.max_diff(&u)
        );
        let class = classify(&dec.triangle, split);
        assert!(
            !matches!(class, TriangleClass::NotTriangular(ref why) if !why.starts_with("property 4")),
            "case {case} {split:?}: {class:?}"
        );
        assert_eq!(
            reachability_violation(&dec.triangle, split),
            None,
            "case {case} {split:?}"
        );
    }
}

#[test]
fn tmn_keeps_visible_block() {
    let split = Split {
        n: 2,
        n_aux: 2,
        m: 3,
        m_aux: 1,
    };
    let u = random_unitary(4, 42);
    let t = synthesize_tmn(&u, split).unwrap().triangle.matrix();
    for i in 0..3 {
        for j in 0..2 {
            assert!((t.get(i, j) - u.get(i, j)).norm() < 1e-10);
        }
    }
}

fn random_grid(rng: &mut ChaCha8Rng, size: usize) -> TriangleParams {
    let mut t = TriangleParams::identity(size);
    for (i, j) in t.clone().bs_indices() {
        let roll: f64 = rng.gen();
        let v = if roll < 0.3 { 0.0 } else { rng.gen_range(0.1..FRAC_PI_2) };
        t.set_theta(i, j, v);
    }
    for (i, j) in t.clone().phase_indices() {
        if rng.gen_bool(0.6) {
            t.set_phi(i, j, rng.gen_range(0.1..6.2));
        }
    }
    t.enforce_invariants();
    t
}

#[test]
fn literal_properties_agree_with_reachability() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 2];
    for _ in 0..3000 {
        let size = rng.gen_range(2..=6);
        let t = random_grid(&mut rng, size);
        let n = rng.gen_range(0..=size);
        let m = rng.gen_range(0..=size);
        let split = Split {
            n,
            n_aux: size - n,
            m,
            m_aux: size - m,
        };
        let literal = input_property(&t, n).is_none() && output_property(&t, m).is_none();
        let sim = reachability_violation(&t, split).is_none();
        assert_eq!(literal, sim, "{t:?} {split:?}");
        seen[literal as usize] += 1;
    }
    assert!(seen[0] > 100 && seen[1] > 100, "{seen:?}");
}

fn random_trec(rng: &mut ChaCha8Rng, n_aux: usize, m_aux: usize) -> TriangleParams {
    let mut t = TriangleParams::identity(n_aux + m_aux);
    for i in 1..=n_aux {
        for j in 1..=m_aux {
            t.set_theta(i, j, rng.gen_range(0.05..FRAC_PI_2 - 0.05));
            t.set_phi(i, j, rng.gen_range(0.0..6.2));
        }
    }
    t.enforce_invariants();
    t
}

#[test]
fn rectangles_classify_as_trec() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (a, b) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let t = random_trec(&mut rng, a, b);
        let split = Split {
            n: b,
            n_aux: a,
            m: a,
            m_aux: b,
        };
        assert_eq!(classify(&t, split), TriangleClass::Trec(split));
    }
}

#[test]
fn classify_reports_failures() {
    let t = TriangleParams::identity(3);
    let bad = Split {
        n: 1,
        n_aux: 1,
        m: 2,
        m_aux: 0,
    };
    assert!(matches!(classify(&t, bad), TriangleClass::NotTriangular(_)));
    let plain = Split {
        n: 3,
        n_aux: 0,
        m: 3,
        m_aux: 0,
    };
    assert_eq!(classify(&t, plain), TriangleClass::PlainT);
    let mut lone = TriangleParams::identity(3);
    lone.set_theta(2, 1, 0.4);
    let s = Split {
        n: 1,
        n_aux: 2,
        m: 3,
        m_aux: 0,
    };
    match classify(&lone, s) {
        TriangleClass::NotTriangular(why) => assert!(why.contains("property 2"), "{why}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn extract_trec_factors_tmn() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut done = 0;
    for case in 0..200 {
        let split = random_split(&mut rng, 6);
        let u = random_unitary(split.size(), 900 + case);
        let t = synthesize_tmn(&u, split).unwrap().triangle;
        if !matches!(classify(&t, split), TriangleClass::Tmn(_) | TriangleClass::Trec(_)) {
            continue;
        }
        let f = match extract_trec(&t, split) {
            Ok(f) => f,
            Err(NumericError::NotTmn(_)) if split.n < split.m_aux || split.m < split.n_aux => continue,
            Err(e) => panic!("case {case} {split:?}: {e}"),
        };
        let r0 = split.n - split.m_aux;
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            split.n_aux,
            f.aux_phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ));
        let first = matrix_of(&f.d)
            .unwrap()
            .direct_sum(&UnitaryMatrix::from_matrix(phases).unwrap());
        let mid = embed(&f.diamond.matrix(), 0, r0);
        let last = embed(&matrix_of(&f.d2).unwrap(), split.m_aux, 0);
        let prod = last.multiply(&mid).unwrap().multiply(&first).unwrap();
        assert!(
            prod.max_diff(&t.matrix()) < 1e-8,
            "case {case} {split:?}: {}",
            prod.max_diff(&t.matrix())
        );
        done += 1;
    }
    assert!(done > 20, "{done}");
}

proptest! {
    #[test]
    fn synthesis_round_trips(n in 1usize..6, seed in any::<u64>()) {
        let u = random_unitary(n, seed);
        let t = synthesize_triangle(&u).unwrap();
        prop_assert!(t.invariant_violation().is_none());
        prop_assert!(t.matrix().max_diff(&u) < 1e-10);
    }
}
