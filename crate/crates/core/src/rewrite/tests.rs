use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuit::{Column, Generator};
use crate::synthesis::synthesize_triangle;

fn seq(n: usize, gens: Vec<Generator>) -> Circuit {
    Circuit::from_sequence(n, gens).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn redex_examples() {
    let r = find_redex(&seq(1, vec![Generator::ps(0, 7.0)])).unwrap().unwrap();
    assert_eq!(r.rule, RuleId::PhaseMod2Pi);
    assert_eq!(r.loc, Location { column: 1, row: 0 });
    let two = seq(
        2,
        vec![Generator::ps(1, 0.3), Generator::ps(0, 1.5), Generator::ps(0, 1.0)],
    );
    let r = find_redex(&two).unwrap().unwrap();
    assert_eq!((r.rule, r.loc), (RuleId::PhaseFusion, Location { column: 1, row: 0 }));
    let fused = apply_rule(&two, r.rule, r.loc).unwrap();
    let ps: Vec<f64> = fused
        .generators()
        .filter_map(|g| match g {
            Generator::PhaseShifter { wire: 0, phi } => Some(phi.value),
            _ => None,
        })
        .collect();
    assert_eq!(ps, vec![2.5]);

    let z = seq(2, vec![Generator::bs(0, 0.0)]);
    let r = find_redex(&z).unwrap().unwrap();
    assert_eq!(r.rule, RuleId::ZeroBs);
    let gone = apply_rule(&z, r.rule, r.loc).unwrap();
    assert_eq!(gone.generators().filter(|g| g.is_lopp()).count(), 0);

    let bad = apply_rule(&z, RuleId::TopPhase, r.loc);
    assert!(matches!(bad, Err(RewriteError::NotARedex { .. })));
}

#[test]
fn ranking_examples() {
    assert_eq!(
        ranking(&Circuit::identity(3)),
        RankTuple {
            x1: 0,
            x2: 0,
            x3: Default::default(),
            x4: 0,
            x5: 0,
            x6: 0
        }
    );
    let f = FockVector::from_terms(2, [(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0))]).unwrap();
    let src = Circuit::new(0, vec![Column::new(vec![Generator::source(0, f)])]).unwrap();
    assert_eq!(ranking(&src).x6, 2);
    assert_eq!(ranking(&seq(2, vec![Generator::bs(0, 1.5 * PI)])).x2, 2);
    assert_eq!(ranking(&seq(2, vec![Generator::bs(0, 3.0 * PI)])).x2, 3);
}

/// Fire `rule` at its first site on `lhs` and compare semantics.
fn fire_and_check(lhs: &Circuit, rule: RuleId) -> f64 {
    let d = Diagram::prepare(lhs);
    let site = rules::sites(&d, rule)
        .unwrap()
        .into_iter()
        .next()
        .expect("rule matches");
    let next = rules::apply(&d, rule, &site).unwrap();
    assert!(rank::rank(&next) < rank::rank(&d), "{rule} did not lower the rank");
    semantic_residual(lhs, &next.to_circuit(), 4).unwrap()
}

#[test]
fn pictorial_rules_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let phi = rng.gen_range(0.01..TAU - 0.01);
        let psi = rng.gen_range(0.01..TAU - 0.01);
        let theta = rng.gen_range(0.01..PI - 0.01);
        let top = seq(
            2,
            vec![Generator::ps(0, phi), Generator::ps(1, psi), Generator::bs(0, theta)],
        );
        assert!(fire_and_check(&top, RuleId::TopPhase) < 1e-9);

        let half = seq(2, vec![Generator::ps(1, phi), Generator::bs(0, FRAC_PI_2)]);
        assert!(fire_and_check(&half, RuleId::PiOver2) < 1e-9);

        let t4 = rng.gen_range(FRAC_PI_2 + 0.01..PI - 0.01);
        assert!(fire_and_check(&seq(2, vec![Generator::bs(0, t4)]), RuleId::ThetaRange) < 1e-9);

        let t5 = rng.gen_range(PI..TAU - 0.01);
        assert!(fire_and_check(&seq(2, vec![Generator::bs(0, t5)]), RuleId::MinusPi) < 1e-9);
    }
}

#[test]
fn euler_rules_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.4)).collect();
        let e2 = seq(
            2,
            vec![Generator::bs(0, a[0]), Generator::ps(1, a[1]), Generator::bs(0, a[2])],
        );
        assert!(fire_and_check(&e2, RuleId::E2) < 1e-9);
        let e3 = seq(
            3,
            vec![Generator::bs(0, a[0]), Generator::bs(1, a[1]), Generator::bs(0, a[2])],
        );
        assert!(fire_and_check(&e3, RuleId::E3) < 1e-9);
    }
}

#[test]
fn lopp_only_normalizes_to_its_triangle() {
    let circ = seq(
        3,
        vec![
            Generator::bs(0, 0.4),
            Generator::ps(1, 2.0),
            Generator::bs(1, 1.1),
            Generator::swap(0),
        ],
    );
    let Normalized::Normal(nf) = normalize(&circ).unwrap() else {
        panic!("zero")
    };
    assert_eq!((nf.n_aux, nf.m_aux), (0, 0));
    assert!((nf.scalar().unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    let want = synthesize_triangle(&matrix_of(&circ).unwrap()).unwrap();
    assert!(nf_equal(
        &Normalized::Normal(nf.clone()),
        &Normalized::Normal(NormalForm { triangle: want, ..nf })
    ));
}

#[test]
fn impossible_event_is_zero() {
    let circ = Circuit::new(
        1,
        vec![
            Column::new(vec![Generator::source(1, FockVector::vacuum(1))]),
            Column::new(vec![
                Generator::bs(0, 0.0),
                Generator::detector(1, DualFockVector::basis([1])),
            ]),
        ],
    );
    let circ = circ.unwrap_or_else(|_| {
        Circuit::new(
            1,
            vec![
                Column::new(vec![Generator::source(1, FockVector::vacuum(1))]),
                Column::new(vec![Generator::detector(1, DualFockVector::basis([1]))]),
            ],
        )
        .unwrap()
    });
    assert_eq!(normalize(&circ).unwrap(), Normalized::Zero(ZeroForm { n: 1, m: 1 }));
}

#[test]
fn nf_equal_examples() {
    let circ = seq(2, vec![Generator::bs(0, 0.7), Generator::ps(0, 0.2)]);
    let x = normalize(&circ).unwrap();
    assert!(nf_equal(&x, &x));
    let Normalized::Normal(nf) = x.clone() else { panic!() };
    let mut t = nf.triangle.clone();
    t.set_theta(1, 1, t.theta(1, 1) + 1e-3);
    let y = Normalized::Normal(NormalForm { triangle: t, ..nf });
    assert!(!nf_equal(&x, &y));
    assert!(!nf_equal(&Normalized::Zero(ZeroForm { n: 2, m: 2 }), &x));
}

/// Random circuit with at most `max_boxes` sources and detectors each.
pub(crate) fn random_circuit(rng: &mut ChaCha8Rng, max_boxes: usize, gens: usize) -> Circuit {
    let n = rng.gen_range(1..=3);
    let mut width = n;
    let mut cols = Vec::new();
    let (mut srcs, mut dets) = (0, 0);
    for _ in 0..gens {
        let roll: f64 = rng.gen();
        let g = if roll < 0.12 && srcs < max_boxes {
            srcs += 1;
            let modes = rng.gen_range(1..=2);
            let support = rng.gen_range(1..=3);
            let mut f = FockVector::zero(modes);
            for _ in 0..support {
                let occ: Vec<u32> = (0..modes).map(|_| rng.gen_range(0..=1)).collect();
                f.add_term(Occupation(occ), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            if f.is_zero() {
                f = FockVector::basis(vec![1; modes]);
            }
            let at = rng.gen_range(0..=width);
            width += modes;
            Generator::source(at, f)
        } else if roll < 0.24 && dets < max_boxes && width >= 1 {
            dets += 1;
            let modes = rng.gen_range(1..=width.min(2));
            let support = rng.gen_range(1..=3);
            let mut g = FockVector::zero(modes);
            for _ in 0..support {
                let occ: Vec<u32> = (0..modes).map(|_| rng.gen_range(0..=1)).collect();
                g.add_term(Occupation(occ), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            if g.is_zero() {
                g = FockVector::vacuum(modes);
            }
            let at = rng.gen_range(0..=width - modes);
            width -= modes;
            Generator::detector(at, DualFockVector::from_coefficients(g))
        } else if width >= 2 && roll < 0.62 {
            let at = rng.gen_range(0..width - 1);
            if rng.gen_bool(0.15) {
                Generator::swap(at)
            } else {
                Generator::bs(at, rng.gen_range(-7.0..7.0))
            }
        } else if width >= 1 {
            Generator::ps(rng.gen_range(0..width), rng.gen_range(-7.0..7.0))
        } else {
            continue;
        };
        cols.push(Column::new(vec![g]));
    }
    Circuit::new(n, cols).unwrap()
}

#[test]
fn random_circuits_normalize_soundly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut zeros = 0;
    for case in 0..60 {
        let circ = random_circuit(&mut rng, 2, 14);
        let mut rises = Vec::new();
        let nf = normalize_with(&circ, &NormalizeOptions::default(), |s| {
            if s.after >= s.before {
                rises.push(s.rule);
            }
        })
        .unwrap_or_else(|e| panic!("case {case}: {e}\n{}", crate::dsl::print_dsl(&circ)));
        let back = nf.render();
        let r = semantic_residual(&circ, &back, 3).unwrap();
        assert!(r < 1e-8, "case {case}: residual {r}\n{}", crate::dsl::print_dsl(&circ));
        if matches!(nf, Normalized::Normal(_)) {
            assert!(
                find_redex(&back).unwrap().is_none(),
                "case {case}: {:?}",
                find_redex(&back)
            );
        }
        let again = normalize(&back).unwrap();
        assert!(nf_equal(&nf, &again), "case {case}: not idempotent");
        if matches!(nf, Normalized::Zero(_)) {
            zeros += 1;
        }
        assert!(rises.is_empty(), "case {case}: rank did not drop at {rises:?}");
    }
    assert!(zeros < 60);
}
