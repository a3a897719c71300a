use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::random::{random_lopp, random_state};
use super::sample::LinearMapSample;
use crate::angle::circle_dist;
use crate::circuit::{Circuit, Generator};
use crate::error::AnalysisError;
use crate::euler::{solve_e2_lhs, solve_e2_rhs, solve_e3, E2Lhs, E2Rhs, E3Lhs, E3Rhs};
use crate::fock::{DualFockVector, FockVector, Occupation};
use crate::rewrite::ZeroForm;
use crate::unitary::matrix_of;

/// Equations of the passive calculus and of the calculus with sources and detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AxiomId {
    P2Pi,
    Swap,
    PhasePair,
    E2,
    E3,
    VacuumPair,
    Zero,
    SourceTensor,
    SourceBs,
    SourceProject,
    SourcePhase,
    DetectorTensor,
    BsDetector,
    DetectorProject,
    PhaseDetector,
    Shift,
}

impl AxiomId {
    /// Equations of the passive calculus.
    pub const PASSIVE: [AxiomId; 5] = [
        AxiomId::P2Pi,
        AxiomId::Swap,
        AxiomId::PhasePair,
        AxiomId::E2,
        AxiomId::E3,
    ];

    pub const ALL: [AxiomId; 16] = [
        AxiomId::P2Pi,
        AxiomId::Swap,
        AxiomId::PhasePair,
        AxiomId::E2,
        AxiomId::E3,
        AxiomId::VacuumPair,
        AxiomId::Zero,
        AxiomId::SourceTensor,
        AxiomId::SourceBs,
        AxiomId::SourceProject,
        AxiomId::SourcePhase,
        AxiomId::DetectorTensor,
        AxiomId::BsDetector,
        AxiomId::DetectorProject,
        AxiomId::PhaseDetector,
        AxiomId::Shift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::P2Pi => "p2pi",
            AxiomId::Swap => "swap",
            AxiomId::PhasePair => "p-p",
            AxiomId::E2 => "e2",
            AxiomId::E3 => "e3",
            AxiomId::VacuumPair => "s0-0d",
            AxiomId::Zero => "zero",
            AxiomId::SourceTensor => "ss",
            AxiomId::SourceBs => "s-b",
            AxiomId::SourceProject => "s-0d",
            AxiomId::SourcePhase => "s-p",
            AxiomId::DetectorTensor => "dd",
            AxiomId::BsDetector => "b-d",
            AxiomId::DetectorProject => "s0-d",
            AxiomId::PhaseDetector => "p-d",
            AxiomId::Shift => "h2",
        }
    }

    pub fn from_name(s: &str) -> Option<AxiomId> {
        AxiomId::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Both sides of one equation with concrete parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomInstance {
    pub id: AxiomId,
    pub lhs: Circuit,
    pub rhs: Circuit,
}

fn seq(n: usize, gens: Vec<Generator>) -> Circuit {
    Circuit::from_sequence(n, gens).expect("instance gates fit")
}

fn angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(0.0..TAU)
}

fn dual(g: FockVector) -> DualFockVector {
    DualFockVector::from_coefficients(g)
}

/// `<g| h` for `h` given by its images of basis states.
fn pull_back(g: &FockVector, images: &[(Occupation, FockVector)]) -> FockVector {
    let mut out = FockVector::zero(g.modes());
    for (x, hx) in images {
        let z: Complex64 = hx.iter().map(|(y, a)| g.get(y) * a).sum();
        out.add_term(x.clone(), z);
    }
    out
}

/// A random instance of `id`. Box contents and angles are drawn from `rng`;
/// the Euler sides are solved from a random opposite side.
pub fn random_instance<R: Rng + ?Sized>(id: AxiomId, rng: &mut R) -> Result<AxiomInstance, AnalysisError> {
    let (lhs, rhs) = match id {
        AxiomId::P2Pi => {
            let phi = angle(rng);
            (
                seq(1, vec![Generator::ps(0, phi + TAU)]),
                seq(1, vec![Generator::ps(0, phi)]),
            )
        }
        AxiomId::Swap => (
            seq(2, vec![Generator::swap(0)]),
            seq(
                2,
                vec![
                    Generator::ps(0, 1.5 * PI),
                    Generator::ps(1, 1.5 * PI),
                    Generator::bs(0, FRAC_PI_2),
                ],
            ),
        ),
        AxiomId::PhasePair => {
            let (phi, theta) = (angle(rng), angle(rng));
            let pp = || vec![Generator::ps(0, phi), Generator::ps(1, phi)];
            let mut l = pp();
            l.push(Generator::bs(0, theta));
            let mut r = vec![Generator::bs(0, theta)];
            r.extend(pp());
            (seq(2, l), seq(2, r))
        }
        AxiomId::E2 => {
            if rng.gen_bool(0.5) {
                let l = E2Lhs([angle(rng), angle(rng), angle(rng), angle(rng)]);
                (l.circuit(), solve_e2_rhs(&l.matrix())?.circuit())
            } else {
                let r = E2Rhs([angle(rng), angle(rng), angle(rng), angle(rng)]);
                (solve_e2_lhs(&r.matrix())?.circuit(), r.circuit())
            }
        }
        AxiomId::E3 => {
            if rng.gen_bool(0.5) {
                let l = E3Lhs([angle(rng), angle(rng), angle(rng)]);
                (l.circuit(), solve_e3(&l.matrix())?.1.circuit())
            } else {
                let r = E3Rhs([angle(rng), angle(rng), angle(rng)]);
                (solve_e3(&r.matrix())?.0.circuit(), r.circuit())
            }
        }
        AxiomId::VacuumPair => (
            seq(
                1,
                vec![
                    Generator::source(1, FockVector::vacuum(1)),
                    Generator::detector(1, DualFockVector::basis([0])),
                ],
            ),
            Circuit::identity(1),
        ),
        AxiomId::Zero => {
            let mut l = random_lopp(rng, 2, 4).into_columns();
            l.push(crate::circuit::Column::new(vec![Generator::source(
                2,
                FockVector::vacuum(1),
            )]));
            l.push(crate::circuit::Column::new(vec![Generator::detector(
                2,
                DualFockVector::basis([1]),
            )]));
            (Circuit::new(2, l)?, ZeroForm { n: 2, m: 2 }.render())
        }
        AxiomId::SourceTensor => {
            let f1 = random_state(rng, 1, 3, 2);
            let f2 = random_state(rng, 2, 3, 1);
            let l = seq(
                1,
                vec![Generator::source(1, f1.clone()), Generator::source(2, f2.clone())],
            );
            (l, seq(1, vec![Generator::source(1, f1.tensor(&f2))]))
        }
        AxiomId::SourceBs => {
            let f = random_state(rng, 2, 4, 2);
            let theta = angle(rng);
            let l = seq(1, vec![Generator::source(1, f.clone()), Generator::bs(1, theta)]);
            (l, seq(1, vec![Generator::source(1, f.apply_bs(theta, 0)?)]))
        }
        AxiomId::SourcePhase => {
            let f = random_state(rng, 2, 4, 2);
            let (phi, j) = (angle(rng), rng.gen_range(0..2));
            let l = seq(1, vec![Generator::source(1, f.clone()), Generator::ps(1 + j, phi)]);
            (l, seq(1, vec![Generator::source(1, f.apply_phase(phi, j)?)]))
        }
        AxiomId::SourceProject => {
            let f = random_state(rng, 2, 4, 2);
            let l = seq(
                1,
                vec![
                    Generator::source(1, f.clone()),
                    Generator::detector(2, DualFockVector::basis([0])),
                ],
            );
            let f0 = super::decomposition::slice_last(&f, 0);
            let r = if f0.is_zero() {
                seq(1, vec![Generator::source(1, FockVector::zero(1))])
            } else {
                seq(1, vec![Generator::source(1, f0)])
            };
            (l, r)
        }
        AxiomId::DetectorTensor => {
            let g1 = random_state(rng, 1, 3, 2);
            let g2 = random_state(rng, 2, 3, 1);
            let l = seq(
                4,
                vec![
                    Generator::detector(2, dual(g2.clone())),
                    Generator::detector(1, dual(g1.clone())),
                ],
            );
            (l, seq(4, vec![Generator::detector(1, dual(g1.tensor(&g2)))]))
        }
        AxiomId::BsDetector => {
            let g = random_state(rng, 2, 4, 2);
            let theta = angle(rng);
            let l = seq(
                3,
                vec![Generator::bs(1, theta), Generator::detector(1, dual(g.clone()))],
            );
            (l, seq(3, vec![Generator::detector(1, dual(g.apply_bs(theta, 0)?))]))
        }
        AxiomId::PhaseDetector => {
            let g = random_state(rng, 2, 4, 2);
            let (phi, j) = (angle(rng), rng.gen_range(0..2));
            let l = seq(
                3,
                vec![Generator::ps(1 + j, phi), Generator::detector(1, dual(g.clone()))],
            );
            (l, seq(3, vec![Generator::detector(1, dual(g.apply_phase(phi, j)?))]))
        }
        AxiomId::DetectorProject => {
            let g = random_state(rng, 2, 4, 2);
            let l = seq(
                2,
                vec![
                    Generator::source(2, FockVector::vacuum(1)),
                    Generator::detector(1, dual(g.clone())),
                ],
            );
            let g0 = super::decomposition::slice_last(&g, 0);
            (l, seq(2, vec![Generator::detector(1, dual(g0))]))
        }
        AxiomId::Shift => {
            let block = Occupation::boxed(2, 2);
            let images: Vec<(Occupation, FockVector)> =
                block.iter().map(|x| (x.clone(), random_state(rng, 2, 3, 2))).collect();
            let f = random_state(rng, 2, 3, 2);
            let g = random_state(rng, 2, 3, 2);
            let mut hf = FockVector::zero(2);
            for (x, z) in f.iter() {
                let hx = &images.iter().find(|(y, _)| y == x).expect("f inside the block").1;
                hf.add_scaled(hx, *z)?;
            }
            let l = seq(
                1,
                vec![Generator::source(1, hf), Generator::detector(1, dual(g.clone()))],
            );
            let r = seq(
                1,
                vec![
                    Generator::source(1, f),
                    Generator::detector(1, dual(pull_back(&g, &images))),
                ],
            );
            (l, r)
        }
    };
    Ok(AxiomInstance { id, lhs, rhs })
}

/// Largest amplitude difference between the two sides of a random instance
/// of `id`, over all inputs with at most `cutoff` photons.
pub fn check_axiom<R: Rng + ?Sized>(id: AxiomId, rng: &mut R, cutoff: u32) -> Result<f64, AnalysisError> {
    let inst = random_instance(id, rng)?;
    let l = LinearMapSample::of_circuit(&inst.lhs, cutoff)?;
    let r = LinearMapSample::of_circuit(&inst.rhs, cutoff)?;
    l.max_diff(&r)
}

/// Generators in an order that replays the circuit one at a time.
pub fn sequence(c: &Circuit) -> Vec<Generator> {
    c.columns()
        .iter()
        .flat_map(|col| col.generators().iter().rev().cloned())
        .collect()
}

fn widths(n: usize, gens: &[Generator]) -> Vec<usize> {
    let mut w = n;
    let mut out = Vec::with_capacity(gens.len() + 1);
    for g in gens {
        out.push(w);
        w = w + g.arity_out() - g.arity_in();
    }
    out.push(w);
    out
}

fn shifted(c: &Circuit, by: usize) -> Vec<Generator> {
    sequence(c)
        .into_iter()
        .map(|mut g| {
            *g.wire_mut() += by;
            g
        })
        .collect()
}

fn splice(gens: &[Generator], at: std::ops::Range<usize>, with: Vec<Generator>) -> Vec<Generator> {
    let mut out = gens[..at.start].to_vec();
    out.extend(with);
    out.extend_from_slice(&gens[at.end..]);
    out
}

fn close(a: f64, b: f64) -> bool {
    circle_dist(a, b) < 1e-12
}

fn is_vacuum_source(g: &Generator) -> Option<usize> {
    match g {
        Generator::Source { wire, state } if *state == FockVector::vacuum(1) => Some(*wire),
        _ => None,
    }
}

fn is_vacuum_detector(g: &Generator) -> Option<usize> {
    match g {
        Generator::Detector { wire, effect } if *effect == DualFockVector::basis([0]) => Some(*wire),
        _ => None,
    }
}

type Move<R> = fn(&mut R, usize, &[Generator]) -> Option<(AxiomId, Vec<Generator>)>;

fn indices(gens: &[Generator], pred: impl Fn(&Generator) -> bool) -> Vec<usize> {
    (0..gens.len()).filter(|&i| pred(&gens[i])).collect()
}

fn mv_p2pi<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let i = *indices(gens, |g| matches!(g, Generator::PhaseShifter { .. })).choose(rng)?;
    let Generator::PhaseShifter { wire, phi } = &gens[i] else {
        unreachable!()
    };
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Some((
        AxiomId::P2Pi,
        splice(gens, i..i + 1, vec![Generator::ps(*wire, phi.value + sign * TAU)]),
    ))
}

fn mv_swap<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let expanded = |w: usize| {
        vec![
            Generator::ps(w, 1.5 * PI),
            Generator::ps(w + 1, 1.5 * PI),
            Generator::bs(w, FRAC_PI_2),
        ]
    };
    let folded: Vec<usize> = (0..gens.len().saturating_sub(2))
        .filter(|&i| match (&gens[i], &gens[i + 1], &gens[i + 2]) {
            (
                Generator::PhaseShifter { wire: a, phi: p },
                Generator::PhaseShifter { wire: b, phi: q },
                Generator::BeamSplitter { wire: c, theta },
            ) => {
                *b == a + 1
                    && c == a
                    && close(p.value, 1.5 * PI)
                    && close(q.value, 1.5 * PI)
                    && close(theta.value, FRAC_PI_2)
            }
            _ => false,
        })
        .collect();
    if let Some(&i) = folded.choose(rng) {
        if rng.gen_bool(0.5) {
            return Some((
                AxiomId::Swap,
                splice(gens, i..i + 3, vec![Generator::swap(gens[i].wire())]),
            ));
        }
    }
    let i = *indices(gens, |g| matches!(g, Generator::Swap { .. })).choose(rng)?;
    Some((AxiomId::Swap, splice(gens, i..i + 1, expanded(gens[i].wire()))))
}

fn mv_e2<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let i = *indices(gens, |g| matches!(g, Generator::BeamSplitter { .. })).choose(rng)?;
    let w = gens[i].wire();
    let inside = |g: &Generator| match g {
        Generator::BeamSplitter { wire, .. } => *wire == w,
        Generator::PhaseShifter { wire, .. } => *wire == w || *wire == w + 1,
        _ => false,
    };
    let mut end = i + 1;
    let want = rng.gen_range(1..=4);
    while end < gens.len() && end - i < want && inside(&gens[end]) {
        end += 1;
    }
    let local: Vec<Generator> = gens[i..end]
        .iter()
        .cloned()
        .map(|mut g| {
            *g.wire_mut() -= w;
            g
        })
        .collect();
    let u = matrix_of(&seq(2, local)).ok()?;
    let with = if rng.gen_bool(0.5) {
        solve_e2_lhs(&u).ok()?.circuit()
    } else {
        solve_e2_rhs(&u).ok()?.circuit()
    };
    Some((AxiomId::E2, splice(gens, i..end, shifted(&with, w))))
}

fn mv_e3<R: Rng + ?Sized>(rng: &mut R, n: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let ws = widths(n, gens);
    let bs = |g: &Generator| match g {
        Generator::BeamSplitter { wire, theta } => Some((*wire, theta.value)),
        _ => None,
    };
    let triples: Vec<(usize, bool)> = (0..gens.len().saturating_sub(2))
        .filter_map(|i| {
            let (a, b, c) = (bs(&gens[i])?, bs(&gens[i + 1])?, bs(&gens[i + 2])?);
            if a.0 == c.0 && b.0 == a.0 + 1 {
                Some((i, true))
            } else if a.0 == c.0 && a.0 == b.0 + 1 {
                Some((i, false))
            } else {
                None
            }
        })
        .collect();
    if let Some(&(i, left)) = triples.choose(rng) {
        let t = [bs(&gens[i])?.1, bs(&gens[i + 1])?.1, bs(&gens[i + 2])?.1];
        let (w, with) = if left {
            (gens[i].wire(), solve_e3(&E3Lhs(t).matrix()).ok()?.1.circuit())
        } else {
            (gens[i + 1].wire(), solve_e3(&E3Rhs(t).matrix()).ok()?.0.circuit())
        };
        return Some((AxiomId::E3, splice(gens, i..i + 3, shifted(&with, w))));
    }
    let i = *indices(gens, |g| matches!(g, Generator::BeamSplitter { .. })).choose(rng)?;
    let (w, theta) = bs(&gens[i])?;
    if w + 3 > ws[i] {
        return None;
    }
    let with = solve_e3(&E3Lhs([theta, 0.0, 0.0]).matrix()).ok()?.1.circuit();
    Some((AxiomId::E3, splice(gens, i..i + 1, shifted(&with, w))))
}

fn mv_vacuum_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let pairs: Vec<usize> = (0..gens.len().saturating_sub(1))
        .filter(
            |&i| matches!((is_vacuum_source(&gens[i]), is_vacuum_detector(&gens[i + 1])), (Some(a), Some(b)) if a == b),
        )
        .collect();
    if let Some(&i) = pairs.choose(rng) {
        if rng.gen_bool(0.5) {
            return Some((AxiomId::VacuumPair, splice(gens, i..i + 2, Vec::new())));
        }
    }
    let ws = widths(n, gens);
    let p = rng.gen_range(0..=gens.len());
    let at = rng.gen_range(0..=ws[p]);
    let pair = vec![
        Generator::source(at, FockVector::vacuum(1)),
        Generator::detector(at, DualFockVector::basis([0])),
    ];
    Some((AxiomId::VacuumPair, splice(gens, p..p, pair)))
}

fn source_at(g: &Generator) -> Option<(usize, &FockVector)> {
    match g {
        Generator::Source { wire, state } => Some((*wire, state)),
        _ => None,
    }
}

fn detector_at(g: &Generator) -> Option<(usize, &FockVector)> {
    match g {
        Generator::Detector { wire, effect } => Some((*wire, effect.coefficients())),
        _ => None,
    }
}

/// Absorb a gate right after a source, or split one out of it.
fn mv_source_gate<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let i = *indices(gens, |g| source_at(g).is_some()).choose(rng)?;
    let (at, f) = source_at(&gens[i])?;
    let k = f.modes();
    let next = gens.get(i + 1);
    let absorbable = match next {
        Some(Generator::PhaseShifter { wire, .. }) => (at..at + k).contains(wire),
        Some(Generator::BeamSplitter { wire, .. }) => *wire >= at && wire + 1 < at + k,
        _ => false,
    };
    if absorbable && rng.gen_bool(0.5) {
        let (id, f2) = match next? {
            Generator::PhaseShifter { wire, phi } => (AxiomId::SourcePhase, f.apply_phase(phi.value, wire - at).ok()?),
            Generator::BeamSplitter { wire, theta } => (AxiomId::SourceBs, f.apply_bs(theta.value, wire - at).ok()?),
            _ => unreachable!(),
        };
        return Some((id, splice(gens, i..i + 2, vec![Generator::source(at, f2)])));
    }
    let a = angle(rng);
    if k >= 2 && rng.gen_bool(0.5) {
        let j = rng.gen_range(0..k - 1);
        let pre = Generator::source(at, f.apply_bs(-a, j).ok()?);
        return Some((
            AxiomId::SourceBs,
            splice(gens, i..i + 1, vec![pre, Generator::bs(at + j, a)]),
        ));
    }
    let j = rng.gen_range(0..k);
    let pre = Generator::source(at, f.apply_phase(-a, j).ok()?);
    Some((
        AxiomId::SourcePhase,
        splice(gens, i..i + 1, vec![pre, Generator::ps(at + j, a)]),
    ))
}

/// Dual of [`mv_source_gate`].
fn mv_gate_detector<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let i = *indices(gens, |g| detector_at(g).is_some()).choose(rng)?;
    let (at, g) = detector_at(&gens[i])?;
    let k = g.modes();
    let prev = i.checked_sub(1).map(|p| &gens[p]);
    let absorbable = match prev {
        Some(Generator::PhaseShifter { wire, .. }) => (at..at + k).contains(wire),
        Some(Generator::BeamSplitter { wire, .. }) => *wire >= at && wire + 1 < at + k,
        _ => false,
    };
    if absorbable && rng.gen_bool(0.5) {
        let (id, g2) = match prev? {
            Generator::PhaseShifter { wire, phi } => {
                (AxiomId::PhaseDetector, g.apply_phase(phi.value, wire - at).ok()?)
            }
            Generator::BeamSplitter { wire, theta } => (AxiomId::BsDetector, g.apply_bs(theta.value, wire - at).ok()?),
            _ => unreachable!(),
        };
        return Some((id, splice(gens, i - 1..i + 1, vec![Generator::detector(at, dual(g2))])));
    }
    let a = angle(rng);
    if k >= 2 && rng.gen_bool(0.5) {
        let j = rng.gen_range(0..k - 1);
        let post = Generator::detector(at, dual(g.apply_bs(-a, j).ok()?));
        return Some((
            AxiomId::BsDetector,
            splice(gens, i..i + 1, vec![Generator::bs(at + j, a), post]),
        ));
    }
    let j = rng.gen_range(0..k);
    let post = Generator::detector(at, dual(g.apply_phase(-a, j).ok()?));
    Some((
        AxiomId::PhaseDetector,
        splice(gens, i..i + 1, vec![Generator::ps(at + j, a), post]),
    ))
}

/// `f (x) |0>` plus orthogonal terms, projected on `<0|`.
fn padded<R: Rng + ?Sized>(rng: &mut R, f: &FockVector) -> FockVector {
    let mut out = f.tensor(&FockVector::vacuum(1));
    for _ in 0..rng.gen_range(0..=2) {
        let mut occ: Vec<u32> = (0..f.modes()).map(|_| rng.gen_range(0..=1)).collect();
        occ.push(rng.gen_range(1..=2));
        out.add_term(
            Occupation(occ),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    out
}

fn mv_source_project<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let projected: Vec<usize> = (0..gens.len().saturating_sub(1))
        .filter(|&i| match (source_at(&gens[i]), is_vacuum_detector(&gens[i + 1])) {
            (Some((at, f)), Some(w)) => f.modes() >= 2 && w == at + f.modes() - 1,
            _ => false,
        })
        .collect();
    if let Some(&i) = projected.choose(rng) {
        if rng.gen_bool(0.5) {
            let (at, f) = source_at(&gens[i])?;
            let f0 = super::decomposition::slice_last(f, 0);
            return Some((
                AxiomId::SourceProject,
                splice(gens, i..i + 2, vec![Generator::source(at, f0)]),
            ));
        }
    }
    let i = *indices(gens, |g| source_at(g).is_some()).choose(rng)?;
    let (at, f) = source_at(&gens[i])?;
    let with = vec![
        Generator::source(at, padded(rng, f)),
        Generator::detector(at + f.modes(), DualFockVector::basis([0])),
    ];
    Some((AxiomId::SourceProject, splice(gens, i..i + 1, with)))
}

fn mv_detector_project<R: Rng + ?Sized>(
    rng: &mut R,
    _: usize,
    gens: &[Generator],
) -> Option<(AxiomId, Vec<Generator>)> {
    let projected: Vec<usize> = (0..gens.len().saturating_sub(1))
        .filter(|&i| match (is_vacuum_source(&gens[i]), detector_at(&gens[i + 1])) {
            (Some(w), Some((at, g))) => g.modes() >= 2 && w == at + g.modes() - 1,
            _ => false,
        })
        .collect();
    if let Some(&i) = projected.choose(rng) {
        if rng.gen_bool(0.5) {
            let (at, g) = detector_at(&gens[i + 1])?;
            let g0 = super::decomposition::slice_last(g, 0);
            return Some((
                AxiomId::DetectorProject,
                splice(gens, i..i + 2, vec![Generator::detector(at, dual(g0))]),
            ));
        }
    }
    let i = *indices(gens, |g| detector_at(g).is_some()).choose(rng)?;
    let (at, g) = detector_at(&gens[i])?;
    let with = vec![
        Generator::source(at + g.modes(), FockVector::vacuum(1)),
        Generator::detector(at, dual(padded(rng, g))),
    ];
    Some((AxiomId::DetectorProject, splice(gens, i..i + 1, with)))
}

/// Merge two adjacent boxes created or consumed back to back.
fn mv_tensor<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let mut found = Vec::new();
    for i in 0..gens.len().saturating_sub(1) {
        if let (Some((a1, f1)), Some((a2, f2))) = (source_at(&gens[i]), source_at(&gens[i + 1])) {
            if a2 == a1 + f1.modes() {
                found.push((i, Generator::source(a1, f1.tensor(f2)), AxiomId::SourceTensor));
            } else if a2 == a1 {
                found.push((i, Generator::source(a1, f2.tensor(f1)), AxiomId::SourceTensor));
            }
        }
        if let (Some((a1, g1)), Some((a2, g2))) = (detector_at(&gens[i]), detector_at(&gens[i + 1])) {
            if a2 + g2.modes() == a1 {
                found.push((i, Generator::detector(a2, dual(g2.tensor(g1))), AxiomId::DetectorTensor));
            } else if a2 == a1 {
                found.push((i, Generator::detector(a1, dual(g1.tensor(g2))), AxiomId::DetectorTensor));
            }
        }
    }
    let (i, merged, id) = found.choose(rng)?.clone();
    Some((id, splice(gens, i..i + 2, vec![merged])))
}

/// Split a single-term source into two boxes.
fn mv_split_source<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let i = *indices(
        gens,
        |g| matches!(source_at(g), Some((_, f)) if f.modes() >= 2 && f.support_len() == 1),
    )
    .choose(rng)?;
    let (at, f) = source_at(&gens[i])?;
    let (occ, z) = f.iter().next()?;
    let cut = rng.gen_range(1..f.modes());
    let (hi, lo) = occ.as_slice().split_at(cut);
    let top = FockVector::basis(Occupation(hi.to_vec())).scale(*z);
    let bottom = FockVector::basis(Occupation(lo.to_vec()));
    let with = vec![Generator::source(at, top), Generator::source(at + cut, bottom)];
    Some((AxiomId::SourceTensor, splice(gens, i..i + 1, with)))
}

/// Move equal phases on both inputs of a beam splitter to its outputs.
fn mv_phase_pair<R: Rng + ?Sized>(rng: &mut R, _: usize, gens: &[Generator]) -> Option<(AxiomId, Vec<Generator>)> {
    let sites: Vec<usize> = (0..gens.len().saturating_sub(2))
        .filter(|&i| match (&gens[i], &gens[i + 1], &gens[i + 2]) {
            (
                Generator::PhaseShifter { wire: a, phi: p },
                Generator::PhaseShifter { wire: b, phi: q },
                Generator::BeamSplitter { wire: c, .. },
            ) => *b == a + 1 && c == a && close(p.value, q.value),
            _ => false,
        })
        .collect();
    let &i = sites.choose(rng)?;
    let with = vec![gens[i + 2].clone(), gens[i].clone(), gens[i + 1].clone()];
    Some((AxiomId::PhasePair, splice(gens, i..i + 3, with)))
}

/// Apply one randomly chosen axiom instance somewhere in `c`, in either
/// direction where both are possible. `None` when nothing applies.
pub fn random_rewrite<R: Rng>(c: &Circuit, rng: &mut R) -> Option<(AxiomId, Circuit)> {
    let mut moves: Vec<Move<R>> = vec![
        mv_p2pi,
        mv_swap,
        mv_e2,
        mv_e3,
        mv_vacuum_pair,
        mv_source_gate,
        mv_gate_detector,
        mv_source_project,
        mv_detector_project,
        mv_tensor,
        mv_split_source,
        mv_phase_pair,
    ];
    moves.shuffle(rng);
    let gens = sequence(c);
    moves.into_iter().find_map(|mv| {
        let (id, out) = mv(rng, c.n_in(), &gens)?;
        Circuit::from_sequence(c.n_in(), out).ok().map(|c2| (id, c2))
    })
}
