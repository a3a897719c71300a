//! Redex matching and rule application on a [`Diagram`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use super::diagram::{Diagram, Gate};
use super::pairing::{checked_cantor_pair, checked_pair_m};
use super::rank::{in_turn, snap};
use super::{Location, RuleId};
use crate::angle::wrap_tau;
use crate::circuit::Circuit;
use crate::error::{NumericError, RewriteError};
use crate::euler::{solve_e2_rhs, solve_e3, E2Lhs, E3Lhs};
use crate::fock::{eval_circuit, DualFockVector, EvalConfig, FockVector, Occupation};
use crate::synthesis::{synthesize_tmn, synthesize_triangle, Split};
use crate::unitary::{matrix_of, UnitaryMatrix};

/// Distance below which the triangle step counts as already done.
const TRIANGLE_EPS: f64 = 1e-9;
/// Detector coefficients this close to `1` or `0` count as exact.
const COEFF_EPS: f64 = 1e-9;

/// Where a rule matched and what it needs to fire.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Site {
    pub loc: Location,
    pub what: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Target {
    /// Gate indices, in time order.
    Gates(Vec<usize>),
    /// Source or detector box index.
    Box(usize),
    /// A wire of the middle section.
    Wire(usize),
    /// A value of the connecting wire.
    Index(u32),
    /// A detector prefix and its canonical index.
    Prefix(Vec<u32>, u32),
    Whole,
}

/// Canonical representative of an angle in `[0, 2pi)`.
fn reduce(x: f64) -> f64 {
    let v = wrap_tau(snap(x));
    if snap(v) >= TAU {
        0.0
    } else {
        v
    }
}

fn cpx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

struct Ctx<'a> {
    d: &'a Diagram,
    levels: Vec<usize>,
}

impl Ctx<'_> {
    fn at_gate(&self, i: usize) -> Location {
        Location {
            column: self.levels[i] + 1,
            row: self.d.gates[i].wire(),
        }
    }

    fn last_column(&self) -> usize {
        self.levels.iter().map(|l| l + 2).max().unwrap_or(1)
    }

    fn gate_sites(&self, f: impl Fn(usize, Gate) -> Option<Vec<usize>>) -> Vec<Site> {
        self.d
            .gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                f(i, *g).map(|v| Site {
                    loc: self.at_gate(v[0]),
                    what: Target::Gates(v),
                })
            })
            .collect()
    }
}

fn ps_of(d: &Diagram, i: Option<usize>) -> Option<(usize, f64)> {
    match i.map(|j| (j, d.gates[j])) {
        Some((j, Gate::Ps { phi, .. })) => Some((j, phi)),
        _ => None,
    }
}

/// The connecting-wire values used by a box, with the rest of each term.
fn by_index(v: &FockVector) -> std::collections::BTreeMap<u32, Vec<(Vec<u32>, Complex64)>> {
    let mut out: std::collections::BTreeMap<u32, Vec<(Vec<u32>, Complex64)>> = Default::default();
    for (occ, z) in v.iter() {
        let s = occ.as_slice();
        let (last, head) = s.split_last().expect("boxes have a connecting mode");
        out.entry(*last).or_default().push((head.to_vec(), *z));
    }
    out
}

/// All matches of `rule`, unordered.
pub(crate) fn sites(d: &Diagram, rule: RuleId) -> Result<Vec<Site>, RewriteError> {
    let cx = Ctx { d, levels: d.levels() };
    let out = match rule {
        RuleId::PhaseMod2Pi => cx.gate_sites(|i, g| match g {
            Gate::Ps { phi, .. } if !in_turn(phi) => Some(vec![i]),
            _ => None,
        }),
        RuleId::BsMod2Pi => cx.gate_sites(|i, g| match g {
            Gate::Bs { theta, .. } if !in_turn(theta) => Some(vec![i]),
            _ => None,
        }),
        RuleId::PhaseFusion => cx.gate_sites(|i, g| {
            let w = g.wire();
            match (g, ps_of(d, d.next_on(i, w))) {
                (Gate::Ps { .. }, Some((j, _))) => Some(vec![i, j]),
                _ => None,
            }
        }),
        RuleId::ZeroPhase => cx.gate_sites(|i, g| match g {
            Gate::Ps { phi, .. } if snap(phi) == 0.0 => Some(vec![i]),
            _ => None,
        }),
        RuleId::ZeroBs => cx.gate_sites(|i, g| match g {
            Gate::Bs { theta, .. } if snap(theta) == 0.0 => Some(vec![i]),
            _ => None,
        }),
        RuleId::TopPhase => cx.gate_sites(|i, g| {
            let Gate::Ps { wire, phi } = g else { return None };
            let j = d.next_on(i, wire)?;
            let p = snap(phi);
            match d.gates[j] {
                Gate::Bs { wire: w, .. } if w == wire && p > 0.0 && p < TAU => Some(vec![i, j]),
                _ => None,
            }
        }),
        RuleId::PiOver2 => cx.gate_sites(|j, g| {
            let Gate::Bs { wire, theta } = g else { return None };
            if snap(theta) != FRAC_PI_2 {
                return None;
            }
            let (i, _) = ps_of(d, d.prev_on(j, wire + 1))?;
            Some(vec![i, j])
        }),
        RuleId::ThetaRange => cx.gate_sites(|i, g| match g {
            Gate::Bs { theta, .. } if snap(theta) > FRAC_PI_2 && snap(theta) < PI => Some(vec![i]),
            _ => None,
        }),
        RuleId::MinusPi => cx.gate_sites(|i, g| match g {
            Gate::Bs { theta, .. } if snap(theta) >= PI && snap(theta) < TAU => Some(vec![i]),
            _ => None,
        }),
        RuleId::E3 => cx.gate_sites(|a, g| {
            let Gate::Bs { wire: w, .. } = g else { return None };
            let b = d.next_on(a, w + 1)?;
            let c = d.next_on(a, w)?;
            let ok = |k: usize, at: usize| {
                matches!(d.gates[k], Gate::Bs { wire, theta } if wire == at && snap(theta) > 0.0 && snap(theta) < PI)
            };
            (ok(a, w) && ok(b, w + 1) && ok(c, w) && b < c && d.next_on(b, w + 1) == Some(c))
                .then(|| vec![a, b, c])
        }),
        RuleId::E2 => cx.gate_sites(|a, g| {
            let Gate::Bs { wire: w, .. } = g else { return None };
            let follow = |at: usize| -> Option<(Option<usize>, usize)> {
                let x = d.next_on(a, at)?;
                match d.gates[x] {
                    Gate::Ps { .. } => Some((Some(x), d.next_on(x, at)?)),
                    Gate::Bs { .. } => Some((None, x)),
                }
            };
            let (p0, c0) = follow(w)?;
            let (p1, c1) = follow(w + 1)?;
            if c0 != c1 || !matches!(d.gates[c0], Gate::Bs { wire, .. } if wire == w) {
                return None;
            }
            let mut v: Vec<usize> = [Some(a), p0, p1, Some(c0)].into_iter().flatten().collect();
            v.sort_unstable();
            Some(v)
        }),
        RuleId::ZeroF => {
            if !d.is_merged() {
                return Ok(Vec::new());
            }
            let used = by_index(d.detectors[0].coefficients());
            let row = d.width - 1;
            by_index(&d.sources[0])
                .keys()
                .filter(|k| !used.contains_key(k))
                .map(|k| Site {
                    loc: Location { column: 0, row },
                    what: Target::Index(*k),
                })
                .take(1)
                .collect()
        }
        RuleId::ZeroG => {
            if !d.is_merged() {
                return Ok(Vec::new());
            }
            let have = by_index(&d.sources[0]);
            let row = d.width - 1;
            by_index(d.detectors[0].coefficients())
                .keys()
                .filter(|k| !have.contains_key(k))
                .map(|k| Site {
                    loc: Location {
                        column: cx.last_column(),
                        row,
                    },
                    what: Target::Index(*k),
                })
                .take(1)
                .collect()
        }
        RuleId::RemoveG => {
            if !d.is_merged() {
                return Ok(Vec::new());
            }
            let g = d.detectors[0].coefficients();
            let mut prefixes: std::collections::BTreeMap<Vec<u32>, Vec<(u32, Complex64)>> = Default::default();
            for (occ, z) in g.iter() {
                let (last, head) = occ.as_slice().split_last().expect("connecting mode");
                prefixes.entry(head.to_vec()).or_default().push((*last, *z));
            }
            let mut found = Vec::new();
            for (a, terms) in prefixes {
                let ell = checked_pair_m(&a)
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or(RewriteError::Overflow)?;
                let canonical = terms.len() == 1 && terms[0].0 == ell && (terms[0].1 - 1.0).norm() < COEFF_EPS;
                if !canonical {
                    found.push((ell, a));
                }
            }
            found.sort();
            found
                .into_iter()
                .take(1)
                .map(|(ell, a)| Site {
                    loc: Location {
                        column: cx.last_column(),
                        row: d.width - 1,
                    },
                    what: Target::Prefix(a, ell),
                })
                .collect()
        }
        RuleId::WireRemoval => {
            let last_src = d.sources.len().wrapping_sub(1);
            let last_det = d.detectors.len().wrapping_sub(1);
            (d.n.max(d.m)..d.width.saturating_sub(1))
                .filter(|&w| {
                    !d.gates.iter().any(|g| g.touches(w))
                        && d.source_of(w).map(|s| s.0) == Some(last_src)
                        && d.detector_of(w).map(|s| s.0) == Some(last_det)
                })
                .map(|w| Site {
                    loc: Location { column: 0, row: w },
                    what: Target::Wire(w),
                })
                .collect()
        }
        RuleId::Ss => (1..d.sources.len())
            .map(|k| Site {
                loc: Location {
                    column: 0,
                    row: d.source_offset(k - 1),
                },
                what: Target::Box(k - 1),
            })
            .collect(),
        RuleId::Dd => (1..d.detectors.len())
            .map(|k| Site {
                loc: Location {
                    column: cx.last_column(),
                    row: d.detector_offset(k - 1),
                },
                what: Target::Box(k - 1),
            })
            .collect(),
        RuleId::SB => cx.gate_sites(|i, g| {
            let Gate::Bs { wire, .. } = g else { return None };
            let fresh = d.prev_on(i, wire).is_none() && d.prev_on(i, wire + 1).is_none();
            let (a, b) = (d.source_of(wire)?, d.source_of(wire + 1)?);
            (fresh && a.0 == b.0).then(|| vec![i])
        }),
        RuleId::SP => cx.gate_sites(|i, g| {
            let Gate::Ps { wire, .. } = g else { return None };
            d.source_of(wire)?;
            d.prev_on(i, wire).is_none().then(|| vec![i])
        }),
        RuleId::BD => cx.gate_sites(|i, g| {
            let Gate::Bs { wire, .. } = g else { return None };
            let last = d.next_on(i, wire).is_none() && d.next_on(i, wire + 1).is_none();
            let (a, b) = (d.detector_of(wire)?, d.detector_of(wire + 1)?);
            (last && a.0 == b.0).then(|| vec![i])
        }),
        RuleId::PD => cx.gate_sites(|i, g| {
            let Gate::Ps { wire, .. } = g else { return None };
            d.detector_of(wire)?;
            d.next_on(i, wire).is_none().then(|| vec![i])
        }),
        RuleId::Triangle => {
            if !d.is_merged() || triangle_done(d)? {
                Vec::new()
            } else {
                vec![Site {
                    loc: Location { column: 1, row: 0 },
                    what: Target::Whole,
                }]
            }
        }
    };
    Ok(out)
}

fn middle_split(d: &Diagram) -> Split {
    let size = d.width - 1;
    Split {
        n: d.n,
        n_aux: size - d.n,
        m: d.m,
        m_aux: size - d.m,
    }
}

fn middle_matrix(d: &Diagram) -> Result<UnitaryMatrix, NumericError> {
    let c = Circuit::from_sequence(d.width - 1, d.gates.iter().map(|g| g.to_generator()))
        .expect("gates stay above the connecting wire");
    matrix_of(&c)
}

fn triangle_gates(t: &crate::synthesis::TriangleParams) -> Vec<Gate> {
    t.generators().iter().filter_map(Gate::from_generator).collect()
}

fn same_gates(a: &Diagram, b: &[Gate]) -> bool {
    let mut probe = a.clone();
    probe.gates = b.to_vec();
    let key = |d: &Diagram| {
        let d = d.clone().canonical();
        d.gates
    };
    let (x, y) = (key(a), key(&probe));
    x.len() == y.len()
        && x.iter().zip(&y).all(|(p, q)| match (p, q) {
            (Gate::Ps { wire: w1, phi: a }, Gate::Ps { wire: w2, phi: b }) => {
                w1 == w2 && crate::angle::circle_dist(*a, *b) < TRIANGLE_EPS
            }
            (Gate::Bs { wire: w1, theta: a }, Gate::Bs { wire: w2, theta: b }) => {
                w1 == w2 && (a - b).abs() < TRIANGLE_EPS
            }
            _ => false,
        })
}

fn is_identity(u: &UnitaryMatrix) -> bool {
    u.max_diff(&UnitaryMatrix::identity(u.dim())) < TRIANGLE_EPS
}

fn triangle_done(d: &Diagram) -> Result<bool, RewriteError> {
    if d.gates.is_empty() {
        return Ok(true);
    }
    let dec = synthesize_tmn(&middle_matrix(d)?, middle_split(d))?;
    Ok(is_identity(&dec.w_in) && is_identity(&dec.w_out) && same_gates(d, &triangle_gates(&dec.triangle)))
}

/// `u (+) 1` applied to a box's amplitudes, the last mode being the connecting wire.
fn lift(u: &UnitaryMatrix, v: &FockVector) -> Result<FockVector, RewriteError> {
    if u.dim() == 0 {
        return Ok(v.clone());
    }
    let t = synthesize_triangle(u)?;
    let c = Circuit::from_sequence(u.dim() + 1, t.generators()).expect("in range");
    eval_circuit(&c, v, &EvalConfig::default()).map_err(fock)
}

fn fock(e: crate::error::FockError) -> RewriteError {
    RewriteError::Fock(e.to_string())
}

/// Fire `rule` at `site`.
pub(crate) fn apply(d: &Diagram, rule: RuleId, site: &Site) -> Result<Diagram, RewriteError> {
    let mut out = d.clone();
    let gates = match &site.what {
        Target::Gates(v) => v.clone(),
        _ => Vec::new(),
    };
    let g0 = gates.first().map(|&i| d.gates[i]);
    match rule {
        RuleId::PhaseMod2Pi => {
            if let Some(Gate::Ps { wire, phi }) = g0 {
                out.gates[gates[0]] = Gate::Ps { wire, phi: reduce(phi) };
            }
        }
        RuleId::BsMod2Pi => {
            if let Some(Gate::Bs { wire, theta }) = g0 {
                out.gates[gates[0]] = Gate::Bs {
                    wire,
                    theta: reduce(theta),
                };
            }
        }
        RuleId::PhaseFusion => {
            let (Gate::Ps { wire, phi: a }, Gate::Ps { phi: b, .. }) = (d.gates[gates[0]], d.gates[gates[1]]) else {
                unreachable!("fusion matches two phases")
            };
            out.replace(&gates, vec![Gate::Ps { wire, phi: a + b }]);
        }
        RuleId::ZeroPhase | RuleId::ZeroBs => out.replace(&gates, Vec::new()),
        RuleId::TopPhase => {
            let Gate::Ps { wire, phi } = d.gates[gates[0]] else {
                unreachable!()
            };
            let phi = snap(phi);
            let bs = d.gates[gates[1]];
            out.replace(
                &gates,
                vec![
                    Gate::Ps {
                        wire: wire + 1,
                        phi: TAU - phi,
                    },
                    bs,
                    Gate::Ps { wire, phi },
                    Gate::Ps { wire: wire + 1, phi },
                ],
            );
        }
        RuleId::PiOver2 => {
            let Gate::Ps { phi, .. } = d.gates[gates[0]] else {
                unreachable!()
            };
            let wire = d.gates[gates[1]].wire();
            out.replace(
                &gates,
                vec![Gate::Bs { wire, theta: FRAC_PI_2 }, Gate::Ps { wire, phi }],
            );
        }
        RuleId::ThetaRange => {
            let Some(Gate::Bs { wire, theta }) = g0 else {
                unreachable!()
            };
            out.replace(
                &gates,
                vec![
                    Gate::Ps {
                        wire: wire + 1,
                        phi: PI,
                    },
                    Gate::Bs {
                        wire,
                        theta: PI - snap(theta),
                    },
                    Gate::Ps { wire, phi: PI },
                ],
            );
        }
        RuleId::MinusPi => {
            let Some(Gate::Bs { wire, theta }) = g0 else {
                unreachable!()
            };
            out.replace(
                &gates,
                vec![
                    Gate::Bs {
                        wire,
                        theta: snap(theta) - PI,
                    },
                    Gate::Ps { wire, phi: PI },
                    Gate::Ps {
                        wire: wire + 1,
                        phi: PI,
                    },
                ],
            );
        }
        RuleId::E3 => {
            let th = |k: usize| match d.gates[gates[k]] {
                Gate::Bs { theta, .. } => theta,
                Gate::Ps { .. } => unreachable!(),
            };
            let w = d.gates[gates[0]].wire();
            let (_, rhs) = solve_e3(&E3Lhs([th(0), th(1), th(2)]).matrix())?;
            let [d1, d2, d3] = rhs.0;
            out.replace(
                &gates,
                vec![
                    Gate::Bs { wire: w + 1, theta: d1 },
                    Gate::Bs { wire: w, theta: d2 },
                    Gate::Bs { wire: w + 1, theta: d3 },
                ],
            );
        }
        RuleId::E2 => {
            let a = gates[0];
            let c = *gates.last().expect("two beam splitters");
            let w = d.gates[a].wire();
            let (mut p0, mut p1) = (0.0, 0.0);
            for &k in &gates[1..gates.len() - 1] {
                if let Gate::Ps { wire, phi } = d.gates[k] {
                    if wire == w {
                        p0 = phi;
                    } else {
                        p1 = phi;
                    }
                }
            }
            let theta = |k: usize| match d.gates[k] {
                Gate::Bs { theta, .. } => theta,
                Gate::Ps { .. } => unreachable!(),
            };
            let rhs = solve_e2_rhs(&E2Lhs([p0, theta(c), p1, theta(a)]).matrix())?;
            let [b0, b1, b2, b3] = rhs.0;
            let with = [
                Gate::Ps { wire: w + 1, phi: b1 },
                Gate::Bs { wire: w, theta: b2 },
                Gate::Ps { wire: w, phi: b0 },
                Gate::Ps { wire: w + 1, phi: b3 },
            ]
            .into_iter()
            .filter(|g| !matches!(g, Gate::Ps { phi, .. } if *phi == 0.0))
            .collect();
            out.replace(&gates, with);
        }
        RuleId::ZeroF => {
            let Target::Index(k) = site.what else { unreachable!() };
            let f = &d.sources[0];
            out.sources[0] = FockVector::from_terms(
                f.modes(),
                f.iter()
                    .filter(|(o, _)| o.as_slice()[f.modes() - 1] != k)
                    .map(|(o, z)| (o.0.clone(), *z)),
            )
            .map_err(fock)?;
        }
        RuleId::ZeroG => {
            let Target::Index(k) = site.what else { unreachable!() };
            let g = d.detectors[0].coefficients();
            out.detectors[0] = DualFockVector::from_coefficients(
                FockVector::from_terms(
                    g.modes(),
                    g.iter()
                        .filter(|(o, _)| o.as_slice()[g.modes() - 1] != k)
                        .map(|(o, z)| (o.0.clone(), *z)),
                )
                .map_err(fock)?,
            );
        }
        RuleId::RemoveG => {
            let Target::Prefix(a, ell) = &site.what else {
                unreachable!()
            };
            (out.sources[0], out.detectors[0]) = remove_g(&d.sources[0], &d.detectors[0], a, *ell)?;
        }
        RuleId::WireRemoval => {
            let Target::Wire(w) = site.what else { unreachable!() };
            let (_, sa) = d.source_of(w).expect("matched");
            let (_, da) = d.detector_of(w).expect("matched");
            let last = d.sources.len() - 1;
            let lastd = d.detectors.len() - 1;
            let (f, g) = relabel_connecting(
                merge_into_connecting(&d.sources[last], sa)?,
                merge_into_connecting(d.detectors[lastd].coefficients(), da)?,
            );
            out.sources[last] = f;
            out.detectors[lastd] = DualFockVector::from_coefficients(g);
            out.width -= 1;
            out.gates = d
                .gates
                .iter()
                .map(|g| if g.wire() > w { g.shifted(-1) } else { *g })
                .collect();
        }
        RuleId::Ss => {
            let Target::Box(k) = site.what else { unreachable!() };
            let merged = d.sources[k].tensor(&d.sources[k + 1]);
            out.sources.splice(k..k + 2, [merged]);
        }
        RuleId::Dd => {
            let Target::Box(k) = site.what else { unreachable!() };
            let merged = d.detectors[k].coefficients().tensor(d.detectors[k + 1].coefficients());
            out.detectors
                .splice(k..k + 2, [DualFockVector::from_coefficients(merged)]);
        }
        RuleId::SB | RuleId::SP => {
            let g = d.gates[gates[0]];
            let (s, mode) = d.source_of(g.wire()).expect("matched");
            out.sources[s] = match g {
                Gate::Bs { theta, .. } => d.sources[s].apply_bs(theta, mode),
                Gate::Ps { phi, .. } => d.sources[s].apply_phase(phi, mode),
            }
            .map_err(fock)?;
            out.gates.remove(gates[0]);
        }
        RuleId::BD | RuleId::PD => {
            // <g| G = sum_x (G^T g)_x <x|, and both generators are symmetric.
            let g = d.gates[gates[0]];
            let (s, mode) = d.detector_of(g.wire()).expect("matched");
            let c = d.detectors[s].coefficients();
            let next = match g {
                Gate::Bs { theta, .. } => c.apply_bs(theta, mode),
                Gate::Ps { phi, .. } => c.apply_phase(phi, mode),
            }
            .map_err(fock)?;
            out.detectors[s] = DualFockVector::from_coefficients(next);
            out.gates.remove(gates[0]);
        }
        RuleId::Triangle => {
            let dec = synthesize_tmn(&middle_matrix(d)?, middle_split(d))?;
            out.gates = triangle_gates(&dec.triangle);
            out.sources[0] = lift(&dec.w_in, &d.sources[0])?;
            let wt = UnitaryMatrix::from_matrix(dec.w_out.as_matrix().transpose())?;
            out.detectors[0] = DualFockVector::from_coefficients(lift(&wt, d.detectors[0].coefficients())?);
        }
    }
    Ok(out.canonical())
}

/// Drop `mode` from every term, folding its value into the connecting mode.
fn merge_into_connecting(v: &FockVector, mode: usize) -> Result<FockVector, RewriteError> {
    let last = v.modes() - 1;
    let mut terms = Vec::new();
    for (occ, z) in v.iter() {
        let s = occ.as_slice();
        let joined = checked_cantor_pair(u64::from(s[mode]), u64::from(s[last])).ok_or(RewriteError::Overflow)?;
        let mut o: Vec<u32> = s
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != mode && i != last)
            .map(|(_, x)| *x)
            .collect();
        o.push(u32::try_from(joined).map_err(|_| RewriteError::Overflow)?);
        terms.push((o, *z));
    }
    FockVector::from_terms(last, terms).map_err(fock)
}

/// Renumber the connecting-mode values used by `f` and `g` as `0, 1, ...` in
/// increasing order. Only equality between the two sides matters there, so
/// this keeps the semantics while stopping nested pairings from growing.
fn relabel_connecting(f: FockVector, g: FockVector) -> (FockVector, FockVector) {
    let labels: std::collections::BTreeSet<u32> = f
        .iter()
        .chain(g.iter())
        .filter_map(|(o, _)| o.as_slice().last().copied())
        .collect();
    let dense: std::collections::BTreeMap<u32, u32> = labels.into_iter().zip(0..).collect();
    let renumber = |v: FockVector| {
        let mut out = FockVector::zero(v.modes());
        for (o, z) in v.iter() {
            let mut occ = o.as_slice().to_vec();
            if let Some(l) = occ.last_mut() {
                *l = dense[l];
            }
            out.add_term(Occupation(occ), *z);
        }
        out
    };
    (renumber(f), renumber(g))
}

/// Move the coefficients of detector prefix `a` into the source.
fn remove_g(
    f: &FockVector,
    g: &DualFockVector,
    a: &[u32],
    ell: u32,
) -> Result<(FockVector, DualFockVector), RewriteError> {
    let fm = f.modes();
    let gm = g.modes();
    let parts = by_index(f);
    let max_used = parts
        .keys()
        .chain(by_index(g.coefficients()).keys())
        .copied()
        .chain([ell])
        .max()
        .unwrap_or(0);
    let fresh = max_used.checked_add(1).ok_or(RewriteError::Overflow)?;
    let xi: Vec<(u32, Complex64)> = g
        .iter()
        .filter(|(o, _)| &o.as_slice()[..gm - 1] == a)
        .map(|(o, z)| (o.as_slice()[gm - 1], *z))
        .collect();

    let with_last = |head: &[u32], k: u32| -> Vec<u32> {
        let mut o = head.to_vec();
        o.push(k);
        o
    };
    let mut nf = FockVector::zero(fm);
    for (k, terms) in &parts {
        let to = if *k == ell { fresh } else { *k };
        for (head, z) in terms {
            nf.add_term(Occupation(with_last(head, to)), *z);
        }
    }
    for (k, x) in &xi {
        if let Some(terms) = parts.get(k) {
            for (head, z) in terms {
                nf.add_term(Occupation(with_last(head, ell)), z * x);
            }
        }
    }
    let mut ng = FockVector::zero(gm);
    for (o, z) in g.iter() {
        let s = o.as_slice();
        let (last, head) = s.split_last().expect("connecting mode");
        if head == a {
            continue;
        }
        let to = if *last == ell { fresh } else { *last };
        ng.add_term(Occupation(with_last(head, to)), *z);
    }
    ng.add_term(Occupation(with_last(a, ell)), cpx(1.0));
    Ok((
        nf.pruned(crate::fock::DEFAULT_PRUNE_EPS),
        DualFockVector::from_coefficients(ng),
    ))
}
