//! A terminating rewrite system for circuits with sources and detectors.
//!
//! Every circuit is first brought to a working shape (sources bottom left,
//! detectors bottom right, one bare connecting wire at the bottom). Rules are
//! then tried in [`RuleId`] order, each at its top-most then left-most site,
//! until none applies. The fixed point is a triangle `T` between one source
//! `f` and a detector fully determined by the support of `f`.
//!
//! Besides the local rules, [`RuleId::Triangle`] replaces a passive middle
//! that is not yet in triangular form by its triangle, pushing the unitaries
//! acting only on auxiliary wires into the source and the detector.

mod diagram;
mod pairing;
mod rank;
mod rules;
#[cfg(test)]
mod tests;

use std::fmt;

use serde::Serialize;

use crate::angle::circle_dist;
use crate::circuit::Circuit;
use crate::error::{NumericError, RewriteError};
use crate::fock::{eval_circuit, DualFockVector, EvalConfig, FockVector, Occupation};
use crate::synthesis::{classify, synthesize_tmn, Split, TriangleClass, TriangleParams};
use crate::unitary::matrix_of;
use diagram::{Diagram, Gate};

pub use pairing::{cantor_pair, cantor_unpair, checked_cantor_pair, checked_pair_m, pair_m, unpair_m};
pub use rank::RankTuple;

/// Default tolerance for comparing angles of two normal forms.
pub const ANGLE_EPS: f64 = 1e-9;
/// Default tolerance for comparing source amplitudes of two normal forms.
pub const AMP_EPS: f64 = 1e-9;
/// Default cap on rule applications in [`normalize`].
pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;
/// Photon bound of the per-step soundness probe.
pub const PROBE_PHOTONS: u32 = 4;

/// Rewrite rules in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RuleId {
    PhaseMod2Pi,
    BsMod2Pi,
    PhaseFusion,
    ZeroPhase,
    ZeroBs,
    TopPhase,
    PiOver2,
    ThetaRange,
    MinusPi,
    E3,
    E2,
    ZeroF,
    ZeroG,
    WireRemoval,
    Ss,
    SB,
    SP,
    Dd,
    BD,
    PD,
    RemoveG,
    /// Replace the passive middle by its triangle.
    Triangle,
}

impl RuleId {
    pub const ALL: [RuleId; 22] = [
        RuleId::PhaseMod2Pi,
        RuleId::BsMod2Pi,
        RuleId::PhaseFusion,
        RuleId::ZeroPhase,
        RuleId::ZeroBs,
        RuleId::TopPhase,
        RuleId::PiOver2,
        RuleId::ThetaRange,
        RuleId::MinusPi,
        RuleId::E3,
        RuleId::E2,
        RuleId::ZeroF,
        RuleId::ZeroG,
        RuleId::WireRemoval,
        RuleId::Ss,
        RuleId::SB,
        RuleId::SP,
        RuleId::Dd,
        RuleId::BD,
        RuleId::PD,
        RuleId::RemoveG,
        RuleId::Triangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::PhaseMod2Pi => "phase-mod-2pi",
            RuleId::BsMod2Pi => "bs-mod-2pi",
            RuleId::PhaseFusion => "phase-fusion",
            RuleId::ZeroPhase => "zero-phase",
            RuleId::ZeroBs => "zero-bs",
            RuleId::TopPhase => "top-phase",
            RuleId::PiOver2 => "pi-over-2",
            RuleId::ThetaRange => "theta-range",
            RuleId::MinusPi => "minus-pi",
            RuleId::E3 => "e3",
            RuleId::E2 => "e2",
            RuleId::ZeroF => "zero-f",
            RuleId::ZeroG => "zero-g",
            RuleId::RemoveG => "remove-g",
            RuleId::WireRemoval => "wire-removal",
            RuleId::Ss => "ss",
            RuleId::SB => "s-b",
            RuleId::SP => "s-p",
            RuleId::Dd => "dd",
            RuleId::BD => "b-d",
            RuleId::PD => "p-d",
            RuleId::Triangle => "triangle",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Column and top wire of a redex in the rendered working shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Location {
    pub column: usize,
    pub row: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.column, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Redex {
    pub rule: RuleId,
    pub loc: Location,
}

/// One applied rule, as reported to a trace callback.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub index: usize,
    pub rule: RuleId,
    pub loc: Location,
    pub before: RankTuple,
    pub after: RankTuple,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} rule={} loc={} rank={}",
            self.index, self.rule, self.loc, self.after
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeOptions {
    pub step_limit: usize,
    /// Compare semantics before and after every step.
    pub check_steps: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            step_limit: DEFAULT_STEP_LIMIT,
            check_steps: false,
        }
    }
}

/// A nonzero circuit in normal form. The detector is derived, never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalForm {
    pub n: usize,
    pub m: usize,
    pub n_aux: usize,
    pub m_aux: usize,
    pub triangle: TriangleParams,
    /// Over `n_aux + 1` modes, the last one being the connecting wire.
    pub f: FockVector,
}

/// The null map from `n` to `m` wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZeroForm {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalized {
    Normal(NormalForm),
    Zero(ZeroForm),
}

impl NormalForm {
    pub fn split(&self) -> Split {
        Split {
            n: self.n,
            n_aux: self.n_aux,
            m: self.m,
            m_aux: self.m_aux,
        }
    }

    /// Values the connecting wire takes in `f`, ascending.
    pub fn k_set(&self) -> Vec<u32> {
        let mut k: Vec<u32> = self.f.iter().map(|(o, _)| o.as_slice()[self.n_aux]).collect();
        k.sort_unstable();
        k.dedup();
        k
    }

    /// `sum_{l in K} <N(l)| (x) <l|`.
    pub fn detector(&self) -> DualFockVector {
        let mut g = FockVector::zero(self.m_aux + 1);
        for l in self.k_set() {
            let mut occ = unpair_m(u64::from(l), self.m_aux).0;
            occ.push(l);
            g.add_term(Occupation(occ), num_complex::Complex64::new(1.0, 0.0));
        }
        DualFockVector::from_coefficients(g)
    }

    /// The global scalar when there are no auxiliary wires.
    pub fn scalar(&self) -> Option<num_complex::Complex64> {
        (self.n_aux == 0 && self.m_aux == 0).then(|| self.f.get(&Occupation(vec![0])))
    }

    fn diagram(&self) -> Diagram {
        Diagram {
            n: self.n,
            m: self.m,
            width: self.n + self.n_aux + 1,
            sources: vec![self.f.clone()],
            gates: self
                .triangle
                .generators()
                .iter()
                .filter_map(Gate::from_generator)
                .collect(),
            detectors: vec![self.detector()],
        }
        .canonical()
    }
}

impl ZeroForm {
    /// `n` vacuum detectors, then `m` vacuum sources.
    pub fn render(&self) -> Circuit {
        use crate::circuit::{Column, Generator};
        let zero = || FockVector::zero(1);
        let dets = (0..self.n).map(|w| Generator::detector(w, DualFockVector::from_coefficients(zero())));
        let srcs = (0..self.m).map(|_| Generator::source(0, zero()));
        let mut cols = vec![Column::new(dets.collect()), Column::new(srcs.collect())];
        if self.n == 0 && self.m == 0 {
            // The null scalar still needs one box to carry the zero.
            cols = vec![
                Column::new(vec![Generator::source(0, zero())]),
                Column::new(vec![Generator::detector(0, DualFockVector::basis([0]))]),
            ];
        }
        cols.retain(|c| !c.generators().is_empty());
        Circuit::new(self.n, cols).expect("single-mode boxes fit")
    }
}

impl Normalized {
    pub fn n(&self) -> usize {
        match self {
            Normalized::Normal(nf) => nf.n,
            Normalized::Zero(z) => z.n,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Normalized::Normal(nf) => nf.m,
            Normalized::Zero(z) => z.m,
        }
    }

    /// A circuit whose normal form is `self`.
    pub fn render(&self) -> Circuit {
        match self {
            Normalized::Normal(nf) => nf.diagram().to_circuit(),
            Normalized::Zero(z) => z.render(),
        }
    }
}

/// Rank of `c` as written; no connecting wire is added.
pub fn ranking(c: &Circuit) -> RankTuple {
    rank::rank(&Diagram::prepare_with(c, false))
}

fn first_redex(d: &Diagram) -> Result<Option<(RuleId, rules::Site)>, RewriteError> {
    for rule in RuleId::ALL {
        let sites = rules::sites(d, rule)?;
        if let Some(s) = sites.into_iter().min_by_key(|s| (s.loc.row, s.loc.column)) {
            return Ok(Some((rule, s)));
        }
    }
    Ok(None)
}

/// The first redex of `c` in its working shape, rule priority first.
pub fn find_redex(c: &Circuit) -> Result<Option<Redex>, RewriteError> {
    let d = Diagram::prepare(c);
    Ok(first_redex(&d)?.map(|(rule, s)| Redex { rule, loc: s.loc }))
}

/// Largest amplitude difference of two circuits over all basis inputs with
/// at most `cutoff` photons.
pub fn semantic_residual(a: &Circuit, b: &Circuit, cutoff: u32) -> Result<f64, crate::error::FockError> {
    let cfg = EvalConfig::default();
    let mut worst = 0.0f64;
    for occ in Occupation::up_to(a.n_in(), cutoff) {
        let v = FockVector::basis(occ);
        let x = eval_circuit(a, &v, &cfg)?;
        let y = eval_circuit(b, &v, &cfg)?;
        worst = worst.max(x.max_diff(&y));
    }
    Ok(worst)
}

fn check_step(before: &Diagram, after: &Diagram, rule: RuleId) -> Result<(), RewriteError> {
    let r = semantic_residual(&before.to_circuit(), &after.to_circuit(), PROBE_PHOTONS)
        .map_err(|e| RewriteError::Fock(e.to_string()))?;
    if r > 1e-9 {
        return Err(RewriteError::Unsound {
            rule: rule.name().into(),
            residual: r,
        });
    }
    Ok(())
}

/// Fire `rule` at `loc` of `c`'s working shape. Debug builds check semantics.
pub fn apply_rule(c: &Circuit, rule: RuleId, loc: Location) -> Result<Circuit, RewriteError> {
    let d = Diagram::prepare(c);
    let site = rules::sites(&d, rule)?
        .into_iter()
        .find(|s| s.loc == loc)
        .ok_or_else(|| RewriteError::NotARedex {
            rule: rule.name().into(),
            column: loc.column,
            row: loc.row,
        })?;
    let next = rules::apply(&d, rule, &site)?;
    if cfg!(debug_assertions) {
        check_step(&d, &next, rule)?;
    }
    Ok(next.to_circuit())
}

pub fn normalize(c: &Circuit) -> Result<Normalized, RewriteError> {
    normalize_with(c, &NormalizeOptions::default(), |_| {})
}

/// [`normalize`] with options and a callback per applied step.
pub fn normalize_with(
    c: &Circuit,
    opts: &NormalizeOptions,
    mut trace: impl FnMut(&Step),
) -> Result<Normalized, RewriteError> {
    let mut d = Diagram::prepare(c);
    let mut rank_now = rank::rank(&d);
    let mut index = 0;
    while let Some((rule, site)) = first_redex(&d)? {
        if index >= opts.step_limit {
            return Err(RewriteError::Budget(opts.step_limit));
        }
        let next = rules::apply(&d, rule, &site)?;
        if opts.check_steps {
            check_step(&d, &next, rule)?;
        }
        index += 1;
        let step = Step {
            index,
            rule,
            loc: site.loc,
            before: rank_now,
            after: rank::rank(&next),
        };
        trace(&step);
        rank_now = step.after;
        d = next;
    }
    package(d)
}

fn package(d: Diagram) -> Result<Normalized, RewriteError> {
    let internal = |why: &str| RewriteError::Numeric(NumericError::NotTmn(why.into()));
    if !d.is_merged() {
        return Err(internal("irreducible diagram has several sources or detectors"));
    }
    let f = d.sources[0].clone();
    if f.is_zero() || d.detectors[0].is_zero() {
        return Ok(Normalized::Zero(ZeroForm { n: d.n, m: d.m }));
    }
    let size = d.width - 1;
    let split = Split {
        n: d.n,
        n_aux: size - d.n,
        m: d.m,
        m_aux: size - d.m,
    };
    let middle = Circuit::from_sequence(size, d.gates.iter().map(|g| g.to_generator()))?;
    let triangle = synthesize_tmn(&matrix_of(&middle)?, split)?.triangle;
    if let TriangleClass::NotTriangular(why) = classify(&triangle, split) {
        return Err(internal(&why));
    }
    let nf = NormalForm {
        n: d.n,
        m: d.m,
        n_aux: split.n_aux,
        m_aux: split.m_aux,
        triangle,
        f,
    };
    if nf.detector().coefficients().max_diff(d.detectors[0].coefficients()) > AMP_EPS {
        return Err(internal("detector is not the one derived from the source"));
    }
    Ok(Normalized::Normal(nf))
}

/// Structural equality with explicit tolerances.
pub fn nf_equal_with(a: &Normalized, b: &Normalized, angle_eps: f64, amp_eps: f64) -> bool {
    match (a, b) {
        (Normalized::Zero(x), Normalized::Zero(y)) => x == y,
        (Normalized::Normal(x), Normalized::Normal(y)) => {
            x.split() == y.split()
                && x.triangle.size() == y.triangle.size()
                && x.triangle
                    .bs_indices()
                    .all(|(i, j)| (x.triangle.theta(i, j) - y.triangle.theta(i, j)).abs() <= angle_eps)
                && x.triangle
                    .phase_indices()
                    .all(|(i, j)| circle_dist(x.triangle.phi(i, j), y.triangle.phi(i, j)) <= angle_eps)
                && x.f.max_diff(&y.f) <= amp_eps
        }
        _ => false,
    }
}

pub fn nf_equal(a: &Normalized, b: &Normalized) -> bool {
    nf_equal_with(a, b, ANGLE_EPS, AMP_EPS)
}
