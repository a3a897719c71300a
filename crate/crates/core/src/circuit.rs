//! Circuit representation: columns of generators over numbered wires.
//!
//! Every generator addresses wires by their index in the *input* of its
//! column. A [`Generator::Source`] has no input wires; its `wire` is an
//! insertion point and its outputs appear just above input wire `wire`
//! (or below everything when `wire` equals the column width). Sources that
//! share an insertion point stack in column order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::CircuitError;
use crate::fock::{DualFockVector, FockVector};

/// One of the building blocks of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    PhaseShifter {
        wire: usize,
        phi: Angle,
    },
    /// Acts on `wire` and `wire + 1`.
    BeamSplitter {
        wire: usize,
        theta: Angle,
    },
    Swap {
        wire: usize,
    },
    Source {
        wire: usize,
        state: FockVector,
    },
    Detector {
        wire: usize,
        effect: DualFockVector,
    },
}

impl Generator {
    pub fn ps(wire: usize, phi: impl Into<Angle>) -> Self {
        Generator::PhaseShifter { wire, phi: phi.into() }
    }

    pub fn bs(wire: usize, theta: impl Into<Angle>) -> Self {
        Generator::BeamSplitter {
            wire,
            theta: theta.into(),
        }
    }

    pub fn swap(wire: usize) -> Self {
        Generator::Swap { wire }
    }

    pub fn source(wire: usize, state: FockVector) -> Self {
        Generator::Source { wire, state }
    }

    pub fn detector(wire: usize, effect: DualFockVector) -> Self {
        Generator::Detector { wire, effect }
    }

    pub fn wire(&self) -> usize {
        match self {
            Generator::PhaseShifter { wire, .. }
            | Generator::BeamSplitter { wire, .. }
            | Generator::Swap { wire }
            | Generator::Source { wire, .. }
            | Generator::Detector { wire, .. } => *wire,
        }
    }

    pub fn wire_mut(&mut self) -> &mut usize {
        match self {
            Generator::PhaseShifter { wire, .. }
            | Generator::BeamSplitter { wire, .. }
            | Generator::Swap { wire }
            | Generator::Source { wire, .. }
            | Generator::Detector { wire, .. } => wire,
        }
    }

    pub fn arity_in(&self) -> usize {
        match self {
            Generator::PhaseShifter { .. } => 1,
            Generator::BeamSplitter { .. } | Generator::Swap { .. } => 2,
            Generator::Source { .. } => 0,
            Generator::Detector { effect, .. } => effect.modes(),
        }
    }

    pub fn arity_out(&self) -> usize {
        match self {
            Generator::PhaseShifter { .. } => 1,
            Generator::BeamSplitter { .. } | Generator::Swap { .. } => 2,
            Generator::Source { state, .. } => state.modes(),
            Generator::Detector { .. } => 0,
        }
    }

    pub fn is_lopp(&self) -> bool {
        !matches!(self, Generator::Source { .. } | Generator::Detector { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::PhaseShifter { .. } => "phase shifter",
            Generator::BeamSplitter { .. } => "beam splitter",
            Generator::Swap { .. } => "swap",
            Generator::Source { .. } => "source",
            Generator::Detector { .. } => "detector",
        }
    }

    // Sort key inside a column: sources first at a shared position.
    fn sort_key(&self) -> (usize, u8) {
        (self.wire(), if self.is_source() { 0 } else { 1 })
    }

    fn is_source(&self) -> bool {
        matches!(self, Generator::Source { .. })
    }

    /// True when the two generators cannot share a column.
    pub fn conflicts_with(&self, other: &Generator) -> bool {
        match (self.is_source(), other.is_source()) {
            (true, true) => false,
            (true, false) => {
                let (a, b) = (other.wire(), other.wire() + other.arity_in());
                a < self.wire() && self.wire() < b
            }
            (false, true) => other.conflicts_with(self),
            (false, false) => {
                let (a, b) = (self.wire(), self.wire() + self.arity_in());
                let (c, d) = (other.wire(), other.wire() + other.arity_in());
                a < d && c < b
            }
        }
    }
}

/// Generators applied in parallel. Wires not mentioned pass through.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Column(pub Vec<Generator>);

impl Column {
    pub fn new(mut gens: Vec<Generator>) -> Self {
        gens.sort_by_key(Generator::sort_key);
        Column(gens)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn width_delta(&self) -> isize {
        self.0
            .iter()
            .map(|g| g.arity_out() as isize - g.arity_in() as isize)
            .sum()
    }

    /// Whether `g` can join this column without overlapping anything.
    pub fn accepts(&self, g: &Generator) -> bool {
        self.0.iter().all(|h| !h.conflicts_with(g))
    }

    pub fn push(&mut self, g: Generator) {
        self.0.push(g);
        self.0.sort_by_key(Generator::sort_key);
    }
}

/// A diagram from `n_in` wires to `n_out` wires.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    n_in: usize,
    n_out: usize,
    columns: Vec<Column>,
}

/// All invariant violations found by [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<CircuitError>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_columns(n_in: usize, columns: &[Column]) -> (usize, Vec<CircuitError>) {
    let mut errs = Vec::new();
    let mut width = n_in;
    for (ci, col) in columns.iter().enumerate() {
        for (gi, g) in col.0.iter().enumerate() {
            let needed = match g {
                Generator::Source { state, .. } => {
                    if state.modes() == 0 {
                        errs.push(CircuitError::ModeCount {
                            column: ci,
                            what: "source",
                            got: 0,
                            expected: 1,
                        });
                    }
                    g.wire()
                }
                Generator::Detector { effect, .. } => {
                    if effect.modes() == 0 {
                        errs.push(CircuitError::ModeCount {
                            column: ci,
                            what: "detector",
                            got: 0,
                            expected: 1,
                        });
                    }
                    g.wire() + g.arity_in()
                }
                _ => g.wire() + g.arity_in(),
            };
            if needed > width {
                errs.push(CircuitError::OutOfRange {
                    column: ci,
                    wire: g.wire(),
                    needed,
                    available: width,
                });
            }
            if col.0[..gi].iter().any(|h| h.conflicts_with(g)) {
                errs.push(CircuitError::Overlap {
                    column: ci,
                    wire: g.wire(),
                });
            }
        }
        width = (width as isize + col.width_delta()).max(0) as usize;
    }
    (width, errs)
}

impl Circuit {
    /// Validate and build. `n_out` is derived from the columns.
    pub fn new(n_in: usize, columns: Vec<Column>) -> Result<Self, CircuitError> {
        let columns: Vec<Column> = columns.into_iter().map(|c| Column::new(c.0)).collect();
        let (n_out, errs) = check_columns(n_in, &columns);
        match errs.into_iter().next() {
            Some(e) => Err(e),
            None => Ok(Circuit { n_in, n_out, columns }),
        }
    }

    /// Like [`Circuit::new`] but also checks a declared output width.
    pub fn with_declared_output(n_in: usize, n_out: usize, columns: Vec<Column>) -> Result<Self, CircuitError> {
        let c = Circuit::new(n_in, columns)?;
        if c.n_out != n_out {
            return Err(CircuitError::OutputWidth {
                declared: n_out,
                actual: c.n_out,
            });
        }
        Ok(c)
    }

    /// One generator per column, in order.
    pub fn from_sequence(n_in: usize, gens: impl IntoIterator<Item = Generator>) -> Result<Self, CircuitError> {
        Circuit::new(n_in, gens.into_iter().map(|g| Column(vec![g])).collect())
    }

    pub fn identity(n: usize) -> Self {
        Circuit {
            n_in: n,
            n_out: n,
            columns: Vec::new(),
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.columns.iter().flat_map(|c| c.0.iter())
    }

    pub fn generator_count(&self) -> usize {
        self.columns.iter().map(|c| c.0.len()).sum()
    }

    pub fn is_lopp(&self) -> bool {
        self.generators().all(Generator::is_lopp)
    }

    /// Input width of every column, plus the final output width.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.n_in];
        for c in &self.columns {
            let last = *w.last().unwrap_or(&0);
            w.push((last as isize + c.width_delta()) as usize);
        }
        w
    }

    pub fn validate(&self) -> ValidationReport {
        let (n_out, mut violations) = check_columns(self.n_in, &self.columns);
        if n_out != self.n_out {
            violations.push(CircuitError::OutputWidth {
                declared: self.n_out,
                actual: n_out,
            });
        }
        ValidationReport { violations }
    }

    /// `self` followed by `next`.
    pub fn compose_seq(&self, next: &Circuit) -> Result<Circuit, CircuitError> {
        if self.n_out != next.n_in {
            return Err(CircuitError::Compose {
                left_out: self.n_out,
                right_in: next.n_in,
            });
        }
        let mut columns = self.columns.clone();
        columns.extend(next.columns.iter().cloned());
        Ok(Circuit {
            n_in: self.n_in,
            n_out: next.n_out,
            columns,
        })
    }

    /// `self` on top, `below` underneath.
    pub fn compose_tensor(&self, below: &Circuit) -> Circuit {
        let len = self.columns.len().max(below.columns.len());
        let top_widths = self.widths();
        let mut columns = Vec::with_capacity(len);
        for i in 0..len {
            let offset = top_widths[i.min(self.columns.len())];
            let mut gens: Vec<Generator> = self.columns.get(i).map(|c| c.0.clone()).unwrap_or_default();
            if let Some(c) = below.columns.get(i) {
                gens.extend(c.0.iter().cloned().map(|mut g| {
                    *g.wire_mut() += offset;
                    g
                }));
            }
            columns.push(Column::new(gens));
        }
        Circuit {
            n_in: self.n_in + below.n_in,
            n_out: self.n_out + below.n_out,
            columns,
        }
    }

    /// Drop empty columns.
    pub fn without_identity_columns(&self) -> Circuit {
        Circuit {
            n_in: self.n_in,
            n_out: self.n_out,
            columns: self.columns.iter().filter(|c| !c.is_identity()).cloned().collect(),
        }
    }

    /// Slide every generator as far left as its wires allow.
    ///
    /// Two circuits that differ only by moving generators across independent
    /// wires have the same canonical layout.
    pub fn canonicalize_layout(&self) -> Circuit {
        Layout::trace(self).rebuild(self.n_in, self.n_out)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n_in: usize,
            n_out: usize,
            columns: Vec<Column>,
        }
        let r = Raw::deserialize(d)?;
        Circuit::with_declared_output(r.n_in, r.n_out, r.columns).map_err(serde::de::Error::custom)
    }
}

/// Wire segments ("strands") and the generators that produce and consume them.
struct Layout {
    /// Per generator: the generator, its input strands, its output strands.
    nodes: Vec<(Generator, Vec<usize>, Vec<usize>)>,
    /// Strands in top-to-bottom order; dead strands stay as placeholders.
    order: Vec<usize>,
    producer: HashMap<usize, usize>,
    consumer: HashMap<usize, usize>,
    initial: Vec<usize>,
}

impl Layout {
    fn trace(c: &Circuit) -> Layout {
        let mut next = c.n_in;
        let initial: Vec<usize> = (0..c.n_in).collect();
        let mut live = initial.clone();
        let mut order = initial.clone();
        let mut nodes = Vec::new();
        let mut producer = HashMap::new();
        let mut consumer = HashMap::new();
        for col in &c.columns {
            let width = live.len();
            let mut new_live = Vec::new();
            // Sources grouped by insertion point, interval gens by start.
            let mut pos = 0;
            let mut gi = 0;
            let gens = &col.0;
            while pos <= width {
                while gi < gens.len() && gens[gi].wire() == pos && gens[gi].is_source() {
                    let g = &gens[gi];
                    let outs: Vec<usize> = (next..next + g.arity_out()).collect();
                    next += outs.len();
                    let at = if pos < width {
                        order.iter().position(|s| *s == live[pos]).unwrap_or(order.len())
                    } else {
                        live.last()
                            .and_then(|l| order.iter().position(|s| s == l))
                            .map_or(order.len(), |p| p + 1)
                    };
                    // Keep insertion order stable for stacked sources.
                    let at = at.max(
                        new_live
                            .last()
                            .and_then(|l| order.iter().position(|s| s == l))
                            .map_or(0, |p| p + 1),
                    );
                    for (k, s) in outs.iter().enumerate() {
                        order.insert(at + k, *s);
                        producer.insert(*s, nodes.len());
                    }
                    new_live.extend(outs.iter().copied());
                    nodes.push((g.clone(), Vec::new(), outs));
                    gi += 1;
                }
                if pos == width {
                    break;
                }
                if gi < gens.len() && gens[gi].wire() == pos {
                    let g = &gens[gi];
                    let ins: Vec<usize> = live[pos..pos + g.arity_in()].to_vec();
                    let outs: Vec<usize> = (next..next + g.arity_out()).collect();
                    next += outs.len();
                    let last_in = ins.last().copied().expect("interval generators have inputs");
                    let at = order.iter().position(|s| *s == last_in).unwrap() + 1;
                    for (k, s) in outs.iter().enumerate() {
                        order.insert(at + k, *s);
                        producer.insert(*s, nodes.len());
                    }
                    for s in &ins {
                        consumer.insert(*s, nodes.len());
                    }
                    new_live.extend(outs.iter().copied());
                    nodes.push((g.clone(), ins, outs));
                    pos += g.arity_in();
                    gi += 1;
                } else {
                    new_live.push(live[pos]);
                    pos += 1;
                }
            }
            live = new_live;
        }
        Layout {
            nodes,
            order,
            producer,
            consumer,
            initial,
        }
    }

    fn rebuild(&self, n_in: usize, n_out: usize) -> Circuit {
        let mut level = vec![0usize; self.nodes.len()];
        for (i, (_, ins, _)) in self.nodes.iter().enumerate() {
            level[i] = ins
                .iter()
                .filter_map(|s| self.producer.get(s))
                .map(|p| level[*p] + 1)
                .max()
                .unwrap_or(0);
        }
        let rank: HashMap<usize, usize> = self.order.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let depth = level.iter().map(|l| l + 1).max().unwrap_or(0);
        let born = |s: &usize| -> isize { self.producer.get(s).map_or(-1, |p| level[*p] as isize) };
        let dies = |s: &usize| -> usize { self.consumer.get(s).map_or(usize::MAX, |c| level[*c]) };
        let mut all: Vec<usize> = self.initial.clone();
        all.extend(self.nodes.iter().flat_map(|(_, _, o)| o.iter().copied()));
        all.sort_by_key(|s| rank[s]);
        let mut columns = Vec::with_capacity(depth);
        for l in 0..depth {
            let live: Vec<usize> = all
                .iter()
                .copied()
                .filter(|s| born(s) < l as isize && dies(s) >= l)
                .collect();
            let mut gens = Vec::new();
            for (i, (g, ins, outs)) in self.nodes.iter().enumerate() {
                if level[i] != l {
                    continue;
                }
                let mut g = g.clone();
                *g.wire_mut() = match ins.first() {
                    Some(s) => live.iter().position(|x| x == s).expect("input strand is live"),
                    None => {
                        let r = rank[&outs[0]];
                        live.iter().filter(|x| rank[*x] < r).count()
                    }
                };
                gens.push((rank.get(outs.first().or(ins.first()).unwrap()).copied(), g));
            }
            // Stacked sources keep their top-to-bottom order.
            gens.sort_by_key(|(r, g)| (g.sort_key(), *r));
            columns.push(Column(gens.into_iter().map(|(_, g)| g).collect()));
        }
        Circuit { n_in, n_out, columns }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn overlap_is_reported() {
        let col = Column(vec![Generator::bs(0, 0.1), Generator::bs(1, 0.2)]);
        let err = Circuit::new(3, vec![col]).unwrap_err();
        assert!(matches!(err, CircuitError::Overlap { .. }));
    }

    #[test]
    fn empty_detector_is_reported() {
        let det = Generator::detector(0, DualFockVector::from_coefficients(FockVector::zero(0)));
        let err = Circuit::new(1, vec![Column(vec![det])]).unwrap_err();
        assert!(matches!(err, CircuitError::ModeCount { .. }));
    }

    #[test]
    fn out_of_range_is_reported() {
        assert!(matches!(
            Circuit::from_sequence(2, [Generator::bs(5, FRAC_PI_4)]),
            Err(CircuitError::OutOfRange { .. })
        ));
    }

    #[test]
    fn compose_arity() {
        let a = Circuit::identity(2);
        assert_eq!(a.compose_seq(&a).unwrap(), a);
        assert!(a.compose_seq(&Circuit::identity(3)).is_err());
        assert_eq!(
            Circuit::identity(1).compose_tensor(&Circuit::identity(1)),
            Circuit::identity(2)
        );
    }

    #[test]
    fn tensor_of_source_and_detector() {
        let s = Circuit::from_sequence(0, [Generator::source(0, FockVector::basis([1, 0]))]).unwrap();
        let d = Circuit::from_sequence(2, [Generator::detector(0, DualFockVector::basis([0, 1]))]).unwrap();
        let t = s.compose_tensor(&d);
        assert_eq!((t.n_in(), t.n_out()), (2, 2));
        assert!(t.validate().is_ok());
    }

    #[test]
    fn canonical_layout_slides_generators_left() {
        let late = Circuit::new(
            3,
            vec![Column(vec![Generator::bs(0, 0.3)]), Column(vec![Generator::ps(2, 0.7)])],
        )
        .unwrap();
        let early = Circuit::new(3, vec![Column(vec![Generator::bs(0, 0.3), Generator::ps(2, 0.7)])]).unwrap();
        assert_eq!(late.canonicalize_layout(), early.canonicalize_layout());
        assert_eq!(early.canonicalize_layout(), early);
    }

    #[test]
    fn canonical_layout_tracks_sources() {
        let c = Circuit::new(
            2,
            vec![
                Column(vec![Generator::ps(0, 0.5)]),
                Column(vec![Generator::source(1, FockVector::basis([1]))]),
                Column(vec![Generator::bs(1, 0.2)]),
            ],
        )
        .unwrap();
        let k = c.canonicalize_layout();
        assert!(k.validate().is_ok());
        assert_eq!(k.columns().len(), 2);
        assert_eq!(k.n_out(), 3);
    }
}
