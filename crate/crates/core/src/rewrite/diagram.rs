//! The rewrite engine's working shape: every source stacked at the bottom
//! left, every detector stacked at the bottom right, passive gates between,
//! and a bottom wire running straight from the last source to the last
//! detector.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Column, Generator};
use crate::fock::{DualFockVector, FockVector};

/// A passive gate with a plain angle. Beam splitters act on `wire, wire + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Gate {
    Ps { wire: usize, phi: f64 },
    Bs { wire: usize, theta: f64 },
}

impl Gate {
    pub fn wire(&self) -> usize {
        match *self {
            Gate::Ps { wire, .. } | Gate::Bs { wire, .. } => wire,
        }
    }

    pub fn touches(&self, w: usize) -> bool {
        match *self {
            Gate::Ps { wire, .. } => wire == w,
            Gate::Bs { wire, .. } => wire == w || wire + 1 == w,
        }
    }

    pub fn wires(&self) -> &'static [usize] {
        match self {
            Gate::Ps { .. } => &[0],
            Gate::Bs { .. } => &[0, 1],
        }
    }

    pub fn shifted(self, delta: isize) -> Gate {
        let mv = |w: usize| (w as isize + delta) as usize;
        match self {
            Gate::Ps { wire, phi } => Gate::Ps { wire: mv(wire), phi },
            Gate::Bs { wire, theta } => Gate::Bs { wire: mv(wire), theta },
        }
    }

    pub fn to_generator(self) -> Generator {
        match self {
            Gate::Ps { wire, phi } => Generator::ps(wire, phi),
            Gate::Bs { wire, theta } => Generator::bs(wire, theta),
        }
    }

    pub fn from_generator(g: &Generator) -> Option<Gate> {
        match g {
            Generator::PhaseShifter { wire, phi } => Some(Gate::Ps {
                wire: *wire,
                phi: phi.value,
            }),
            Generator::BeamSplitter { wire, theta } => Some(Gate::Bs {
                wire: *wire,
                theta: theta.value,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Diagram {
    pub n: usize,
    pub m: usize,
    /// Wires between the source and detector columns, connecting wire included.
    pub width: usize,
    /// Top to bottom, covering wires `n..width`.
    pub sources: Vec<FockVector>,
    /// Time order.
    pub gates: Vec<Gate>,
    /// Top to bottom, covering wires `m..width`.
    pub detectors: Vec<DualFockVector>,
}

enum Op {
    Ps(usize, f64),
    Bs(usize, usize, f64),
}

/// Physical wire permutation, realized with swap gates.
struct Tracks {
    pos: Vec<usize>,
    at: Vec<usize>,
    gates: Vec<Gate>,
}

impl Tracks {
    fn new(width: usize) -> Self {
        Tracks {
            pos: (0..width).collect(),
            at: (0..width).collect(),
            gates: Vec::new(),
        }
    }

    /// Exchange physical wires `p` and `p + 1` with `PS(3pi/2)` on both, then `BS(pi/2)`.
    fn swap(&mut self, p: usize) {
        let phi = 1.5 * PI;
        self.gates.push(Gate::Ps { wire: p, phi });
        self.gates.push(Gate::Ps { wire: p + 1, phi });
        self.gates.push(Gate::Bs {
            wire: p,
            theta: FRAC_PI_2,
        });
        let (a, b) = (self.at[p], self.at[p + 1]);
        self.at.swap(p, p + 1);
        self.pos[a] = p + 1;
        self.pos[b] = p;
    }

    fn bs(&mut self, top: usize, bottom: usize, theta: f64) {
        while self.pos[bottom] > self.pos[top] + 1 {
            self.swap(self.pos[bottom] - 1);
        }
        while self.pos[bottom] < self.pos[top] {
            self.swap(self.pos[bottom]);
        }
        self.gates.push(Gate::Bs {
            wire: self.pos[top],
            theta,
        });
    }

    fn sort_to(&mut self, target: &[usize]) {
        // Bubble sort by target rank; each exchange is one swap gate.
        let rank: Vec<usize> = {
            let mut r = vec![0; target.len()];
            for (i, t) in target.iter().enumerate() {
                r[*t] = i;
            }
            r
        };
        for _ in 0..self.at.len() {
            for p in 0..self.at.len().saturating_sub(1) {
                if rank[self.at[p]] > rank[self.at[p + 1]] {
                    self.swap(p);
                }
            }
        }
    }
}

impl Diagram {
    /// Bring any circuit to the working shape. Swaps become passive gates,
    /// sources move to the start and detectors to the end (both commute with
    /// gates on other wires), and a vacuum-to-vacuum connecting wire is added
    /// unless the bottom wire already is one.
    pub fn prepare(c: &Circuit) -> Diagram {
        Diagram::prepare_with(c, true)
    }

    /// As [`Diagram::prepare`]; `connect = false` skips the connecting wire.
    pub fn prepare_with(c: &Circuit, connect: bool) -> Diagram {
        let n = c.n_in();
        let mut next = n;
        let mut live: Vec<usize> = (0..n).collect();
        let mut ops = Vec::new();
        let mut sources: Vec<(FockVector, Vec<usize>)> = Vec::new();
        let mut detectors: Vec<(DualFockVector, Vec<usize>)> = Vec::new();
        for col in c.columns() {
            let mut out = Vec::with_capacity(live.len());
            let mut pos = 0;
            for g in col.generators() {
                while pos < g.wire() {
                    out.push(live[pos]);
                    pos += 1;
                }
                match g {
                    Generator::Source { state, .. } => {
                        let tracks: Vec<usize> = (next..next + state.modes()).collect();
                        next += state.modes();
                        out.extend(&tracks);
                        sources.push((state.clone(), tracks));
                    }
                    Generator::Detector { effect, .. } => {
                        let k = effect.modes();
                        detectors.push((effect.clone(), live[pos..pos + k].to_vec()));
                        pos += k;
                    }
                    Generator::PhaseShifter { phi, .. } => {
                        ops.push(Op::Ps(live[pos], phi.value));
                        out.push(live[pos]);
                        pos += 1;
                    }
                    Generator::BeamSplitter { theta, .. } => {
                        ops.push(Op::Bs(live[pos], live[pos + 1], theta.value));
                        out.extend([live[pos], live[pos + 1]]);
                        pos += 2;
                    }
                    Generator::Swap { .. } => {
                        out.extend([live[pos + 1], live[pos]]);
                        pos += 2;
                    }
                }
            }
            out.extend(&live[pos..]);
            live = out;
        }
        let m = live.len();
        let width = next;
        let mut tracks = Tracks::new(width);
        for op in ops {
            match op {
                Op::Ps(t, phi) => {
                    let wire = tracks.pos[t];
                    tracks.gates.push(Gate::Ps { wire, phi });
                }
                Op::Bs(a, b, theta) => tracks.bs(a, b, theta),
            }
        }
        let target: Vec<usize> = live
            .iter()
            .copied()
            .chain(detectors.iter().flat_map(|(_, t)| t.iter().copied()))
            .collect();
        tracks.sort_to(&target);
        let mut d = Diagram {
            n,
            m,
            width,
            sources: sources.into_iter().map(|(s, _)| s).collect(),
            gates: tracks.gates,
            detectors: detectors.into_iter().map(|(e, _)| e).collect(),
        };
        if connect && !d.has_connecting_wire() {
            d.sources.push(FockVector::vacuum(1));
            d.detectors.push(DualFockVector::basis([0]));
            d.width += 1;
        }
        d.canonical()
    }

    fn has_connecting_wire(&self) -> bool {
        let bottom = match self.width.checked_sub(1) {
            Some(b) => b,
            None => return false,
        };
        bottom >= self.n.max(self.m)
            && !self.sources.is_empty()
            && !self.detectors.is_empty()
            && !self.gates.iter().any(|g| g.touches(bottom))
    }

    /// ASAP column of each gate, counted from 0.
    pub fn levels(&self) -> Vec<usize> {
        let mut front = vec![0usize; self.width];
        self.gates
            .iter()
            .map(|g| {
                let w = g.wire();
                let lvl = g.wires().iter().map(|o| front[w + o]).max().unwrap_or(0);
                for o in g.wires() {
                    front[w + o] = lvl + 1;
                }
                lvl
            })
            .collect()
    }

    /// Gates sorted by `(level, wire)`, the order [`Diagram::prepare`]
    /// reads them back in.
    pub fn canonical(mut self) -> Self {
        let lv = self.levels();
        let mut idx: Vec<usize> = (0..self.gates.len()).collect();
        idx.sort_by_key(|&i| (lv[i], self.gates[i].wire()));
        self.gates = idx.into_iter().map(|i| self.gates[i]).collect();
        self
    }

    pub fn to_circuit(&self) -> Circuit {
        let lv = self.levels();
        let depth = lv.iter().map(|l| l + 1).max().unwrap_or(0);
        let mut cols: Vec<Vec<Generator>> = vec![Vec::new(); depth + 2];
        cols[0] = self
            .sources
            .iter()
            .map(|s| Generator::source(self.n, s.clone()))
            .collect();
        for (g, l) in self.gates.iter().zip(&lv) {
            cols[l + 1].push(g.to_generator());
        }
        let mut at = self.m;
        for e in &self.detectors {
            cols[depth + 1].push(Generator::detector(at, e.clone()));
            at += e.modes();
        }
        Circuit::new(self.n, cols.into_iter().map(Column::new).collect()).expect("diagram renders to a valid circuit")
    }

    /// Index of the source covering wire `w` and the wire's mode inside it.
    pub fn source_of(&self, w: usize) -> Option<(usize, usize)> {
        let mut at = self.n;
        for (i, s) in self.sources.iter().enumerate() {
            if w >= at && w < at + s.modes() {
                return Some((i, w - at));
            }
            at += s.modes();
        }
        None
    }

    pub fn detector_of(&self, w: usize) -> Option<(usize, usize)> {
        let mut at = self.m;
        for (i, e) in self.detectors.iter().enumerate() {
            if w >= at && w < at + e.modes() {
                return Some((i, w - at));
            }
            at += e.modes();
        }
        None
    }

    pub fn source_offset(&self, i: usize) -> usize {
        self.n + self.sources[..i].iter().map(FockVector::modes).sum::<usize>()
    }

    pub fn detector_offset(&self, i: usize) -> usize {
        self.m + self.detectors[..i].iter().map(DualFockVector::modes).sum::<usize>()
    }

    pub fn next_on(&self, i: usize, w: usize) -> Option<usize> {
        (i + 1..self.gates.len()).find(|&j| self.gates[j].touches(w))
    }

    pub fn prev_on(&self, i: usize, w: usize) -> Option<usize> {
        (0..i).rev().find(|&j| self.gates[j].touches(w))
    }

    /// True once sources and detectors are each a single box.
    pub fn is_merged(&self) -> bool {
        self.sources.len() == 1 && self.detectors.len() == 1
    }

    /// Replace the gates at `pattern` (sorted, convex) by `with`. Gates in
    /// between that feed the pattern go before the replacement, the rest after.
    pub fn replace(&mut self, pattern: &[usize], with: Vec<Gate>) {
        let (lo, hi) = (pattern[0], *pattern.last().expect("nonempty pattern"));
        let mut feeds = vec![false; hi + 1];
        for k in (lo..=hi).rev() {
            if pattern.contains(&k) {
                feeds[k] = true;
                continue;
            }
            let g = self.gates[k];
            feeds[k] = g
                .wires()
                .iter()
                .filter_map(|o| self.next_on(k, g.wire() + o))
                .any(|j| j <= hi && feeds[j]);
        }
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (k, &feeds_k) in feeds.iter().enumerate().take(hi + 1).skip(lo) {
            if pattern.contains(&k) {
                continue;
            }
            if feeds_k {
                before.push(self.gates[k]);
            } else {
                after.push(self.gates[k]);
            }
        }
        let tail = self.gates.split_off(hi + 1);
        self.gates.truncate(lo);
        self.gates.extend(before);
        self.gates.extend(with);
        self.gates.extend(after);
        self.gates.extend(tail);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{eval_circuit, EvalConfig, Occupation};

    fn residual(a: &Circuit, b: &Circuit) -> f64 {
        let cfg = EvalConfig::default();
        Occupation::up_to(a.n_in(), 3)
            .into_iter()
            .map(|o| {
                let v = FockVector::basis(o);
                eval_circuit(a, &v, &cfg)
                    .unwrap()
                    .max_diff(&eval_circuit(b, &v, &cfg).unwrap())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn prepare_keeps_semantics() {
        let src = FockVector::from_terms(
            2,
            [
                (vec![1, 0], crate::Complex64::new(0.6, 0.0)),
                (vec![0, 1], crate::Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let c = Circuit::new(
            2,
            vec![
                Column::new(vec![Generator::bs(0, 0.3)]),
                Column::new(vec![Generator::source(1, src)]),
                Column::new(vec![Generator::swap(0), Generator::bs(2, 0.7)]),
                Column::new(vec![Generator::detector(1, DualFockVector::basis([1]))]),
                Column::new(vec![Generator::ps(2, 0.4)]),
            ],
        )
        .unwrap();
        let d = Diagram::prepare(&c);
        assert_eq!((d.n, d.m), (2, 3));
        assert!(d.has_connecting_wire());
        let back = d.to_circuit();
        assert!(residual(&c, &back) < 1e-12);
        // Rendering is a fixed point of preparation.
        assert_eq!(Diagram::prepare(&back), d);
    }

    #[test]
    fn replace_orders_independent_gates() {
        let mut d = Diagram {
            n: 3,
            m: 3,
            width: 3,
            sources: vec![],
            gates: vec![
                Gate::Ps { wire: 0, phi: 1.0 },
                Gate::Ps { wire: 2, phi: 0.5 },
                Gate::Bs { wire: 1, theta: 0.2 },
                Gate::Bs { wire: 0, theta: 0.3 },
            ],
            detectors: vec![],
        };
        d.replace(&[0, 3], vec![Gate::Bs { wire: 0, theta: 0.3 }]);
        assert_eq!(d.gates[0], Gate::Ps { wire: 2, phi: 0.5 });
        assert_eq!(d.gates[1], Gate::Bs { wire: 1, theta: 0.2 });
    }
}
