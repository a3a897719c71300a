//! The termination measure: six counters compared lexicographically.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use super::diagram::{Diagram, Gate};
use super::pairing::checked_pair_m;
use crate::angle::ANGLE_EPS;
use crate::fock::DualFockVector;

/// Amplitudes within this of `1` count as exactly one in the detector score.
const ONE_EPS: f64 = 1e-9;

/// Weight of a non-canonical detector term in `x6`. Must exceed any reachable
/// total support so that `remove-g` wins over the growth it causes in `f`.
const LOOSE_WEIGHT: u64 = 1 << 32;

/// `(x1, ..., x6)`; the derived order is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RankTuple {
    /// Beam splitters weighted by how high they sit.
    pub x1: u64,
    /// Beam-splitter angles outside `[0, pi/2]`, `[0, pi)` and `[0, 2pi)`, one count per range.
    pub x2: u64,
    /// Phase shifters weighted by `9^depth`; exact, since depths reach the hundreds.
    #[serde(serialize_with = "decimal")]
    pub x3: BigUint,
    /// Bare wires from a source to a detector.
    pub x4: u64,
    /// Sources plus detectors.
    pub x5: u64,
    /// Source and detector support sizes, plus [`LOOSE_WEIGHT`] per detector
    /// term not of the form `<N(L)|<L|` with coefficient one.
    pub x6: u64,
}

fn decimal<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl fmt::Display for RankTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{},{})",
            self.x1, self.x2, self.x3, self.x4, self.x5, self.x6
        )
    }
}

/// Snap to the nearest multiple of `pi/2` when within [`ANGLE_EPS`].
pub(crate) fn snap(x: f64) -> f64 {
    let k = (x / FRAC_PI_2).round();
    if (x - k * FRAC_PI_2).abs() < ANGLE_EPS {
        k * FRAC_PI_2
    } else {
        x
    }
}

pub(crate) fn in_turn(x: f64) -> bool {
    (0.0..TAU).contains(&snap(x))
}

fn theta_score(theta: f64) -> u64 {
    let t = snap(theta);
    [FRAC_PI_2, PI, TAU]
        .iter()
        .enumerate()
        .filter(|&(i, &hi)| {
            let inside = if i == 0 {
                (0.0..=hi).contains(&t)
            } else {
                (0.0..hi).contains(&t)
            };
            !inside
        })
        .count() as u64
}

/// `PS` at `i` sits on the top input of a beam splitter.
pub(crate) fn is_top_left(d: &Diagram, i: usize) -> bool {
    let w = d.gates[i].wire();
    matches!(d.next_on(i, w).map(|j| d.gates[j]), Some(Gate::Bs { wire, .. }) if wire == w)
}

fn phase_weight(d: &Diagram, i: usize, phi: f64) -> u32 {
    let top = if is_top_left(d, i) { 2 } else { 0 };
    let out = if in_turn(phi) { 0 } else { 1 };
    2 + top + out
}

/// Most beam splitters a photon can cross between each gate and the end.
fn depths(d: &Diagram) -> Vec<u32> {
    let mut after = vec![0u32; d.width];
    let mut out = vec![0u32; d.gates.len()];
    for (i, g) in d.gates.iter().enumerate().rev() {
        match *g {
            Gate::Ps { wire, .. } => out[i] = after[wire],
            Gate::Bs { wire, .. } => {
                let v = 1 + after[wire].max(after[wire + 1]);
                after[wire] = v;
                after[wire + 1] = v;
                out[i] = v;
            }
        }
    }
    out
}

fn detector_score(g: &DualFockVector) -> u64 {
    let c2 = g.iter().count() as u64;
    let c3 = g
        .iter()
        .filter(|(occ, z)| {
            let (ell, head) = occ.as_slice().split_last().expect("connecting mode");
            (*z - 1.0).norm() < ONE_EPS && checked_pair_m(head) == Some(u64::from(*ell))
        })
        .count() as u64;
    c2 + (c2 - c3).saturating_mul(LOOSE_WEIGHT)
}

pub(crate) fn rank(d: &Diagram) -> RankTuple {
    let depth = depths(d);
    let mut r = RankTuple {
        x1: 0,
        x2: 0,
        x3: BigUint::default(),
        x4: 0,
        x5: (d.sources.len() + d.detectors.len()) as u64,
        x6: 0,
    };
    for (i, g) in d.gates.iter().enumerate() {
        match *g {
            Gate::Bs { wire, theta } => {
                r.x1 += (d.width - wire) as u64;
                r.x2 += theta_score(theta);
            }
            Gate::Ps { phi, .. } => {
                r.x3 += BigUint::from(phase_weight(d, i, phi)) * BigUint::from(9u32).pow(depth[i]);
            }
        }
    }
    r.x4 = (d.n.max(d.m)..d.width)
        .filter(|&w| !d.gates.iter().any(|g| g.touches(w)))
        .count() as u64;
    r.x6 = d
        .sources
        .iter()
        .map(|s| s.support_len() as u64)
        .sum::<u64>()
        .saturating_add(d.detectors.iter().map(detector_score).fold(0, u64::saturating_add));
    r
}
