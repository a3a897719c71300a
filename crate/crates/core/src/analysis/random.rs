use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Generator};
use crate::error::NumericError;
use crate::fock::{DualFockVector, FockVector, Occupation};
use crate::synthesis::{synthesize_tmn, Split, TriangleParams};
use crate::unitary::random_unitary_with;

/// Bounds for [`random_circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomCircuitConfig {
    /// Visible inputs are drawn from `1..=max_visible`.
    pub max_visible: usize,
    /// At most this many sources, and separately this many detectors.
    pub max_boxes: usize,
    /// Terms per source or detector.
    pub max_support: usize,
    pub max_generators: usize,
}

impl Default for RandomCircuitConfig {
    fn default() -> Self {
        RandomCircuitConfig {
            max_visible: 4,
            max_boxes: 2,
            max_support: 3,
            max_generators: 20,
        }
    }
}

fn random_amplitude<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A nonzero state on `modes` modes with at most `support` terms, each mode
/// holding at most `max_occ` photons.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, modes: usize, support: usize, max_occ: u32) -> FockVector {
    let mut f = FockVector::zero(modes);
    for _ in 0..rng.gen_range(1..=support.max(1)) {
        let occ = (0..modes).map(|_| rng.gen_range(0..=max_occ)).collect();
        f.add_term(Occupation(occ), random_amplitude(rng));
    }
    if f.is_zero() {
        f = FockVector::vacuum(modes);
    }
    f
}

/// Phase shifters, beam splitters and swaps on `modes` wires.
pub fn random_lopp<R: Rng + ?Sized>(rng: &mut R, modes: usize, gens: usize) -> Circuit {
    let seq: Vec<Generator> = (0..gens).map(|_| random_lopp_gate(rng, modes)).collect();
    Circuit::from_sequence(modes, seq).expect("gates fit")
}

fn random_lopp_gate<R: Rng + ?Sized>(rng: &mut R, width: usize) -> Generator {
    let angle = rng.gen_range(-7.0..7.0);
    if width < 2 || rng.gen_bool(0.4) {
        return Generator::ps(rng.gen_range(0..width), angle);
    }
    let at = rng.gen_range(0..width - 1);
    if rng.gen_bool(0.15) {
        Generator::swap(at)
    } else {
        Generator::bs(at, angle)
    }
}

/// A random circuit with sources and detectors placed anywhere.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomCircuitConfig) -> Circuit {
    let n = rng.gen_range(1..=cfg.max_visible.max(1));
    let mut width = n;
    let (mut sources, mut detectors) = (0, 0);
    let mut seq = Vec::new();
    for _ in 0..rng.gen_range(1..=cfg.max_generators.max(1)) {
        let roll: f64 = rng.gen();
        let g = if roll < 0.12 && sources < cfg.max_boxes {
            sources += 1;
            let modes = rng.gen_range(1..=2);
            let at = rng.gen_range(0..=width);
            width += modes;
            Generator::source(at, random_state(rng, modes, cfg.max_support, 1))
        } else if roll < 0.24 && detectors < cfg.max_boxes && width >= 1 {
            detectors += 1;
            let modes = rng.gen_range(1..=width.min(2));
            let at = rng.gen_range(0..=width - modes);
            width -= modes;
            let g = random_state(rng, modes, cfg.max_support, 1);
            Generator::detector(at, DualFockVector::from_coefficients(g))
        } else if width >= 1 {
            random_lopp_gate(rng, width)
        } else {
            continue;
        };
        seq.push(g);
    }
    Circuit::from_sequence(n, seq).expect("generators fit by construction")
}

/// The triangle of a Haar-random unitary for `split`.
pub fn random_tmn<R: Rng + ?Sized>(rng: &mut R, split: Split) -> Result<TriangleParams, NumericError> {
    let u = random_unitary_with(split.size(), rng);
    synthesize_tmn(&u, split).map(|d| d.triangle)
}
