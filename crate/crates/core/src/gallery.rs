//! Reference circuits: a heralded controlled-Z in two layouts and a heralded
//! Bell-pair generator. Qubits are dual-rail, `|0>` on the upper wire.

use num_complex::Complex64;

use crate::circuit::{Circuit, Column, Generator};
use crate::dsl::parse_dsl;
use crate::fock::{DualFockVector, FockVector, Occupation};
use crate::synthesis::{synthesize_triangle, triangle_to_circuit};
use crate::unitary::UnitaryMatrix;

/// Success probability of the heralded controlled-Z.
pub const CZ_SUCCESS: f64 = 2.0 / 27.0;
/// Success probability of the Bell-pair generator.
pub const BELL_SUCCESS: f64 = 1.0 / 9.0;

/// Real orthogonal network on (control rail, target rail, ancilla, ancilla).
/// With one photon in each ancilla in and out it applies `CZ` with amplitude
/// `sqrt(2/27)` and never swaps the two rails.
pub fn knill_cz_unitary() -> UnitaryMatrix {
    let s6 = 6f64.sqrt();
    let r2 = 2f64.sqrt() / 3.0;
    let a = (3.0 - s6).sqrt() / 3.0;
    let b = (3.0 + s6).sqrt() / 3.0;
    let c = (1.0 / 6.0 - 1.0 / (3.0 * s6)).sqrt();
    let d = ((3.0 + s6) / 2.0).sqrt() / 3.0;
    let third = 1.0 / 3.0;
    let rows = [
        [-third, r2, -a, -b],
        [-r2, -third, -b, a],
        [-r2, 2.0 * third, c, d],
        [2.0 * third, r2, -d, c],
    ];
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect();
    UnitaryMatrix::from_rows(&rows).expect("square")
}

/// Dual-rail occupation of a bit string.
pub fn dual_rail(bits: &[bool]) -> Occupation {
    Occupation(bits.iter().flat_map(|&b| if b { [0, 1] } else { [1, 0] }).collect())
}

fn ancilla_pair() -> FockVector {
    FockVector::basis([1, 1])
}

fn column(g: Generator) -> Column {
    Column::new(vec![g])
}

fn triangle_of(u: &UnitaryMatrix) -> Circuit {
    let t = synthesize_triangle(u).expect("orthogonal input");
    triangle_to_circuit(&t).expect("synthesized triangle is valid")
}

/// Controlled-Z on wires `(c0, c1, t0, t1)`. The target's `|1>` rail is
/// swapped next to the control's, the ancillas enter between them and the
/// bottom rail, and the network runs as a triangle on the middle four wires.
pub fn cz_heralded() -> Circuit {
    let core = Circuit::identity(1)
        .compose_tensor(&triangle_of(&knill_cz_unitary()))
        .compose_tensor(&Circuit::identity(1));
    let mut cols = vec![column(Generator::swap(2)), column(Generator::source(3, ancilla_pair()))];
    cols.extend(core.into_columns());
    cols.push(column(Generator::detector(
        3,
        DualFockVector::from_coefficients(ancilla_pair()),
    )));
    cols.push(column(Generator::swap(2)));
    Circuit::new(4, cols).expect("layout fits")
}

/// The same gate with the ancillas below every rail and one six-wire triangle
/// that embeds the network on wires 1, 3, 4 and 5.
pub fn cz_heralded_embedded() -> Circuit {
    let u = knill_cz_unitary();
    let place = [1, 3, 4, 5];
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); 6]; 6];
    for w in [0, 2] {
        rows[w][w] = Complex64::new(1.0, 0.0);
    }
    for (i, &wi) in place.iter().enumerate() {
        for (j, &wj) in place.iter().enumerate() {
            rows[wi][wj] = u.get(i, j);
        }
    }
    let w = UnitaryMatrix::from_rows(&rows).expect("square");
    let mut cols = vec![column(Generator::source(4, ancilla_pair()))];
    cols.extend(triangle_of(&w).into_columns());
    cols.push(column(Generator::detector(
        4,
        DualFockVector::from_coefficients(ancilla_pair()),
    )));
    Circuit::new(4, cols).expect("layout fits")
}

/// Text of [`bell_generator`].
pub const BELL_DSL: &str = "\
circuit 6 -> 4
# both qubits into superposition
bs 0 pi/4
bs 2 pi/4
---
# controlled-Z from three 1/3 beam splitters, vacuum in wires 4 and 5
swap 1
---
bs 2 acos(1/sqrt(3))
---
swap 3
---
swap 2
---
swap 1
---
bs 1 acos(1/sqrt(3))
---
swap 4
---
swap 3
---
swap 2
---
swap 1
---
bs 0 acos(1/sqrt(3))
---
detector 2 @ 1 { 0,0: 1 }
---
swap 1
---
# rotate the target so the pair reads |00> + |11>
bs 2 -pi/4
";

/// Two photons in `|1,0,1,0,0,0>` come out as `|1,0,1,0> + |0,1,0,1>` with
/// probability [`BELL_SUCCESS`] when both vacuum wires read zero photons.
pub fn bell_generator() -> Circuit {
    parse_dsl(BELL_DSL).expect("gallery text parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{eval_circuit, EvalConfig};
    use crate::unitary::matrix_of;

    fn logical(out: &FockVector, bits: &[bool]) -> Complex64 {
        out.get(&dual_rail(bits))
    }

    #[test]
    fn network_is_orthogonal() {
        assert!(knill_cz_unitary().unitarity_deviation() < 1e-14);
    }

    #[test]
    fn triangle_reproduces_network() {
        let u = knill_cz_unitary();
        assert!(matrix_of(&triangle_of(&u)).unwrap().max_diff(&u) < 1e-12);
    }

    #[test]
    fn both_layouts_apply_cz() {
        let cfg = EvalConfig::default();
        for c in [cz_heralded(), cz_heralded_embedded()] {
            let mut amps = Vec::new();
            for bits in [[false, false], [false, true], [true, false], [true, true]] {
                let out = eval_circuit(&c, &FockVector::basis(dual_rail(&bits)), &cfg).unwrap();
                amps.push(logical(&out, &bits));
                for other in [[false, false], [false, true], [true, false], [true, true]] {
                    if other != bits {
                        assert!(logical(&out, &other).norm() < 1e-12);
                    }
                }
            }
            let g = amps[0];
            assert!((g.norm_sqr() - CZ_SUCCESS).abs() < 1e-12);
            for (k, a) in amps.iter().enumerate() {
                let want = if k == 3 { -g } else { g };
                assert!((a - want).norm() < 1e-12, "{k}: {a}");
            }
        }
    }

    #[test]
    fn bell_pair_probability() {
        let out = eval_circuit(
            &bell_generator(),
            &FockVector::basis([1, 0, 1, 0, 0, 0]),
            &EvalConfig::default(),
        )
        .unwrap();
        let a = logical(&out, &[false, false]);
        let b = logical(&out, &[true, true]);
        assert!((a - b).norm() < 1e-12);
        assert!(logical(&out, &[false, true]).norm() < 1e-12);
        assert!(logical(&out, &[true, false]).norm() < 1e-12);
        assert!((a.norm_sqr() + b.norm_sqr() - BELL_SUCCESS).abs() < 1e-12);
    }

    #[test]
    fn layouts_share_a_normal_form() {
        let a = crate::rewrite::normalize(&cz_heralded()).unwrap();
        let b = crate::rewrite::normalize(&cz_heralded_embedded()).unwrap();
        assert!(crate::rewrite::nf_equal(&a, &b));
    }
}
