//! Closed-form angle solvers for the two Euler equations.
//!
//! Two-mode equation, both sides realize the same 2x2 unitary:
//! * left side, in time order: `BS(a3)`, then `PS(a0)` on wire 0 and
//!   `PS(a2)` on wire 1, then `BS(a1)`; so `U = B(a1) diag(e^{i a0}, e^{i a2}) B(a3)`.
//! * right side, in time order: `PS(b1)` on wire 1, `BS(b2)`, then `PS(b0)`
//!   on wire 0 and `PS(b3)` on wire 1; so `U = diag(e^{i b0}, e^{i b3}) B(b2) diag(1, e^{i b1})`.
//!
//! Three-mode equation over beam splitters only:
//! * left side, in time order: `BS01(g1)`, `BS12(g2)`, `BS01(g3)`;
//! * right side, in time order: `BS12(d1)`, `BS01(d2)`, `BS12(d3)`.
//!
//! Conjugating by `P = diag(1, i, -1)` turns `BS01` into a rotation about z
//! and `BS12` into a rotation about x, so the three-mode solvers are zxz and
//! xzx Euler decompositions of a real rotation.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::{circle_dist, wrap_tau};
use crate::circuit::{Circuit, Column, Generator};
use crate::error::NumericError;
use crate::unitary::{bs_matrix, UnitaryMatrix, UNITARY_EPS};

/// Magnitudes below this select a degenerate branch.
pub const BRANCH_EPS: f64 = 1e-9;

/// Left side of the two-mode equation: `[a0, a1, a2, a3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E2Lhs(pub [f64; 4]);

/// Right side of the two-mode equation: `[b0, b1, b2, b3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E2Rhs(pub [f64; 4]);

/// Left side of the three-mode equation: `[g1, g2, g3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E3Lhs(pub [f64; 3]);

/// Right side of the three-mode equation: `[d1, d2, d3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E3Rhs(pub [f64; 3]);

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn diag2(a: f64, b: f64) -> UnitaryMatrix {
    UnitaryMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        phase(a),
        phase(b),
    ])))
    .expect("square")
}

fn mul(a: &UnitaryMatrix, b: &UnitaryMatrix) -> UnitaryMatrix {
    a.multiply(b).expect("matching dimensions")
}

fn bs3(wire: usize, theta: f64) -> UnitaryMatrix {
    let b = bs_matrix(theta);
    if wire == 0 {
        b.direct_sum(&UnitaryMatrix::identity(1))
    } else {
        UnitaryMatrix::identity(1).direct_sum(&b)
    }
}

impl E2Lhs {
    pub fn matrix(&self) -> UnitaryMatrix {
        let [a0, a1, a2, a3] = self.0;
        mul(&mul(&bs_matrix(a1), &diag2(a0, a2)), &bs_matrix(a3))
    }

    pub fn circuit(&self) -> Circuit {
        let [a0, a1, a2, a3] = self.0;
        Circuit::new(
            2,
            vec![
                Column(vec![Generator::bs(0, a3)]),
                Column(vec![Generator::ps(0, a0), Generator::ps(1, a2)]),
                Column(vec![Generator::bs(0, a1)]),
            ],
        )
        .expect("well formed")
    }
}

impl E2Rhs {
    pub fn matrix(&self) -> UnitaryMatrix {
        let [b0, b1, b2, b3] = self.0;
        mul(&mul(&diag2(b0, b3), &bs_matrix(b2)), &diag2(0.0, b1))
    }

    pub fn circuit(&self) -> Circuit {
        let [b0, b1, b2, b3] = self.0;
        Circuit::new(
            2,
            vec![
                Column(vec![Generator::ps(1, b1)]),
                Column(vec![Generator::bs(0, b2)]),
                Column(vec![Generator::ps(0, b0), Generator::ps(1, b3)]),
            ],
        )
        .expect("well formed")
    }
}

impl E3Lhs {
    pub fn matrix(&self) -> UnitaryMatrix {
        let [g1, g2, g3] = self.0;
        mul(&mul(&bs3(0, g3), &bs3(1, g2)), &bs3(0, g1))
    }

    pub fn circuit(&self) -> Circuit {
        let [g1, g2, g3] = self.0;
        Circuit::from_sequence(3, [Generator::bs(0, g1), Generator::bs(1, g2), Generator::bs(0, g3)])
            .expect("well formed")
    }
}

impl E3Rhs {
    pub fn matrix(&self) -> UnitaryMatrix {
        let [d1, d2, d3] = self.0;
        mul(&mul(&bs3(1, d3), &bs3(0, d2)), &bs3(1, d1))
    }

    pub fn circuit(&self) -> Circuit {
        let [d1, d2, d3] = self.0;
        Circuit::from_sequence(3, [Generator::bs(1, d1), Generator::bs(0, d2), Generator::bs(1, d3)])
            .expect("well formed")
    }
}

fn check(u: &UnitaryMatrix, n: usize) -> Result<(), NumericError> {
    if u.dim() != n {
        return Err(NumericError::Dimension {
            expected: n,
            rows: u.dim(),
            cols: u.dim(),
        });
    }
    u.check_unitary(UNITARY_EPS)
}

/// Right-side angles with `b2 in [0, pi/2]`, `b1 = 0` when `b2` is `0` or `pi/2`.
pub fn solve_e2_rhs(u: &UnitaryMatrix) -> Result<E2Rhs, NumericError> {
    check(u, 2)?;
    let (u11, u12, u21, u22) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
    let (a, b) = (u11.norm(), u21.norm());
    let beta = if b < BRANCH_EPS {
        [u11.arg(), 0.0, 0.0, u22.arg()]
    } else if a < BRANCH_EPS {
        [u12.arg() - FRAC_PI_2, 0.0, FRAC_PI_2, u21.arg() - FRAC_PI_2]
    } else {
        [
            u11.arg(),
            u22.arg() - u21.arg() + FRAC_PI_2,
            b.atan2(a),
            u21.arg() - FRAC_PI_2,
        ]
    };
    Ok(E2Rhs([
        wrap_tau(beta[0]),
        wrap_tau(beta[1]),
        beta[2],
        wrap_tau(beta[3]),
    ]))
}

/// Bring left-side angles into `a1 in [0, pi/2)`, `a3 in [0, pi)`, others in `[0, 2pi)`,
/// using `(a1 + pi/2, a3) ~ (a1, a3 + pi/2)` with `a0`, `a2` exchanged and
/// `a3 + pi ~ a3` with `a0`, `a2` shifted by `pi`.
fn canonical_lhs([mut a0, a1, mut a2, a3]: [f64; 4]) -> [f64; 4] {
    let mut a1 = wrap_tau(a1);
    let mut a3 = a3;
    while a1 >= FRAC_PI_2 - 1e-12 {
        a1 = (a1 - FRAC_PI_2).max(0.0);
        a3 += FRAC_PI_2;
        std::mem::swap(&mut a0, &mut a2);
    }
    let d = wrap_tau(a0 - a2);
    if circle_dist(d, 0.0) < BRANCH_EPS {
        a3 += a1;
        a1 = 0.0;
    } else if circle_dist(d, PI) < BRANCH_EPS {
        a3 -= a1;
        a1 = 0.0;
    }
    let mut a3w = wrap_tau(a3);
    if a3w >= PI - 1e-12 {
        a3w = (a3w - PI).max(0.0);
        a0 += PI;
        a2 += PI;
    }
    [wrap_tau(a0), a1, wrap_tau(a2), a3w]
}

/// Left-side angles in their canonical ranges.
pub fn solve_e2_lhs(u: &UnitaryMatrix) -> Result<E2Lhs, NumericError> {
    check(u, 2)?;
    // With the Hadamard H, H u H = e^{is} Rz(a1) Rx(d) Rz(a3) in the
    // convention Rz(x) = diag(e^{ix}, e^{-ix}), Rx(x) = B(x),
    // where s = (a0 + a2) / 2 and d = (a0 - a2) / 2.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hm = UnitaryMatrix::from_rows(&[
        vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    ])
    .expect("square");
    let v = mul(&mul(&hm, u), &hm);
    let det = v.get(0, 0) * v.get(1, 1) - v.get(0, 1) * v.get(1, 0);
    let s = det.arg() / 2.0;
    let e = phase(-s);
    let (v11, v12) = (v.get(0, 0) * e, v.get(0, 1) * e);
    let (c, sn) = (v11.norm(), v12.norm());
    let i = Complex64::i();
    let (delta, a1, a3) = if sn < BRANCH_EPS {
        (0.0, 0.0, v11.arg())
    } else if c < BRANCH_EPS {
        (FRAC_PI_2, 0.0, -(v12 / i).arg())
    } else {
        let aa = v11.arg();
        let dd = (v12 / i).arg();
        (sn.atan2(c), (aa + dd) / 2.0, (aa - dd) / 2.0)
    };
    Ok(E2Lhs(canonical_lhs([s + delta, a1, s - delta, a3])))
}

fn real_rotation(r: &UnitaryMatrix) -> Result<Matrix3<f64>, NumericError> {
    check(r, 3)?;
    let p = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0)];
    let mut m = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let z = p[a].conj() * r.get(a, b) * p[b];
            if z.im.abs() > UNITARY_EPS {
                return Err(NumericError::NoSolution(UNITARY_EPS));
            }
            m[(a, b)] = z.re;
        }
    }
    if (m.determinant() - 1.0).abs() > 1e-6 {
        return Err(NumericError::NoSolution(UNITARY_EPS));
    }
    Ok(m)
}

/// Both angle triples of the three-mode equation for a beam-splitter-only unitary.
pub fn solve_e3(r: &UnitaryMatrix) -> Result<(E3Lhs, E3Rhs), NumericError> {
    let m = real_rotation(r)?;
    // R = Rz(g3) Rx(g2) Rz(g1).
    let sb = m[(2, 0)].hypot(m[(2, 1)]);
    let lhs = if sb < BRANCH_EPS {
        if m[(2, 2)] > 0.0 {
            [0.0, 0.0, m[(1, 0)].atan2(m[(0, 0)])]
        } else {
            [0.0, PI, m[(1, 0)].atan2(m[(0, 0)])]
        }
    } else {
        [
            m[(2, 0)].atan2(m[(2, 1)]),
            sb.atan2(m[(2, 2)]),
            m[(0, 2)].atan2(-m[(1, 2)]),
        ]
    };
    // R = Rx(d3) Rz(d2) Rx(d1).
    let sb = m[(0, 1)].hypot(m[(0, 2)]);
    let rhs = if sb < BRANCH_EPS {
        if m[(0, 0)] > 0.0 {
            [0.0, 0.0, m[(2, 1)].atan2(m[(1, 1)])]
        } else {
            [0.0, PI, (-m[(2, 1)]).atan2(-m[(1, 1)])]
        }
    } else {
        [
            m[(0, 2)].atan2(-m[(0, 1)]),
            sb.atan2(m[(0, 0)]),
            m[(2, 0)].atan2(m[(1, 0)]),
        ]
    };
    Ok((E3Lhs(lhs.map(wrap_tau)), E3Rhs(rhs.map(wrap_tau))))
}
