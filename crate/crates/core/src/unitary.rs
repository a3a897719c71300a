//! Single-photon matrices of passive circuits.
//!
//! Index order: entry `(i, j)` is the amplitude for a photon entering on
//! wire `j` to leave on wire `i`. Circuits are read left to right, so a
//! circuit `c1` followed by `c2` has matrix `M(c2) * M(c1)`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Generator};
use crate::error::NumericError;

/// Tolerance for treating a matrix as unitary.
pub const UNITARY_EPS: f64 = 1e-9;

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(DMatrix<Complex64>);

impl UnitaryMatrix {
    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(DMatrix::identity(n, n))
    }

    /// Wrap a square matrix without checking unitarity.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self, NumericError> {
        if m.nrows() != m.ncols() {
            return Err(NumericError::Dimension {
                expected: m.nrows(),
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(UnitaryMatrix(m))
    }

    /// Row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, NumericError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(NumericError::Dimension {
                expected: n,
                rows: n,
                cols: r.len(),
            });
        }
        Ok(UnitaryMatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    /// `self * rhs`; `rhs` acts first.
    pub fn multiply(&self, rhs: &UnitaryMatrix) -> Result<Self, NumericError> {
        if self.dim() != rhs.dim() {
            return Err(NumericError::Dimension {
                expected: self.dim(),
                rows: rhs.dim(),
                cols: rhs.dim(),
            });
        }
        Ok(UnitaryMatrix(&self.0 * &rhs.0))
    }

    /// Block diagonal `self (+) below`.
    pub fn direct_sum(&self, below: &UnitaryMatrix) -> Self {
        let (a, b) = (self.dim(), below.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.0);
        m.view_mut((a, a), (b, b)).copy_from(&below.0);
        UnitaryMatrix(m)
    }

    pub fn max_diff(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let id = if i == j { 1.0 } else { 0.0 };
                (p[(i, j)] - id).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_unitary(&self, tolerance: f64) -> Result<(), NumericError> {
        let deviation = self.unitarity_deviation();
        if deviation > tolerance {
            return Err(NumericError::NotUnitary { deviation, tolerance });
        }
        Ok(())
    }

    /// Upper-left `rows x cols` block.
    pub fn submatrix(&self, rows: usize, cols: usize) -> DMatrix<Complex64> {
        self.0.view((0, 0), (rows, cols)).into_owned()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        UnitaryMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| {
                    let sign = if z.im < 0.0 { '-' } else { '+' };
                    format!("{:.12e}{}{:.12e}i", z.re, sign, z.im.abs())
                })
                .collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

/// `[[cos, i sin], [i sin, cos]]`.
pub fn bs_matrix(theta: f64) -> UnitaryMatrix {
    let (s, c) = theta.sin_cos();
    let c = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, s);
    UnitaryMatrix(DMatrix::from_row_slice(2, 2, &[c, is, is, c]))
}

/// Left-multiply `m` by a generator acting on wires starting at `wire`.
fn apply_generator(m: &mut DMatrix<Complex64>, g: &Generator) -> Result<(), NumericError> {
    match g {
        Generator::PhaseShifter { wire, phi } => {
            let p = Complex64::from_polar(1.0, phi.value);
            m.row_mut(*wire).iter_mut().for_each(|z| *z *= p);
        }
        Generator::BeamSplitter { wire, theta } => {
            let (s, c) = theta.value.sin_cos();
            let is = Complex64::new(0.0, s);
            for j in 0..m.ncols() {
                let a = m[(*wire, j)];
                let b = m[(*wire + 1, j)];
                m[(*wire, j)] = a * c + b * is;
                m[(*wire + 1, j)] = a * is + b * c;
            }
        }
        Generator::Swap { wire } => m.swap_rows(*wire, *wire + 1),
        other => return Err(NumericError::NotLopp(other.name())),
    }
    Ok(())
}

/// Single-photon matrix of a passive circuit.
pub fn matrix_of(c: &Circuit) -> Result<UnitaryMatrix, NumericError> {
    let mut m = DMatrix::identity(c.n_in(), c.n_in());
    for col in c.columns() {
        for g in col.generators() {
            apply_generator(&mut m, g)?;
        }
    }
    Ok(UnitaryMatrix(m))
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(n, &mut rng)
}

pub fn random_unitary_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    UnitaryMatrix(q)
}
