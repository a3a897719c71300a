//! Triangular circuits: synthesis from unitaries, classification and helpers.
//!
//! Layout of an `n`-wire triangle (indices are 1-based in the docs, 0-based
//! in code). Diagonal `i` acts on wires `i-1 ..= n-1` and runs after every
//! diagonal `< i`. In time order it applies `PS(phi[i][n-i+1])` on the bottom
//! wire, then for `j = n-i` down to `1` the beam splitter `BS(theta[i][j])`
//! on wires `(i+j-2, i+j-1)` followed by `PS(phi[i][j])` on its top output.
//! So the top output of diagonal `i` is output `i`, and the bottom output of
//! `theta[i][j]` feeds input `j` of diagonal `i + 1`.
//!
//! Entry `(1, j)` of the matrix is
//! `e^{i phi_1j} cos(theta_1j) * prod_{k<j} i sin(theta_1k) e^{i phi_1k}`,
//! with `theta_1n = 0`. Peeling that row fixes diagonal 1; the rest
//! recurses on the lower-right block.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::{approx_zero_mod_tau, wrap_tau, ANGLE_EPS};
use crate::circuit::{Circuit, Generator};
use crate::error::NumericError;
use crate::unitary::{UnitaryMatrix, UNITARY_EPS};

/// Angle grid of a triangular circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleParams {
    size: usize,
    /// `theta[d][j]` is `theta_{d+1, j+1}`; `theta[d].len() == size - d - 1`.
    theta: Vec<Vec<f64>>,
    /// `phi[d][j]` is `phi_{d+1, j+1}`; `phi[d].len() == size - d`.
    phi: Vec<Vec<f64>>,
}

/// Visible and auxiliary wire counts: `n + n_aux` inputs, `m + m_aux` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub n: usize,
    pub n_aux: usize,
    pub m: usize,
    pub m_aux: usize,
}

impl Split {
    pub fn size(&self) -> usize {
        self.n + self.n_aux
    }

    pub fn is_consistent(&self) -> bool {
        self.n + self.n_aux == self.m + self.m_aux
    }
}

/// Which triangle family a grid belongs to for a given split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriangleClass {
    PlainT,
    Tmn(Split),
    Trec(Split),
    NotTriangular(String),
}

impl TriangleParams {
    /// All angles zero: the identity on `size` wires.
    pub fn identity(size: usize) -> Self {
        TriangleParams {
            size,
            theta: (0..size).map(|d| vec![0.0; size - d - 1]).collect(),
            phi: (0..size).map(|d| vec![0.0; size - d]).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `theta_{i,j}`, 1-based.
    pub fn theta(&self, i: usize, j: usize) -> f64 {
        self.theta[i - 1][j - 1]
    }

    /// `phi_{i,j}`, 1-based.
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.phi[i - 1][j - 1]
    }

    pub fn set_theta(&mut self, i: usize, j: usize, v: f64) {
        self.theta[i - 1][j - 1] = v;
    }

    pub fn set_phi(&mut self, i: usize, j: usize, v: f64) {
        self.phi[i - 1][j - 1] = v;
    }

    pub fn bs_slots(&self) -> usize {
        self.theta.iter().map(Vec::len).sum()
    }

    pub fn phase_slots(&self) -> usize {
        self.phi.iter().map(Vec::len).sum()
    }

    /// `(i, j)` pairs of beam-splitter slots, 1-based.
    pub fn bs_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.size).flat_map(move |i| (1..=self.size - i).map(move |j| (i, j)))
    }

    /// `(i, j)` pairs of phase slots, 1-based.
    pub fn phase_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.size).flat_map(move |i| (1..=self.size - i + 1).map(move |j| (i, j)))
    }

    /// Snap near-degenerate angles and zero the slots the triangle rules fix.
    pub fn enforce_invariants(&mut self) {
        for d in 0..self.size {
            let mut dead = false;
            for j in 0..self.phi[d].len() {
                if dead {
                    self.phi[d][j] = 0.0;
                    if j < self.theta[d].len() {
                        self.theta[d][j] = 0.0;
                    }
                    continue;
                }
                self.phi[d][j] = wrap_tau(self.phi[d][j]);
                if approx_zero_mod_tau(self.phi[d][j]) {
                    self.phi[d][j] = 0.0;
                }
                if j < self.theta[d].len() {
                    let t = self.theta[d][j];
                    if t.abs() < ANGLE_EPS {
                        self.theta[d][j] = 0.0;
                        dead = true;
                    } else if (t - FRAC_PI_2).abs() < ANGLE_EPS {
                        self.theta[d][j] = FRAC_PI_2;
                    }
                }
            }
            // At pi/2 only the sum of the bottom-input and top-output phases
            // matters; keep it on the output. Bottom-up so chains collect.
            for j in (0..self.theta[d].len()).rev() {
                if self.theta[d][j] == FRAC_PI_2 {
                    let moved = std::mem::take(&mut self.phi[d][j + 1]);
                    let mut p = wrap_tau(self.phi[d][j] + moved);
                    if approx_zero_mod_tau(p) {
                        p = 0.0;
                    }
                    self.phi[d][j] = p;
                }
            }
        }
    }

    /// Violations of the triangle invariants, if any.
    pub fn invariant_violation(&self) -> Option<String> {
        for (i, j) in self.bs_indices() {
            let t = self.theta(i, j);
            if !(0.0..=FRAC_PI_2).contains(&t) {
                return Some(format!("theta_{i},{j} = {t} outside [0, pi/2]"));
            }
            if t == 0.0 {
                let later = (j + 1..=self.size - i + 1)
                    .any(|k| self.phi(i, k) != 0.0 || (k <= self.size - i && self.theta(i, k) != 0.0));
                if later {
                    return Some(format!("theta_{i},{j} = 0 but later slots on diagonal {i} are not"));
                }
            }
            if t == FRAC_PI_2 && self.phi(i, j + 1) != 0.0 {
                return Some(format!("theta_{i},{j} = pi/2 but phi_{i},{} != 0", j + 1));
            }
        }
        for (i, j) in self.phase_indices() {
            let p = self.phi(i, j);
            if !(0.0..std::f64::consts::TAU).contains(&p) {
                return Some(format!("phi_{i},{j} = {p} outside [0, 2pi)"));
            }
        }
        None
    }

    /// Generators in time order. Zero angles are omitted.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        for d in 0..self.size {
            let k = self.size - d;
            if self.phi[d][k - 1] != 0.0 {
                out.push(Generator::ps(self.size - 1, self.phi[d][k - 1]));
            }
            for j in (0..k - 1).rev() {
                if self.theta[d][j] != 0.0 {
                    out.push(Generator::bs(d + j, self.theta[d][j]));
                }
                if self.phi[d][j] != 0.0 {
                    out.push(Generator::ps(d + j, self.phi[d][j]));
                }
            }
        }
        out
    }

    /// Single-photon matrix, computed directly.
    pub fn matrix(&self) -> UnitaryMatrix {
        let mut m = DMatrix::<Complex64>::identity(self.size, self.size);
        for g in self.generators() {
            left_apply(&mut m, &g);
        }
        UnitaryMatrix::from_matrix(m).expect("square")
    }
}

fn left_apply(m: &mut DMatrix<Complex64>, g: &Generator) {
    match g {
        Generator::PhaseShifter { wire, phi } => {
            let p = Complex64::from_polar(1.0, phi.value);
            m.row_mut(*wire).iter_mut().for_each(|z| *z *= p);
        }
        Generator::BeamSplitter { wire, theta } => {
            let (s, c) = theta.value.sin_cos();
            let is = Complex64::new(0.0, s);
            for col in 0..m.ncols() {
                let a = m[(*wire, col)];
                let b = m[(*wire + 1, col)];
                m[(*wire, col)] = a * c + b * is;
                m[(*wire + 1, col)] = a * is + b * c;
            }
        }
        _ => unreachable!("triangles are passive"),
    }
}

/// Circuit of the triangle with generators slid to their earliest column.
pub fn triangle_to_circuit(t: &TriangleParams) -> Result<Circuit, NumericError> {
    if let Some(v) = t.invariant_violation() {
        return Err(NumericError::InvariantViolation(v));
    }
    Ok(Circuit::from_sequence(t.size, t.generators())
        .expect("triangle generators are in range")
        .canonicalize_layout())
}

/// Matrix of diagonal `d` alone, acting on the trailing `k = size - d` wires.
fn diagonal_matrix(theta: &[f64], phi: &[f64]) -> DMatrix<Complex64> {
    let k = phi.len();
    let mut m = DMatrix::<Complex64>::identity(k, k);
    if phi[k - 1] != 0.0 {
        left_apply(&mut m, &Generator::ps(k - 1, phi[k - 1]));
    }
    for j in (0..k - 1).rev() {
        if theta[j] != 0.0 {
            left_apply(&mut m, &Generator::bs(j, theta[j]));
        }
        if phi[j] != 0.0 {
            left_apply(&mut m, &Generator::ps(j, phi[j]));
        }
    }
    m
}

/// Solve the first row of `v` for one diagonal's angles.
///
/// Entries are peeled in order; `cos theta_j` comes from the ratio of the
/// entry to the remaining tail norm, which stays accurate when the running
/// product of sines is small.
fn peel_row(row: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let k = row.len();
    let mut theta = vec![0.0; k - 1];
    let mut phi = vec![0.0; k];
    let mut tails = vec![0.0f64; k + 1];
    for j in (0..k).rev() {
        tails[j] = tails[j + 1].hypot(row[j].norm());
    }
    let mut arg_p = 0.0;
    for j in 0..k {
        if j == k - 1 {
            phi[j] = wrap_tau(row[j].arg() - arg_p);
            break;
        }
        let t = tails[j + 1].atan2(row[j].norm());
        if t < ANGLE_EPS {
            theta[j] = 0.0;
            phi[j] = wrap_tau(row[j].arg() - arg_p);
            break;
        }
        if FRAC_PI_2 - t < ANGLE_EPS {
            theta[j] = FRAC_PI_2;
            phi[j] = 0.0;
        } else {
            theta[j] = t;
            phi[j] = wrap_tau(row[j].arg() - arg_p);
        }
        arg_p += FRAC_PI_2 + phi[j];
    }
    (theta, phi)
}

/// Remove the peeled diagonal: `(v * D^dag)` without its first row and column.
fn deflate(v: &DMatrix<Complex64>, theta: &[f64], phi: &[f64]) -> DMatrix<Complex64> {
    let d = diagonal_matrix(theta, phi);
    let w = v * d.adjoint();
    let k = v.nrows();
    w.view((1, 1), (k - 1, k - 1)).into_owned()
}

/// The unique triangle whose matrix is `u`.
pub fn synthesize_triangle(u: &UnitaryMatrix) -> Result<TriangleParams, NumericError> {
    u.check_unitary(UNITARY_EPS)?;
    let n = u.dim();
    let mut t = TriangleParams::identity(n);
    let mut v = u.as_matrix().clone();
    for d in 0..n {
        let row: Vec<Complex64> = v.row(0).iter().copied().collect();
        let (theta, phi) = peel_row(&row);
        t.theta[d] = theta;
        t.phi[d] = phi;
        if d + 1 < n {
            v = deflate(&v, &t.theta[d], &t.phi[d]);
        }
    }
    t.enforce_invariants();
    Ok(t)
}

/// Entry `(i, j)` (1-based) of the triangle's matrix, summed over paths.
pub fn path_coefficient(t: &TriangleParams, i: usize, j: usize) -> Result<Complex64, NumericError> {
    let n = t.size;
    if i == 0 || j == 0 || i > n || j > n {
        return Err(NumericError::Dimension {
            expected: n,
            rows: i,
            cols: j,
        });
    }
    Ok(paths(t, 0, i - 1, j - 1))
}

// Amplitude from sub-input `j` of diagonal `d` to output `i` (0-based, relative to diagonal `d`).
fn paths(t: &TriangleParams, d: usize, i: usize, j: usize) -> Complex64 {
    let k = t.size - d;
    let th = &t.theta[d];
    let ph = &t.phi[d];
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let is = |x: f64| Complex64::new(0.0, x.sin());
    // Through the carrier: top output of slot j, then up through slots j-1 .. 0.
    let up = |j: usize, from_bottom: bool| -> Complex64 {
        let mut a = if j == k - 1 {
            e(ph[k - 1])
        } else if from_bottom {
            is(th[j]) * e(ph[j])
        } else {
            Complex64::new(th[j].cos(), 0.0) * e(ph[j])
        };
        for l in (0..j).rev() {
            a *= is(th[l]) * e(ph[l]);
        }
        a
    };
    if i == 0 {
        return up(j, false);
    }
    // Otherwise the photon leaves diagonal d at the bottom output of some slot s.
    let mut total = Complex64::new(0.0, 0.0);
    for s in 0..k - 1 {
        let amp = if s == j {
            is(th[s])
        } else if s < j {
            // Enter top of slot j, ride the carrier up to slot s + 1, then
            // take slot s from its bottom input to its bottom output.
            let mut a = if j == k - 1 {
                e(ph[k - 1])
            } else {
                Complex64::new(th[j].cos(), 0.0) * e(ph[j])
            };
            for l in (s + 1..j).rev() {
                a *= is(th[l]) * e(ph[l]);
            }
            a * th[s].cos()
        } else {
            Complex64::new(0.0, 0.0)
        };
        if amp.norm() != 0.0 {
            total += amp * paths(t, d + 1, i - 1, s);
        }
    }
    total
}

/// Result of [`synthesize_tmn`]: `u = (I_m (+) w_out) * t * (I_n (+) w_in)`.
#[derive(Debug, Clone)]
pub struct TmnDecomposition {
    pub triangle: TriangleParams,
    pub w_in: UnitaryMatrix,
    pub w_out: UnitaryMatrix,
}

/// Unitary whose first column is the unit vector `c`, completed by Gram-Schmidt.
fn complete_from_column(c: &[Complex64]) -> DMatrix<Complex64> {
    let k = c.len();
    let mut cols: Vec<Vec<Complex64>> = vec![c.to_vec()];
    for e in 0..k {
        if cols.len() == k {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); k];
        v[e] = Complex64::new(1.0, 0.0);
        for b in &cols {
            let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    DMatrix::from_fn(k, k, |r, col| cols[col][r])
}

/// Triangle with auxiliary freedom: the unique grid whose upper-left
/// `m x n` block matches `u`, with the remaining freedom on the last
/// `n_aux` inputs and `m_aux` outputs returned as `w_in` and `w_out`.
///
/// Tracks how many leading inputs of each diagonal carry visible data;
/// the trailing inputs are still untouched auxiliary wires and may be
/// rotated freely, which is used to clear every slot they would feed.
pub fn synthesize_tmn(u: &UnitaryMatrix, split: Split) -> Result<TmnDecomposition, NumericError> {
    u.check_unitary(UNITARY_EPS)?;
    let size = u.dim();
    if !split.is_consistent() || split.size() != size {
        return Err(NumericError::Dimension {
            expected: split.size(),
            rows: size,
            cols: size,
        });
    }
    let mut t = TriangleParams::identity(size);
    let mut v = u.as_matrix().clone();
    let mut acc = DMatrix::<Complex64>::identity(split.n_aux, split.n_aux);
    let mut data = split.n;
    for d in 0..split.m.min(size) {
        let k = size - d;
        if data < k {
            let x: Vec<Complex64> = (data..k).map(|c| v[(0, c)]).collect();
            let q = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if q > 1e-14 {
                // Phase of the running product of sines up to the first free slot.
                let (_, phi) = peel_row(&(0..k).map(|c| v[(0, c)]).collect::<Vec<_>>());
                let mut arg_p = 0.0;
                for p in phi.iter().take(data) {
                    arg_p += FRAC_PI_2 + p;
                }
                let rot = Complex64::from_polar(1.0, arg_p);
                let col: Vec<Complex64> = x.iter().map(|z| z.conj() * rot / q).collect();
                let r = complete_from_column(&col);
                let block = v.columns(data, k - data) * &r;
                v.columns_mut(data, k - data).copy_from(&block);
                let off = split.n_aux - (k - data);
                let a = acc.columns(off, k - data) * &r;
                acc.columns_mut(off, k - data).copy_from(&a);
            }
        }
        let row: Vec<Complex64> = v.row(0).iter().copied().collect();
        let (mut theta, mut phi) = peel_row(&row);
        for j in data..k {
            phi[j] = 0.0;
            if j < k - 1 {
                theta[j] = 0.0;
            }
        }
        data = if data == 0 {
            0
        } else if data >= k {
            k - 1
        } else if theta[data - 1] != 0.0 {
            data
        } else {
            data - 1
        };
        t.theta[d] = theta;
        t.phi[d] = phi;
        v = deflate(&v, &t.theta[d], &t.phi[d]);
    }
    t.enforce_invariants();
    let w_out = UnitaryMatrix::from_matrix(v).expect("square");
    let w_in = UnitaryMatrix::from_matrix(acc.adjoint()).expect("square");
    Ok(TmnDecomposition {
        triangle: t,
        w_in,
        w_out,
    })
}

fn row_of(i: usize, j: usize) -> usize {
    i + j - 1
}

/// No generator is fed only by the last `n_aux` inputs.
fn input_property(t: &TriangleParams, n: usize) -> Option<(usize, usize)> {
    let nonzero_above = |row: usize, i: usize| {
        t.bs_indices()
            .any(|(k, l)| row_of(k, l) + 1 == row && k < i && t.theta(k, l) != 0.0)
    };
    t.phase_indices().find(|&(i, j)| {
        let row = row_of(i, j);
        let bs = j <= t.size - i && t.theta(i, j) != 0.0;
        row > n && (bs || t.phi(i, j) != 0.0) && !nonzero_above(row, i)
    })
}

/// No generator feeds only the last `m_aux` outputs.
fn output_property(t: &TriangleParams, m: usize) -> Option<(usize, usize)> {
    let nonzero_above = |row: usize, i: usize| {
        t.bs_indices()
            .any(|(k, l)| row_of(k, l) + 1 == row && k >= i && t.theta(k, l) != 0.0)
    };
    t.phase_indices().find(|&(i, j)| {
        let row = row_of(i, j);
        let bs = j <= t.size - i && t.theta(i, j) != 0.0;
        row > m && (bs || t.phi(i, j) != 0.0) && !nonzero_above(row, i)
    })
}

/// Classify a grid against a split.
pub fn classify(t: &TriangleParams, split: Split) -> TriangleClass {
    if !split.is_consistent() || split.size() != t.size {
        return TriangleClass::NotTriangular(format!("split {split:?} does not match a {}-wire triangle", t.size));
    }
    if let Some(v) = t.invariant_violation() {
        return TriangleClass::NotTriangular(format!("property 1: {v}"));
    }
    if split.n_aux == 0 && split.m_aux == 0 {
        return TriangleClass::PlainT;
    }
    if let Some((i, j)) = input_property(t, split.n) {
        return TriangleClass::NotTriangular(format!("property 2: slot ({i},{j}) only sees auxiliary inputs"));
    }
    if let Some((i, j)) = output_property(t, split.m) {
        return TriangleClass::NotTriangular(format!("property 3: slot ({i},{j}) only reaches auxiliary outputs"));
    }
    let rows = split.n_aux.min(split.m_aux);
    for r in (t.size - rows)..t.size {
        if r == 0 {
            continue;
        }
        if !t.bs_indices().any(|(i, j)| row_of(i, j) == r && t.theta(i, j) != 0.0) {
            return TriangleClass::NotTriangular(format!("property 4: row {r} is empty"));
        }
    }
    if split.m_aux == split.n {
        TriangleClass::Trec(split)
    } else {
        TriangleClass::Tmn(split)
    }
}

/// Reference check for properties 2 and 3: simulate which wires still carry
/// only auxiliary input (or reach only auxiliary outputs) and report the
/// first generator whose wires are all such.
pub fn reachability_violation(t: &TriangleParams, split: Split) -> Option<String> {
    let gens = t.generators();
    let check = |order: Vec<&Generator>, first_aux: usize| -> Option<String> {
        let mut pure: Vec<bool> = (0..t.size).map(|w| w >= first_aux).collect();
        for g in order {
            match g {
                Generator::PhaseShifter { wire, .. } if pure[*wire] => {
                    return Some(format!("phase on wire {wire}"));
                }
                Generator::BeamSplitter { wire, .. } => {
                    if pure[*wire] && pure[*wire + 1] {
                        return Some(format!("beam splitter on wires {wire},{}", wire + 1));
                    }
                    pure[*wire] = false;
                    pure[*wire + 1] = false;
                }
                _ => {}
            }
        }
        None
    };
    check(gens.iter().collect(), split.n)
        .map(|e| format!("input side: {e}"))
        .or_else(|| check(gens.iter().rev().collect(), split.m).map(|e| format!("output side: {e}")))
}

/// Factor a `Tmn` grid as `(d2 (+) I) (I (+) diamond) (d (+) I)`; see [`TrecFactors`].
pub fn extract_trec(t: &TriangleParams, split: Split) -> Result<TrecFactors, NumericError> {
    match classify(t, split) {
        TriangleClass::Tmn(_) | TriangleClass::Trec(_) | TriangleClass::PlainT => {}
        TriangleClass::NotTriangular(why) => return Err(NumericError::NotTmn(why)),
    }
    trec::extract(t, split)
}

/// `t = (d2 (+) I_{m_aux}) * (I_{n - m_aux} (+) diamond) * (d (+) P)`
/// as single-photon matrices, with `diamond` a `Trec` grid on
/// `n_aux + m_aux` wires and `P = diag(e^{i aux_phases})` on the auxiliary
/// inputs. `P` is absorbed by whatever feeds those inputs.
#[derive(Debug, Clone)]
pub struct TrecFactors {
    pub d: Circuit,
    pub diamond: TriangleParams,
    pub diamond_split: Split,
    pub aux_phases: Vec<f64>,
    pub d2: Circuit,
}

mod trec;

#[cfg(test)]
mod tests;
