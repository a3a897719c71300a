//! Splitting a `Tmn` grid around its rectangular core.
//!
//! The visible-to-visible block has exactly `n - m_aux` unit singular values;
//! rotating them to the top leaves `I (+) delta`. Inside `delta` the visible
//! sides are still free. On a `Trec` grid the block from visible inputs to
//! auxiliary outputs is upper triangular with diagonal phase `i^{n_aux}`, and
//! the block from auxiliary inputs to visible outputs is lower triangular, so
//! two Gram-Schmidt passes fix the visible rotations up to output phases,
//! which land in `phi_{i,1}`.
//!
//! That leaves one phase per auxiliary input that a `Trec` grid cannot hold,
//! so an exact factorization carries it as a separate diagonal.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{classify, synthesize_triangle, triangle_to_circuit, Split, TrecFactors, TriangleClass, TriangleParams};
use crate::error::NumericError;
use crate::unitary::UnitaryMatrix;

const DEGENERATE: f64 = 1e-9;

type Core = (DMatrix<Complex64>, DMatrix<Complex64>, TriangleParams, Split, Vec<f64>);

/// Complete orthonormal columns to a unitary, keeping their order.
fn complete_basis(cols: &[Vec<Complex64>], k: usize) -> DMatrix<Complex64> {
    let mut basis: Vec<Vec<Complex64>> = cols.to_vec();
    for e in 0..k {
        if basis.len() == k {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); k];
        v[e] = Complex64::new(1.0, 0.0);
        // Two passes keep the completion orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    DMatrix::from_fn(k, k, |r, c| basis[c][r])
}

fn direct_sum(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows() + b.nrows();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

fn identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}

/// Orthonormalize `vecs` from the last one backwards; `phase` is the phase
/// each vector's overlap with its own result must have.
fn backward_gram_schmidt(vecs: &[Vec<Complex64>], phase: Complex64) -> Result<Vec<Vec<Complex64>>, NumericError> {
    let k = vecs.len();
    let mut out: Vec<Vec<Complex64>> = vec![Vec::new(); k];
    for l in (0..k).rev() {
        let mut res = vecs[l].clone();
        for b in out.iter().skip(l + 1) {
            let dot: Complex64 = b.iter().zip(&res).map(|(x, y)| x.conj() * y).sum();
            for (ri, bi) in res.iter_mut().zip(b) {
                *ri -= dot * bi;
            }
        }
        let norm = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < DEGENERATE {
            return Err(NumericError::NoSolution(DEGENERATE));
        }
        // overlap <b, v> = norm * conj(phase) * ... pick b = res * phase.conj() / norm
        out[l] = res.iter().map(|z| z * phase.conj() / norm).collect();
    }
    Ok(out)
}

fn circuit_of(m: DMatrix<Complex64>) -> Result<crate::circuit::Circuit, NumericError> {
    let u = UnitaryMatrix::from_matrix(m)?;
    triangle_to_circuit(&synthesize_triangle(&u)?)
}

pub(super) fn extract(t: &TriangleParams, split: Split) -> Result<TrecFactors, NumericError> {
    let Split { n, n_aux, m, m_aux } = split;
    if n < m_aux || m < n_aux {
        return Err(NumericError::NotTmn(format!(
            "{m_aux} auxiliary outputs exceed {n} visible inputs or {n_aux} auxiliary inputs exceed {m} visible outputs"
        )));
    }
    let r0 = n - m_aux;
    let u = t.matrix().as_matrix().clone();

    // Rotate the unit singular directions of the visible block to the front.
    let (x, y) = if r0 > 0 {
        let p = u.view((0, 0), (m, n)).into_owned();
        let svd = p.svd(true, true);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        if svd.singular_values[order[r0 - 1]] < 1.0 - 1e-7 {
            return Err(NumericError::NotTmn(format!(
                "visible block has fewer than {r0} unit singular values"
            )));
        }
        let svd_u = svd.u.as_ref().expect("requested");
        let svd_vt = svd.v_t.as_ref().expect("requested");
        let xs: Vec<Vec<Complex64>> = order[..r0]
            .iter()
            .map(|&c| svd_u.column(c).iter().copied().collect())
            .collect();
        let ys: Vec<Vec<Complex64>> = order[..r0]
            .iter()
            .map(|&c| svd_vt.row(c).iter().map(|z| z.conj()).collect())
            .collect();
        (complete_basis(&xs, m), complete_basis(&ys, n))
    } else {
        (identity(m), identity(n))
    };
    let left = direct_sum(&x.adjoint(), &identity(m_aux));
    let right = direct_sum(&y, &identity(n_aux));
    let reduced = left * &u * right;
    let k = n_aux + m_aux;
    let delta = reduced.view((r0, r0), (k, k)).into_owned();

    let (a, b_dag, diamond, diamond_split, aux_phases) = split_core(&delta, n_aux, m_aux)?;
    let b = b_dag.adjoint();
    let d = direct_sum(&identity(r0), &b) * y.adjoint();
    let d2 = x * direct_sum(&identity(r0), &a);
    Ok(TrecFactors {
        d: circuit_of(d)?,
        diamond,
        diamond_split,
        aux_phases,
        d2: circuit_of(d2)?,
    })
}

/// Strip the visible-side rotations from `delta`, leaving a `Trec` grid.
pub(super) fn split_core(delta: &DMatrix<Complex64>, n_aux: usize, m_aux: usize) -> Result<Core, NumericError> {
    // Visible inputs of delta: rows of b from the upper-triangular corner.
    let z_rows: Vec<Vec<Complex64>> = (0..m_aux)
        .map(|l| (0..m_aux).map(|c| delta[(n_aux + l, c)].conj()).collect())
        .collect();
    let corner = Complex64::i().powu(n_aux as u32);
    let b_conj = backward_gram_schmidt(&z_rows, corner.conj())?;
    // b_conj[l] is conj(row l of b); b^dag has those as columns.
    let b_dag = DMatrix::from_fn(m_aux, m_aux, |r, c| b_conj[c][r]);
    let after_b = delta * direct_sum(&b_dag, &identity(n_aux));

    // Visible outputs of delta: columns of a from the lower-triangular corner.
    let c_cols: Vec<Vec<Complex64>> = (0..n_aux)
        .map(|col| (0..n_aux).map(|r| after_b[(r, m_aux + col)]).collect())
        .collect();
    let a_cols = backward_gram_schmidt(&c_cols, Complex64::new(1.0, 0.0))?;
    let a = DMatrix::from_fn(n_aux, n_aux, |r, c| a_cols[c][r]);
    let core = direct_sum(&a.adjoint(), &identity(m_aux)) * after_b;

    let diamond_split = Split {
        n: m_aux,
        n_aux,
        m: n_aux,
        m_aux,
    };
    let mut diamond = synthesize_triangle(&UnitaryMatrix::from_matrix(core)?)?;
    // The slot after the last visible input of each diagonal is a phase on a
    // raw auxiliary input; it is returned separately.
    let mut aux_phases = Vec::with_capacity(n_aux);
    for i in 1..=n_aux {
        aux_phases.push(diamond.phi(i, m_aux + 1));
        diamond.set_phi(i, m_aux + 1, 0.0);
    }
    match classify(&diamond, diamond_split) {
        TriangleClass::Trec(_) | TriangleClass::PlainT => {}
        other => {
            return Err(NumericError::NotTmn(format!("core grid is not rectangular: {other:?}")));
        }
    }
    Ok((a, b_dag, diamond, diamond_split, aux_phases))
}
