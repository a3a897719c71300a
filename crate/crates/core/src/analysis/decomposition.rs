use std::collections::BTreeMap;

use num_complex::Complex64;

use super::sample::LinearMapSample;
use crate::circuit::{Circuit, Column, Generator};
use crate::error::{AnalysisError, FockError};
use crate::fock::{bs_column, eval_circuit, DualFockVector, EvalConfig, FockVector, Occupation};
use crate::rewrite::{unpair_m, NormalForm};
use crate::synthesis::{classify, triangle_to_circuit, Split, TriangleClass, TriangleParams};
use crate::unitary::matrix_of;

/// Largest creation exponent [`lambda_commute_check`] accepts.
pub const MAX_LAMBDA_EXPONENT: u32 = 3;
/// Largest probe photon count [`lambda_commute_check`] accepts.
pub const MAX_LAMBDA_CUTOFF: u32 = 8;

/// `t` with `|i>` fed into its auxiliary inputs and `<j|` on its auxiliary outputs.
pub fn plugged(t: &TriangleParams, split: Split, i: &Occupation, j: &Occupation) -> Result<Circuit, AnalysisError> {
    if i.modes() != split.n_aux || j.modes() != split.m_aux {
        return Err(AnalysisError::NotTmn(format!(
            "ancilla vectors of length {} and {} for split {split:?}",
            i.modes(),
            j.modes()
        )));
    }
    let mut cols = Vec::new();
    if split.n_aux > 0 {
        cols.push(Column::new(vec![Generator::source(
            split.n,
            FockVector::basis(i.clone()),
        )]));
    }
    cols.extend(triangle_to_circuit(t)?.into_columns());
    if split.m_aux > 0 {
        cols.push(Column::new(vec![Generator::detector(
            split.m,
            DualFockVector::basis(j.clone()),
        )]));
    }
    Ok(Circuit::new(split.n, cols)?)
}

fn require_tmn(t: &TriangleParams, split: Split) -> Result<(), AnalysisError> {
    match classify(t, split) {
        TriangleClass::NotTriangular(why) => Err(AnalysisError::NotTmn(why)),
        _ => Ok(()),
    }
}

/// `(id (x) <j|) [[t]] (id (x) |i>)` on the probe inputs.
pub fn omega(
    t: &TriangleParams,
    split: Split,
    i: &Occupation,
    j: &Occupation,
    cutoff: u32,
) -> Result<LinearMapSample, AnalysisError> {
    require_tmn(t, split)?;
    Ok(LinearMapSample::of_circuit(&plugged(t, split, i, j)?, cutoff)?)
}

/// `Lambda^s (x) id` after `Omega^{0,t}`, for a `Trec` grid. Creation operators
/// act on the visible outputs, of which a `Trec` has exactly `n_aux`.
pub fn delta(
    t: &TriangleParams,
    split: Split,
    s: &Occupation,
    tvec: &Occupation,
    cutoff: u32,
) -> Result<LinearMapSample, AnalysisError> {
    match classify(t, split) {
        TriangleClass::Trec(_) => {}
        TriangleClass::NotTriangular(why) => return Err(AnalysisError::NotTrec(why)),
        other => return Err(AnalysisError::NotTrec(format!("{other:?}"))),
    }
    if s.modes() != split.m {
        return Err(AnalysisError::NotTrec(format!(
            "s has {} entries, expected {}",
            s.modes(),
            split.m
        )));
    }
    let base = omega(t, split, &Occupation::vacuum(split.n_aux), tvec, cutoff)?;
    Ok(base.map_images(split.m, |v| create(v, s))?)
}

/// `prod_j (a_j^dagger)^{u_j}` on the leading modes of `v`.
pub fn create(v: &FockVector, u: &Occupation) -> Result<FockVector, FockError> {
    u.as_slice().iter().enumerate().try_fold(v.clone(), |acc, (mode, &k)| {
        (0..k).try_fold(acc, |w, _| w.apply_creation(mode))
    })
}

/// Compare `[[d]] Lambda^u` with `prod_j (sum_i d_ij a_i^dagger)^{u_j} [[d]]`
/// on every probe input. `u` addresses the leading input modes of `d`.
pub fn lambda_commute_check(d: &Circuit, u: &Occupation, cutoff: u32) -> Result<f64, AnalysisError> {
    if cutoff > MAX_LAMBDA_CUTOFF || u.as_slice().iter().any(|&k| k > MAX_LAMBDA_EXPONENT) {
        return Err(AnalysisError::CostGuard(format!(
            "u = {u} with cutoff {cutoff}; limits are {MAX_LAMBDA_EXPONENT} per mode and {MAX_LAMBDA_CUTOFF} photons"
        )));
    }
    if u.modes() > d.n_in() {
        return Err(AnalysisError::CostGuard(format!(
            "u has {} modes, circuit has {}",
            u.modes(),
            d.n_in()
        )));
    }
    let mat = matrix_of(d)?;
    let cfg = EvalConfig::default();
    let mut worst = 0.0f64;
    for x in Occupation::up_to(d.n_in(), cutoff) {
        let v = FockVector::basis(x);
        let lhs = eval_circuit(d, &create(&v, u)?, &cfg)?;
        let mut rhs = eval_circuit(d, &v, &cfg)?;
        for (j, &k) in u.as_slice().iter().enumerate() {
            for _ in 0..k {
                let mut next = FockVector::zero(rhs.modes());
                for i in 0..d.n_out() {
                    next.add_scaled(&rhs.apply_creation(i)?, mat.get(i, j))?;
                }
                rhs = next;
            }
        }
        worst = worst.max(lhs.max_diff(&rhs));
    }
    Ok(worst)
}

/// The coefficients `omega_{i,j}` with `[[N]] = sum omega_{i,j} Omega^{i,j}(T)`:
/// the amplitude of `|i>|N^-1(j)>` in `f`.
pub fn omega_coefficients(nf: &NormalForm) -> BTreeMap<(Occupation, Occupation), Complex64> {
    nf.f.iter()
        .map(|(occ, z)| {
            let (k, i) = occ.as_slice().split_last().expect("connecting mode");
            let j = unpair_m(u64::from(*k), nf.m_aux);
            ((Occupation(i.to_vec()), j), *z)
        })
        .collect()
}

/// `sum omega_{i,j} Omega^{i,j}(t)` on the probe inputs.
pub fn omega_sum(
    t: &TriangleParams,
    split: Split,
    omegas: &BTreeMap<(Occupation, Occupation), Complex64>,
    cutoff: u32,
) -> Result<LinearMapSample, AnalysisError> {
    let mut total = LinearMapSample::zero(split.n, split.m, cutoff);
    for ((i, j), z) in omegas {
        total.add_scaled(&omega(t, split, i, j, cutoff)?, *z)?;
    }
    Ok(total)
}

/// Deviation from unitarity of the beam splitter restricted to the
/// `photons`-photon sector of two modes. Columns are taken before pruning so
/// the check sees the operator itself.
pub fn sector_unitarity(theta: f64, photons: u32) -> f64 {
    let cols: Vec<Vec<Complex64>> = (0..=photons).map(|k1| bs_column(theta, k1, photons - k1)).collect();
    let mut worst = 0.0f64;
    for (a, ca) in cols.iter().enumerate() {
        for (b, cb) in cols.iter().enumerate() {
            let dot: Complex64 = ca.iter().zip(cb).map(|(x, y)| x.conj() * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}

/// Terms of `v` whose last mode holds `k`, with that mode dropped.
pub fn slice_last(v: &FockVector, k: u32) -> FockVector {
    let mut out = FockVector::zero(v.modes() - 1);
    for (occ, z) in v.iter() {
        if let Some((&last, head)) = occ.as_slice().split_last() {
            if last == k {
                out.add_term(Occupation(head.to_vec()), *z);
            }
        }
    }
    out
}

/// Both sides of the identity-wire expansion for source `f` (`n_aux + 1`
/// modes), passive `d` on `n + n_aux` wires and detector `g` (`m_aux + 1`
/// modes): the diagram joined by its last wire against the sum over shared
/// indices of the diagrams with that wire cut.
pub fn identity_wire_sides(
    f: &FockVector,
    d: &Circuit,
    g: &DualFockVector,
    cutoff: u32,
) -> Result<(LinearMapSample, LinearMapSample), AnalysisError> {
    let n_aux = f.modes() - 1;
    let m_aux = g.modes() - 1;
    let n = d.n_in() - n_aux;
    let m = d.n_out() - m_aux;
    let (joined, _) = sandwich(n, m, f, d, g)?;
    let whole = LinearMapSample::of_circuit(&joined, cutoff)?;
    let mut parts = LinearMapSample::zero(n, m, cutoff);
    let mut ks: Vec<u32> = f.iter().map(|(o, _)| o.as_slice()[n_aux]).collect();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let gk = slice_last(g.coefficients(), k);
        if gk.is_zero() {
            continue;
        }
        let fk = slice_last(f, k);
        let (cut, z) = sandwich(n, m, &fk, d, &DualFockVector::from_coefficients(gk))?;
        parts.add_scaled(&LinearMapSample::of_circuit(&cut, cutoff)?, z)?;
    }
    Ok((whole, parts))
}

/// Source `f` under `n` wires, then `d`, then detector `g` under `m` wires.
/// Modes of `f` beyond `d`'s inputs pass straight to `g`. A box without modes
/// is returned as a scalar factor instead.
fn sandwich(
    n: usize,
    m: usize,
    f: &FockVector,
    d: &Circuit,
    g: &DualFockVector,
) -> Result<(Circuit, Complex64), AnalysisError> {
    let scalar = |v: &FockVector| v.get(&Occupation::default());
    let mut z = Complex64::new(1.0, 0.0);
    let mut cols = Vec::new();
    if f.modes() == 0 {
        z *= scalar(f);
    } else {
        cols.push(Column::new(vec![Generator::source(n, f.clone())]));
    }
    let extra = f.modes() + n - d.n_in();
    cols.extend(d.compose_tensor(&Circuit::identity(extra)).into_columns());
    if g.modes() == 0 {
        z *= scalar(g.coefficients());
    } else {
        cols.push(Column::new(vec![Generator::detector(m, g.clone())]));
    }
    Ok((Circuit::new(n, cols)?, z))
}

/// `a` precedes `b` when they differ and, at the last differing mode, `a` is smaller.
pub fn rev_lex_less(a: &Occupation, b: &Occupation) -> bool {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .rev()
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

/// Checks the threshold shape of `delta`: nonzero at `(t, s)`, zero for
/// inputs before `t` or outputs before `s`. Returns the entry at `(t, s)`
/// and the largest entry in the region that must vanish.
pub fn delta_threshold(d: &LinearMapSample, s: &Occupation, tvec: &Occupation) -> (Complex64, f64) {
    let mut leak = 0.0f64;
    for (x, img) in d.iter() {
        for (y, z) in img.iter() {
            if rev_lex_less(x, tvec) || rev_lex_less(y, s) {
                leak = leak.max(z.norm());
            }
        }
    }
    (d.entry(tvec, s), leak)
}
