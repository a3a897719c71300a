//! Finite-support bosonic Fock states and the generator actions on them.
//!
//! States are sparse maps from occupation vectors to amplitudes. Iteration
//! is lexicographic in the occupation vector, so printing and serialization
//! are stable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{Circuit, Column, Generator};
use crate::error::FockError;

/// Amplitudes below this magnitude are dropped.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-12;

/// Photon counts per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(pub Vec<u32>);

impl Occupation {
    pub fn vacuum(modes: usize) -> Self {
        Occupation(vec![0; modes])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Occupation) -> Occupation {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Occupation(v)
    }

    /// Every occupation over `modes` modes with exactly `total` photons, in lexicographic order.
    pub fn with_total(modes: usize, total: u32) -> Vec<Occupation> {
        fn rec(modes: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Occupation>) {
            if modes == 1 {
                prefix.push(left);
                out.push(Occupation(prefix.clone()));
                prefix.pop();
                return;
            }
            for k in 0..=left {
                prefix.push(k);
                rec(modes - 1, left - k, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if modes == 0 {
            if total == 0 {
                out.push(Occupation(Vec::new()));
            }
            return out;
        }
        rec(modes, total, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    /// Every occupation with total photon number at most `cutoff`.
    pub fn up_to(modes: usize, cutoff: u32) -> Vec<Occupation> {
        let mut out: Vec<Occupation> = (0..=cutoff).flat_map(|n| Occupation::with_total(modes, n)).collect();
        out.sort();
        out
    }

    /// Every occupation whose entries are each at most `max`.
    pub fn boxed(modes: usize, max: u32) -> Vec<Occupation> {
        let mut out = vec![Occupation(Vec::new())];
        for _ in 0..modes {
            out = out
                .into_iter()
                .flat_map(|o| {
                    (0..=max).map(move |k| {
                        let mut v = o.0.clone();
                        v.push(k);
                        Occupation(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl From<Vec<u32>> for Occupation {
    fn from(v: Vec<u32>) -> Self {
        Occupation(v)
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(v: [u32; N]) -> Self {
        Occupation(v.to_vec())
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Evaluation options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub prune_eps: f64,
    pub max_photons: Option<u32>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            prune_eps: DEFAULT_PRUNE_EPS,
            max_photons: None,
        }
    }
}

/// A ket with finitely many nonzero amplitudes. `modes == 0` is a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    modes: usize,
    amps: BTreeMap<Occupation, Complex64>,
}

/// A bra, stored by its coefficients: `<g| = sum_k g_k <k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFockVector(FockVector);

fn ln_factorial(k: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 171];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    match table.get(k as usize) {
        Some(v) => *v,
        None => table[170] + (171..=k).map(|i| f64::from(i).ln()).sum::<f64>(),
    }
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Amplitude `<l1, l2| B_theta |k1, k2>`. Zero unless `l1 + l2 == k1 + k2`.
pub fn bs_amplitude(theta: f64, k: (u32, u32), l: (u32, u32)) -> Complex64 {
    let (k1, k2) = k;
    let (l1, l2) = l;
    if l1 + l2 != k1 + k2 {
        return Complex64::new(0.0, 0.0);
    }
    let (s, c) = theta.sin_cos();
    let norm = 0.5 * (ln_factorial(l1) + ln_factorial(l2) - ln_factorial(k1) - ln_factorial(k2));
    let lo = l1.saturating_sub(k2);
    let hi = k1.min(l1);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in lo..=hi {
        let q = l1 - p;
        let cos_pow = (k2 + p - q) as i32;
        let sin_pow = k1 - p + q;
        let mag = (norm + ln_binomial(k1, p) + ln_binomial(k2, q)).exp();
        acc += i_pow(sin_pow) * (mag * c.powi(cos_pow) * s.powi(sin_pow as i32));
    }
    acc
}

/// Eigenvectors of `X = a1^dag a2 + a2^dag a1` on the `n`-photon sector, one
/// per column, paired with eigenvalues `n - 2m` in the same order.
struct SectorBasis {
    eigenvalues: Vec<f64>,
    vectors: nalgebra::DMatrix<f64>,
}

impl SectorBasis {
    fn new(n: usize) -> Self {
        let mut x = nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1);
        for l1 in 0..n {
            let v = (((l1 + 1) * (n - l1)) as f64).sqrt();
            x[(l1 + 1, l1)] = v;
            x[(l1, l1 + 1)] = v;
        }
        let eig = nalgebra::SymmetricEigen::new(x);
        // The spectrum is exactly {-n, -n + 2, ..., n}; snapping removes the
        // eigenvalue error, which theta would otherwise amplify.
        let eigenvalues = eig
            .eigenvalues
            .iter()
            .map(|lam| {
                let m = ((n as f64 - lam) / 2.0).round();
                n as f64 - 2.0 * m
            })
            .collect();
        SectorBasis {
            eigenvalues,
            vectors: eig.eigenvectors,
        }
    }
}

thread_local! {
    static SECTORS: std::cell::RefCell<HashMap<usize, Rc<SectorBasis>>> = Default::default();
}

fn sector_basis(n: usize) -> Rc<SectorBasis> {
    SECTORS.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(SectorBasis::new(n)))
            .clone()
    })
}

/// `B_theta |k1, k2>` as amplitudes indexed by the first output occupation.
///
/// On the `n`-photon sector `B_theta = exp(i theta X)` with `X` real symmetric
/// tridiagonal, so the column is a phase-weighted sum of orthonormal
/// eigenvectors. The closed form in [`bs_amplitude`] cancels large terms and
/// drifts from unitarity; this route stays at rounding level.
pub(crate) fn bs_column(theta: f64, k1: u32, k2: u32) -> Vec<Complex64> {
    let n = (k1 + k2) as usize;
    let basis = sector_basis(n);
    let v = &basis.vectors;
    let weights: Vec<Complex64> = basis
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(m, lam)| Complex64::from_polar(v[(k1 as usize, m)], theta * lam))
        .collect();
    (0..=n)
        .map(|l| weights.iter().enumerate().map(|(m, w)| w * v[(l, m)]).sum())
        .collect()
}

impl FockVector {
    /// The zero vector over `modes` modes.
    pub fn zero(modes: usize) -> Self {
        FockVector {
            modes,
            amps: BTreeMap::new(),
        }
    }

    pub fn basis(occ: impl Into<Occupation>) -> Self {
        let occ = occ.into();
        let mut v = FockVector::zero(occ.modes());
        v.amps.insert(occ, Complex64::new(1.0, 0.0));
        v
    }

    pub fn vacuum(modes: usize) -> Self {
        FockVector::basis(Occupation::vacuum(modes))
    }

    /// A 0-mode state, i.e. a complex number.
    pub fn scalar(z: Complex64) -> Self {
        let mut v = FockVector::zero(0);
        v.add_term(Occupation::default(), z);
        v
    }

    /// Build from terms; repeated occupations are summed.
    pub fn from_terms<I, O>(modes: usize, terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (O, Complex64)>,
        O: Into<Occupation>,
    {
        let mut v = FockVector::zero(modes);
        for (occ, z) in terms {
            let occ = occ.into();
            if occ.modes() != modes {
                return Err(FockError::ModeMismatch {
                    expected: modes,
                    got: occ.modes(),
                });
            }
            v.add_term(occ, z);
        }
        v.prune(DEFAULT_PRUNE_EPS);
        Ok(v)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn get(&self, occ: &Occupation) -> Complex64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    /// Accumulate `z` onto `occ` without pruning.
    pub fn add_term(&mut self, occ: Occupation, z: Complex64) {
        debug_assert_eq!(occ.modes(), self.modes);
        *self.amps.entry(occ).or_default() += z;
    }

    pub fn prune(&mut self, eps: f64) {
        self.amps.retain(|_, z| z.norm() >= eps);
    }

    pub fn pruned(mut self, eps: f64) -> Self {
        self.prune(eps);
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(Complex64::norm_sqr).sum()
    }

    pub fn max_photons(&self) -> u32 {
        self.amps.keys().map(Occupation::total).max().unwrap_or(0)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        FockVector {
            modes: self.modes,
            amps: self.amps.iter().map(|(k, v)| (k.clone(), v * z)).collect(),
        }
    }

    /// `self + z * other`.
    pub fn add_scaled(&mut self, other: &FockVector, z: Complex64) -> Result<(), FockError> {
        self.same_modes(other.modes)?;
        for (k, v) in &other.amps {
            self.add_term(k.clone(), v * z);
        }
        Ok(())
    }

    /// Largest coefficient difference.
    pub fn max_diff(&self, other: &FockVector) -> f64 {
        let mut d: f64 = 0.0;
        for (k, v) in &self.amps {
            d = d.max((v - other.get(k)).norm());
        }
        for (k, v) in &other.amps {
            if !self.amps.contains_key(k) {
                d = d.max(v.norm());
            }
        }
        d
    }

    fn same_modes(&self, modes: usize) -> Result<(), FockError> {
        if self.modes != modes {
            return Err(FockError::ModeMismatch {
                expected: self.modes,
                got: modes,
            });
        }
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.modes {
            return Err(FockError::BadMode {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }

    /// Map every basis term independently through `f` and sum.
    fn map_terms<F>(&self, modes: usize, mut f: F) -> FockVector
    where
        F: FnMut(&Occupation, Complex64, &mut FockVector),
    {
        let mut out = FockVector::zero(modes);
        for (k, v) in &self.amps {
            f(k, *v, &mut out);
        }
        out
    }

    /// `|..., k, ...> -> e^{i k phi} |..., k, ...>` on `mode`.
    pub fn apply_phase(&self, phi: f64, mode: usize) -> Result<FockVector, FockError> {
        self.check_mode(mode)?;
        Ok(self.map_terms(self.modes, |occ, z, out| {
            let k = f64::from(occ.0[mode]);
            out.add_term(occ.clone(), z * Complex64::from_polar(1.0, k * phi));
        }))
    }

    /// Beam splitter on `(wire, wire + 1)`.
    pub fn apply_bs(&self, theta: f64, wire: usize) -> Result<FockVector, FockError> {
        self.check_mode(wire + 1)?;
        Ok(self
            .map_terms(self.modes, |occ, z, out| {
                let k1 = occ.0[wire];
                let k2 = occ.0[wire + 1];
                for (l1, a) in bs_column(theta, k1, k2).into_iter().enumerate() {
                    if a.norm() == 0.0 {
                        continue;
                    }
                    let mut o = occ.clone();
                    o.0[wire] = l1 as u32;
                    o.0[wire + 1] = k1 + k2 - l1 as u32;
                    out.add_term(o, z * a);
                }
            })
            .pruned(DEFAULT_PRUNE_EPS))
    }

    /// Exchange modes `wire` and `wire + 1`.
    pub fn apply_swap(&self, wire: usize) -> Result<FockVector, FockError> {
        self.check_mode(wire + 1)?;
        Ok(self.map_terms(self.modes, |occ, z, out| {
            let mut o = occ.clone();
            o.0.swap(wire, wire + 1);
            out.add_term(o, z);
        }))
    }

    /// `a^dagger |k> = sqrt(k+1) |k+1>` on `mode`.
    pub fn apply_creation(&self, mode: usize) -> Result<FockVector, FockError> {
        self.check_mode(mode)?;
        Ok(self.map_terms(self.modes, |occ, z, out| {
            let mut o = occ.clone();
            let k = o.0[mode];
            o.0[mode] = k + 1;
            out.add_term(o, z * f64::from(k + 1).sqrt());
        }))
    }

    /// `self (x) other`, occupations concatenated.
    pub fn tensor(&self, other: &FockVector) -> FockVector {
        let mut out = FockVector::zero(self.modes + other.modes);
        for (a, x) in &self.amps {
            for (b, y) in &other.amps {
                out.add_term(a.concat(b), x * y);
            }
        }
        out
    }

    /// Insert `state`'s modes just before mode `at` (`at == modes` appends).
    pub fn insert_state(&self, at: usize, state: &FockVector) -> Result<FockVector, FockError> {
        if at > self.modes {
            return Err(FockError::BadMode {
                mode: at,
                modes: self.modes,
            });
        }
        let mut out = FockVector::zero(self.modes + state.modes);
        for (a, x) in &self.amps {
            for (b, y) in &state.amps {
                let mut o = Vec::with_capacity(out.modes);
                o.extend_from_slice(&a.0[..at]);
                o.extend_from_slice(&b.0);
                o.extend_from_slice(&a.0[at..]);
                out.add_term(Occupation(o), x * y);
            }
        }
        Ok(out)
    }

    /// Partial inner product of `effect` with modes `at .. at + effect.modes()`.
    pub fn contract(&self, at: usize, effect: &DualFockVector) -> Result<FockVector, FockError> {
        let k = effect.modes();
        if at + k > self.modes {
            return Err(FockError::BadMode {
                mode: at + k,
                modes: self.modes,
            });
        }
        let mut out = FockVector::zero(self.modes - k);
        for (a, x) in &self.amps {
            let key = Occupation(a.0[at..at + k].to_vec());
            let g = effect.0.get(&key);
            if g.norm() == 0.0 {
                continue;
            }
            let mut o = Vec::with_capacity(out.modes);
            o.extend_from_slice(&a.0[..at]);
            o.extend_from_slice(&a.0[at + k..]);
            out.add_term(Occupation(o), x * g);
        }
        Ok(out)
    }

    /// Parse `{ n1,...,nk: a+bi ; ... }`.
    pub fn parse_text(modes: usize, text: &str) -> Result<FockVector, String> {
        let body = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| "state must be enclosed in braces".to_string())?;
        let mut terms = Vec::new();
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (occ, amp) = part.split_once(':').ok_or_else(|| format!("term `{part}` lacks `:`"))?;
            let occ = parse_occupation(occ)?;
            if occ.modes() != modes {
                return Err(format!(
                    "occupation `{occ}` has {} modes, expected {modes}",
                    occ.modes()
                ));
            }
            let z = crate::expr::eval_complex(amp.trim())?;
            terms.push((occ, z));
        }
        FockVector::from_terms(modes, terms).map_err(|e| e.to_string())
    }
}

/// Parse a comma separated occupation list. Empty text is the 0-mode occupation.
pub fn parse_occupation(text: &str) -> Result<Occupation, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Occupation::default());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad photon count `{}`", t.trim()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Occupation)
}

/// `a+bi` with round-trip precision.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .amps
            .iter()
            .map(|(k, v)| format!("{k}: {}", format_complex(*v)))
            .collect();
        if terms.is_empty() {
            f.write_str("{ }")
        } else {
            write!(f, "{{ {} }}", terms.join(" ; "))
        }
    }
}

impl DualFockVector {
    pub fn from_coefficients(v: FockVector) -> Self {
        DualFockVector(v)
    }

    pub fn basis(occ: impl Into<Occupation>) -> Self {
        DualFockVector(FockVector::basis(occ))
    }

    pub fn coefficients(&self) -> &FockVector {
        &self.0
    }

    pub fn into_coefficients(self) -> FockVector {
        self.0
    }

    pub fn modes(&self) -> usize {
        self.0.modes
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.0.iter()
    }

    pub fn get(&self, occ: &Occupation) -> Complex64 {
        self.0.get(occ)
    }
}

impl fmt::Display for DualFockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `<g|v>`; `g` already holds bra coefficients so nothing is conjugated.
pub fn inner_product(g: &DualFockVector, v: &FockVector) -> Result<Complex64, FockError> {
    if g.modes() != v.modes() {
        return Err(FockError::ModeMismatch {
            expected: g.modes(),
            got: v.modes(),
        });
    }
    let (small, large) = if g.0.amps.len() <= v.amps.len() {
        (&g.0, v)
    } else {
        (v, &g.0)
    };
    Ok(small.amps.iter().map(|(k, x)| x * large.get(k)).sum())
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    modes: usize,
    terms: Vec<(Occupation, [f64; 2])>,
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateRepr {
            modes: self.modes,
            terms: self.amps.iter().map(|(k, v)| (k.clone(), [v.re, v.im])).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = StateRepr::deserialize(d)?;
        let mut v = FockVector::zero(r.modes);
        for (k, [re, im]) in r.terms {
            if k.modes() != r.modes {
                return Err(serde::de::Error::custom(format!(
                    "occupation {k} does not have {} modes",
                    r.modes
                )));
            }
            v.add_term(k, Complex64::new(re, im));
        }
        Ok(v)
    }
}

impl Serialize for DualFockVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualFockVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FockVector::deserialize(d).map(DualFockVector)
    }
}

/// Apply one column. Generators are applied bottom-up so that lower-indexed
/// wires keep their positions while sources and detectors change the width.
pub fn eval_column(col: &Column, v: &FockVector, cfg: &EvalConfig) -> Result<FockVector, FockError> {
    let mut cur = v.clone();
    for g in col.generators().iter().rev() {
        cur = match g {
            Generator::PhaseShifter { wire, phi } => cur.apply_phase(phi.value, *wire)?,
            Generator::BeamSplitter { wire, theta } => cur.apply_bs(theta.value, *wire)?,
            Generator::Swap { wire } => cur.apply_swap(*wire)?,
            Generator::Source { wire, state } => cur.insert_state(*wire, state)?,
            Generator::Detector { wire, effect } => cur.contract(*wire, effect)?,
        };
    }
    cur.prune(cfg.prune_eps);
    if let Some(cap) = cfg.max_photons {
        let count = cur.max_photons();
        if count > cap {
            return Err(FockError::PhotonCap { cap, count });
        }
    }
    Ok(cur)
}

/// Many-photon semantics of `c` applied to `v`.
pub fn eval_circuit(c: &Circuit, v: &FockVector, cfg: &EvalConfig) -> Result<FockVector, FockError> {
    if v.modes() != c.n_in() {
        return Err(FockError::ModeMismatch {
            expected: c.n_in(),
            got: v.modes(),
        });
    }
    c.columns()
        .iter()
        .try_fold(v.clone(), |acc, col| eval_column(col, &acc, cfg))
}
