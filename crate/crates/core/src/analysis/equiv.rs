use serde::Serialize;

use crate::angle::circle_dist;
use crate::circuit::{Circuit, Generator};
use crate::error::{AnalysisError, RewriteError};
use crate::fock::{eval_circuit, EvalConfig, FockVector, Occupation};
use crate::rewrite::{nf_equal_with, normalize_with, NormalizeOptions, Normalized};
use crate::rewrite::{AMP_EPS, ANGLE_EPS, DEFAULT_STEP_LIMIT};

/// Headroom added to the photons injected by sources when probing semantics.
const EXTRA_PHOTONS: u32 = 4;

/// A basis input on which two circuits disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub input: Occupation,
    /// Largest amplitude difference of the two outputs.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EquivVerdict {
    /// Both normal forms agree.
    EquivalentNf,
    /// The normal forms differ in `component`; `witness` is a basis input
    /// telling the semantics apart, if one exists below the cutoff.
    DistinctNf {
        component: String,
        witness: Option<Mismatch>,
    },
    /// Normalization ran out of steps; a numeric probe found this difference.
    NumericMismatch(Mismatch),
    /// Normalization ran out of steps and no numeric difference was found.
    NumericAgreement { cutoff: u32 },
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivVerdict::EquivalentNf | EquivVerdict::NumericAgreement { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivConfig {
    /// Photon bound of the numeric witness search.
    pub cutoff: u32,
    pub step_limit: usize,
    pub angle_eps: f64,
    pub amp_eps: f64,
}

impl EquivConfig {
    /// Default tolerances and step limit with the given cutoff.
    pub fn with_cutoff(cutoff: u32) -> Self {
        EquivConfig {
            cutoff,
            step_limit: DEFAULT_STEP_LIMIT,
            angle_eps: ANGLE_EPS,
            amp_eps: AMP_EPS,
        }
    }
}

/// Photons injected by the sources of `c`, plus a margin.
pub fn default_cutoff(c: &Circuit) -> u32 {
    let injected: u32 = c
        .generators()
        .filter_map(|g| match g {
            Generator::Source { state, .. } => Some(state.max_photons()),
            _ => None,
        })
        .sum();
    injected + EXTRA_PHOTONS
}

/// First basis input, by increasing photon count, where `a` and `b` differ
/// by more than `amp_eps`.
pub fn find_witness(a: &Circuit, b: &Circuit, cutoff: u32, amp_eps: f64) -> Result<Option<Mismatch>, AnalysisError> {
    let cfg = EvalConfig::default();
    for occ in Occupation::up_to(a.n_in(), cutoff) {
        let v = FockVector::basis(occ.clone());
        let delta = eval_circuit(a, &v, &cfg)?.max_diff(&eval_circuit(b, &v, &cfg)?);
        if delta > amp_eps {
            return Ok(Some(Mismatch { input: occ, delta }));
        }
    }
    Ok(None)
}

/// The first component in which two normal forms differ, or `None`.
pub fn nf_difference(a: &Normalized, b: &Normalized) -> Option<String> {
    nf_difference_with(a, b, ANGLE_EPS, AMP_EPS)
}

/// [`nf_difference`] with explicit tolerances.
pub fn nf_difference_with(a: &Normalized, b: &Normalized, angle_eps: f64, amp_eps: f64) -> Option<String> {
    let (x, y) = match (a, b) {
        (Normalized::Zero(x), Normalized::Zero(y)) => return (x != y).then(|| "shape".into()),
        (Normalized::Normal(x), Normalized::Normal(y)) => (x, y),
        _ => return Some("zero form".into()),
    };
    if x.split() != y.split() || x.triangle.size() != y.triangle.size() {
        return Some("shape".into());
    }
    if let Some((i, j)) = x
        .triangle
        .bs_indices()
        .find(|&(i, j)| (x.triangle.theta(i, j) - y.triangle.theta(i, j)).abs() > angle_eps)
    {
        return Some(format!("theta[{i}][{j}]"));
    }
    if let Some((i, j)) = x
        .triangle
        .phase_indices()
        .find(|&(i, j)| circle_dist(x.triangle.phi(i, j), y.triangle.phi(i, j)) > angle_eps)
    {
        return Some(format!("phi[{i}][{j}]"));
    }
    (x.f.max_diff(&y.f) > amp_eps).then(|| "f".into())
}

/// Decide whether `a` and `b` denote the same map by comparing normal forms.
/// Falls back to a numeric probe up to `cfg.cutoff` photons when either side
/// exceeds the step limit.
pub fn equiv(a: &Circuit, b: &Circuit, cfg: &EquivConfig) -> Result<EquivVerdict, AnalysisError> {
    if a.n_in() != b.n_in() || a.n_out() != b.n_out() {
        return Err(AnalysisError::ArityMismatch {
            left_in: a.n_in(),
            left_out: a.n_out(),
            right_in: b.n_in(),
            right_out: b.n_out(),
        });
    }
    let opts = NormalizeOptions {
        step_limit: cfg.step_limit,
        check_steps: false,
    };
    let (cutoff, amp_eps) = (cfg.cutoff, cfg.amp_eps);
    let nfs = normalize_with(a, &opts, |_| {}).and_then(|x| Ok((x, normalize_with(b, &opts, |_| {})?)));
    match nfs {
        Ok((x, y)) => {
            if nf_equal_with(&x, &y, cfg.angle_eps, amp_eps) {
                return Ok(EquivVerdict::EquivalentNf);
            }
            let component = nf_difference_with(&x, &y, cfg.angle_eps, amp_eps).unwrap_or_else(|| "f".into());
            Ok(EquivVerdict::DistinctNf {
                component,
                witness: find_witness(a, b, cutoff, amp_eps)?,
            })
        }
        Err(RewriteError::Budget(_)) => Ok(match find_witness(a, b, cutoff, amp_eps)? {
            Some(m) => EquivVerdict::NumericMismatch(m),
            None => EquivVerdict::NumericAgreement { cutoff },
        }),
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_dsl;

    fn c(text: &str) -> Circuit {
        parse_dsl(text).unwrap()
    }

    #[test]
    fn phases_differ_on_one_photon() {
        let a = c("circuit 1 -> 1\nps 0 0.1\n");
        let b = c("circuit 1 -> 1\nps 0 0.2\n");
        let v = equiv(&a, &b, &EquivConfig::with_cutoff(3)).unwrap();
        let EquivVerdict::DistinctNf { component, witness } = v else {
            panic!("{v:?}")
        };
        assert!(component.starts_with("phi"), "{component}");
        assert_eq!(witness.unwrap().input, Occupation(vec![1]));
    }

    #[test]
    fn full_turn_is_equivalent() {
        let a = c("circuit 1 -> 1\nps 0 2*pi + 0.3\n");
        let b = c("circuit 1 -> 1\nps 0 0.3\n");
        assert_eq!(
            equiv(&a, &b, &EquivConfig::with_cutoff(3)).unwrap(),
            EquivVerdict::EquivalentNf
        );
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = c("circuit 1 -> 1\nps 0 0.1\n");
        let b = Circuit::identity(2);
        assert!(matches!(
            equiv(&a, &b, &EquivConfig::with_cutoff(3)),
            Err(AnalysisError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn budget_falls_back_to_numerics() {
        let a = c("circuit 2 -> 2\nbs 0 0.3\nps 0 0.2\nbs 0 0.5\n");
        let cfg = EquivConfig {
            step_limit: 0,
            ..EquivConfig::with_cutoff(3)
        };
        let v = equiv(&a, &a, &cfg).unwrap();
        assert_eq!(v, EquivVerdict::NumericAgreement { cutoff: 3 });
    }

    #[test]
    fn cutoff_counts_source_photons() {
        let a = c("circuit 1 -> 1\nsource 2 @ 1 { 2,1: 1 }\n---\ndetector 2 @ 1 { 2,1: 1 }\n");
        assert_eq!(default_cutoff(&a), 7);
    }
}
