use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{AnalysisError, FockError};
use crate::fock::{eval_circuit, EvalConfig, FockVector, Occupation};

/// A linear map `F(n) -> F(m)` known through its images of the basis states
/// with at most `cutoff` photons. Anything above the cutoff is out of reach.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapSample {
    n_in: usize,
    n_out: usize,
    cutoff: u32,
    images: BTreeMap<Occupation, FockVector>,
}

impl LinearMapSample {
    /// Sample `f` on every basis input with at most `cutoff` photons.
    pub fn from_fn<E>(
        n_in: usize,
        n_out: usize,
        cutoff: u32,
        mut f: impl FnMut(&FockVector) -> Result<FockVector, E>,
    ) -> Result<Self, E> {
        let images = Occupation::up_to(n_in, cutoff)
            .into_iter()
            .map(|x| {
                let v = FockVector::basis(x.clone());
                f(&v).map(|y| (x, y))
            })
            .collect::<Result<_, E>>()?;
        Ok(LinearMapSample {
            n_in,
            n_out,
            cutoff,
            images,
        })
    }

    pub fn of_circuit(c: &Circuit, cutoff: u32) -> Result<Self, FockError> {
        let cfg = EvalConfig::default();
        Self::from_fn(c.n_in(), c.n_out(), cutoff, |v| eval_circuit(c, v, &cfg))
    }

    pub fn zero(n_in: usize, n_out: usize, cutoff: u32) -> Self {
        Self::from_fn(n_in, n_out, cutoff, |_| Ok::<_, FockError>(FockVector::zero(n_out))).expect("infallible")
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn image(&self, x: &Occupation) -> Option<&FockVector> {
        self.images.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &FockVector)> {
        self.images.iter()
    }

    /// `<y| M |x>`; zero when `x` is above the cutoff.
    pub fn entry(&self, x: &Occupation, y: &Occupation) -> Complex64 {
        self.images.get(x).map_or(Complex64::new(0.0, 0.0), |v| v.get(y))
    }

    /// Image of an arbitrary state, by linearity.
    pub fn apply(&self, v: &FockVector) -> Result<FockVector, AnalysisError> {
        let mut out = FockVector::zero(self.n_out);
        for (x, z) in v.iter() {
            let img = self.images.get(x).ok_or_else(|| {
                AnalysisError::CostGuard(format!("input {x} is above the sampled cutoff {}", self.cutoff))
            })?;
            out.add_scaled(img, *z)?;
        }
        Ok(out)
    }

    /// `self += z * other`; both must be sampled on the same inputs.
    pub fn add_scaled(&mut self, other: &LinearMapSample, z: Complex64) -> Result<(), AnalysisError> {
        self.check_shape(other)?;
        for (x, img) in &other.images {
            self.images.get_mut(x).expect("same probe set").add_scaled(img, z)?;
        }
        Ok(())
    }

    /// Post-compose every image with `f`.
    pub fn map_images(
        &self,
        n_out: usize,
        mut f: impl FnMut(&FockVector) -> Result<FockVector, FockError>,
    ) -> Result<Self, FockError> {
        let images = self
            .images
            .iter()
            .map(|(x, v)| f(v).map(|y| (x.clone(), y)))
            .collect::<Result<_, _>>()?;
        Ok(LinearMapSample {
            n_in: self.n_in,
            n_out,
            cutoff: self.cutoff,
            images,
        })
    }

    /// Largest amplitude difference over the sampled inputs.
    pub fn max_diff(&self, other: &LinearMapSample) -> Result<f64, AnalysisError> {
        self.check_shape(other)?;
        Ok(self
            .images
            .iter()
            .map(|(x, v)| v.max_diff(&other.images[x]))
            .fold(0.0, f64::max))
    }

    fn check_shape(&self, other: &LinearMapSample) -> Result<(), AnalysisError> {
        if (self.n_in, self.n_out, self.cutoff) != (other.n_in, other.n_out, other.cutoff) {
            return Err(AnalysisError::ArityMismatch {
                left_in: self.n_in,
                left_out: self.n_out,
                right_in: other.n_in,
                right_out: other.n_out,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Generator;

    #[test]
    fn apply_matches_direct_evaluation() {
        let c = Circuit::from_sequence(2, [Generator::bs(0, 0.4), Generator::ps(1, 1.1)]).unwrap();
        let s = LinearMapSample::of_circuit(&c, 3).unwrap();
        let mut v = FockVector::basis([1, 1]);
        v.add_term(Occupation(vec![2, 0]), Complex64::new(0.3, -0.2));
        v.add_term(Occupation(vec![0, 1]), Complex64::new(-1.0, 0.5));
        let direct = eval_circuit(&c, &v, &EvalConfig::default()).unwrap();
        assert!(s.apply(&v).unwrap().max_diff(&direct) < 1e-12);
        assert!(s.apply(&FockVector::basis([4, 0])).is_err());
    }

    #[test]
    fn linear_combination_and_distance() {
        let a = LinearMapSample::of_circuit(&Circuit::identity(1), 2).unwrap();
        let mut b = LinearMapSample::zero(1, 1, 2);
        b.add_scaled(&a, Complex64::new(2.0, 0.0)).unwrap();
        assert!((a.max_diff(&b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            b.entry(&Occupation(vec![1]), &Occupation(vec![1])),
            Complex64::new(2.0, 0.0)
        );
        assert!(a.max_diff(&LinearMapSample::zero(1, 1, 3)).is_err());
    }
}
