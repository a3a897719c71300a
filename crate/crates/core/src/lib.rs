//! Linear optical circuits with photon sources and detectors.
//!
//! * [`fock`]: sparse Fock states and the many-photon semantics.
//! * [`unitary`]: single-photon matrices of passive circuits.
//! * [`euler`]: closed-form angle solvers for the two Euler equations.
//! * [`synthesis`]: triangular circuits, their classification and synthesis.
//! * [`rewrite`]: the terminating rewrite system and its normal forms.
//! * [`analysis`]: equivalence checking and semantic test harnesses.

pub mod analysis;
pub mod angle;
pub mod circuit;
pub mod dsl;
pub mod error;
pub mod euler;
mod expr;
pub mod fock;
pub mod gallery;
pub mod rewrite;
pub mod synthesis;
pub mod unitary;

pub use angle::Angle;
pub use circuit::{Circuit, Column, Generator, ValidationReport};
pub use error::{AnalysisError, CircuitError, Error, FockError, NumericError, ParseError, RewriteError};
pub use fock::{eval_circuit, inner_product, DualFockVector, EvalConfig, FockVector, Occupation};
pub use num_complex::Complex64;
pub use unitary::{matrix_of, random_unitary, UnitaryMatrix};

pub use expr::{eval_complex, eval_real};
