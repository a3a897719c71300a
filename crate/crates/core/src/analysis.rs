//! Equivalence checking and semantic harnesses: sampled linear maps, random
//! circuits, axiom instances and the sum-of-diagrams decomposition.

mod axioms;
mod decomposition;
mod equiv;
mod random;
mod sample;

pub use axioms::{check_axiom, random_instance, random_rewrite, sequence, AxiomId, AxiomInstance};
pub use decomposition::{
    create, delta, delta_threshold, identity_wire_sides, lambda_commute_check, omega, omega_coefficients, omega_sum,
    plugged, rev_lex_less, sector_unitarity, slice_last, MAX_LAMBDA_CUTOFF, MAX_LAMBDA_EXPONENT,
};
pub use equiv::{
    default_cutoff, equiv, find_witness, nf_difference, nf_difference_with, EquivConfig, EquivVerdict, Mismatch,
};
pub use random::{random_circuit, random_lopp, random_state, random_tmn, RandomCircuitConfig};
pub use sample::LinearMapSample;
