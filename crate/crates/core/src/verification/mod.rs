//! Sample-based certification: Bell-sampling purity, symmetry checks on
//! rotated graph states, and planted-secret IQP verification.

mod bell;
mod graph;
mod pauli;
mod planted;

pub use bell::{
    bell_sample, bell_sample_states, estimate_purity, fidelity_from_bell, fidelity_from_purity,
    BellLabel, BellOutcome, BellSampleSet,
};
pub use graph::{
    estimate_fidelity_graph, fidelity_bound_from_generators, graph_symmetries, stabilizer_element,
    symmetry_average, SymmetryOperator,
};
pub use pauli::PauliString;
pub use planted::{
    bias, plant_secret_iqp, uniform_tail, verify_planted, PlantParams, SecretKey, Verdict,
};
